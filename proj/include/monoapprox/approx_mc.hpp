#ifndef MONOAPPROX_APPROX_MC_HPP
#define MONOAPPROX_APPROX_MC_HPP

// Monte Carlo Haar-wavelet approximators: the linear reconstruction from
// estimated coefficients, its sign, and the generalized threshold-averaged
// variant evaluated through the sorted-sample / chi-table recursion.

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "monoapprox/common.hpp"
#include "monoapprox/haar_basis.hpp"

namespace monoapprox {

enum class Mode { linear, sign, generalized };

std::string_view to_string(Mode mode);
/// Parses "linear" | "sign" | "generalized" (also "hat" for sign).
Mode parse_mode(std::string_view text);

/// Evaluation points with recorded oracle values, optionally carrying
/// resolution-r digit keys and sorted by value.
class SampleSet {
public:
    explicit SampleSet(unsigned d);

    /// Throws ContractError unless y is in [-1, 1] and x in [0, 1]^d.
    void add(PointView x, double y);

    unsigned dim() const noexcept { return d_; }
    std::size_t size() const noexcept { return values_.size(); }
    PointView point(std::size_t i) const { return {points_.data() + i * d_, d_}; }
    double value(std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }

    /// Computes digit_keys[i][j] = cell_of_point(points[i][j], r).
    void prepare_keys(unsigned r);
    std::optional<unsigned> key_resolution() const noexcept { return key_resolution_; }
    /// Throws StateError if keys were not prepared.
    std::span<const std::uint64_t> keys(std::size_t i) const;

    /// Stable sort by value (nondecreasing); keys move with their points.
    void sort_by_value();
    bool sorted() const noexcept { return sorted_; }

    bool operator==(const SampleSet&) const = default;

private:
    unsigned d_;
    std::vector<double> points_;
    std::vector<double> values_;
    std::vector<std::uint64_t> keys_;
    std::optional<unsigned> key_resolution_;
    bool sorted_ = false;
};

/// n i.i.d. uniform points on [0,1]^d with oracle values. Deterministic in
/// `seed`. Throws ResourceError if n exceeds `budget`.
SampleSet draw_samples(unsigned d, std::uint64_t n, const Oracle& oracle, std::uint64_t seed,
                       std::uint64_t budget = kDefaultSampleBudget);

/// n h(x) with the sum of the absolute values of its terms.
struct ScaledValue {
    double value = 0.0;
    double magnitude = 0.0;
};

/// Coefficient estimates over the index set {|alpha|_0 <= k, levels < r}.
///
/// Stored as raw signed sums T(alpha) = sum_i s_alpha(X_i) y_i (s the sign
/// pattern of psi) and the sample count n, so that
///   estimate(alpha)   = 2^{|lambda|_+/2} T(alpha) / n
///   n * h(x)          = sum_alpha T(alpha) s_alpha(x) 2^{|lambda|_+}.
/// For sign-valued data every term is an integer and the reconstruction sum
/// is exact in double precision.
class CoefficientTable {
public:
    CoefficientTable(unsigned d, unsigned k, unsigned r,
                     std::uint64_t budget = kDefaultCoefficientBudget);

    /// Table holding prescribed coefficient values (in ranking order).
    static CoefficientTable from_coefficients(unsigned d, unsigned k, unsigned r,
                                              std::span<const double> coefficients);

    const IndexRanking& ranking() const noexcept { return ranking_; }
    std::uint64_t size() const noexcept { return ranking_.size(); }
    std::uint64_t sample_count() const noexcept { return n_; }

    double at(const MultiIndex& index) const;
    double at_rank(std::uint64_t rank) const;
    MultiIndex index_at(std::uint64_t rank) const { return ranking_.unrank(rank); }
    double raw_sum(std::uint64_t rank) const { return raw_[rank]; }

    /// n * h(x), accumulated over the indices whose support contains x.
    double scaled_reconstruction(PointView x) const;
    ScaledValue scaled_terms(PointView x) const;
    /// h(x) = sum_alpha estimate(alpha) psi_alpha(x).
    double reconstruct(PointView x) const;

private:
    friend CoefficientTable estimate_coefficients(const SampleSet&, unsigned, unsigned, unsigned,
                                                  std::uint64_t);

    IndexRanking ranking_;
    std::vector<double> raw_;
    std::uint64_t n_ = 0;
};

/// Empirical means (1/n) sum_i psi_alpha(X_i) y_i for the whole index set,
/// accumulated per sample over the indices whose support contains it.
CoefficientTable estimate_coefficients(const SampleSet& samples, unsigned d, unsigned k,
                                       unsigned r,
                                       std::uint64_t budget = kDefaultCoefficientBudget);

/// Number of coordinates j with cell_of_point(x_j, r) == keys[j].
unsigned match_count(PointView x, std::span<const std::uint64_t> keys, unsigned r);

/// chi(b) = sum_{l <= b ^ k} C(b,l) (2^r - 1)^l sum_{m <= (d-b) ^ (k-l)} C(d-b,m) (-1)^m,
/// i.e. n times the contribution of one sample to the truncated
/// reconstruction at a point whose resolution-r cell agrees with the
/// sample's in exactly b coordinates.
BigInt chi_value(unsigned b, unsigned d, unsigned k, unsigned r);

/// chi(0..d), exact, with an int64 copy when every entry fits.
struct ChiTable {
    std::vector<BigInt> exact;
    std::vector<std::int64_t> small;
    std::vector<long double> approx;
    bool fits_int64 = false;

    static ChiTable build(unsigned d, unsigned k, unsigned r);
};

struct WaveletParams {
    unsigned d = 1;
    unsigned k = 1;
    unsigned r = 1;
    std::uint64_t n = 0;
};

/// A fitted approximant. Immutable once built; safe to share across threads.
class WaveletModel {
public:
    Mode mode() const noexcept { return mode_; }
    const WaveletParams& params() const noexcept { return params_; }

    /// Present in linear and sign mode.
    const CoefficientTable* coefficients() const noexcept { return table_.get(); }
    /// Present in generalized mode: sorted samples with digit keys.
    const SampleSet* sorted_samples() const noexcept { return samples_.get(); }
    const ChiTable& chi_table() const noexcept { return chi_; }

    /// Dispatches on mode.
    double operator()(PointView x) const;

private:
    friend WaveletModel build_model(SampleSet samples, unsigned k, unsigned r, Mode mode,
                                    std::uint64_t budget);

    Mode mode_ = Mode::linear;
    WaveletParams params_;
    std::shared_ptr<const CoefficientTable> table_;
    std::shared_ptr<const SampleSet> samples_;
    ChiTable chi_;
};

/// Builds a model of the requested mode from already drawn samples.
WaveletModel build_model(SampleSet samples, unsigned k, unsigned r, Mode mode,
                         std::uint64_t budget = kDefaultCoefficientBudget);

/// Draws n samples once and builds the model.
WaveletModel fit(const Oracle& oracle, unsigned d, unsigned k, unsigned r, std::uint64_t n,
                 std::uint64_t seed, Mode mode,
                 std::uint64_t sample_budget = kDefaultSampleBudget,
                 std::uint64_t coefficient_budget = kDefaultCoefficientBudget);

/// sum_alpha h(alpha) psi_alpha(x). Linear or sign models.
double eval_linear(const WaveletModel& model, PointView x);
/// sgn(eval_linear) with sgn(0) = +1.
double eval_sign(const WaveletModel& model, PointView x);
/// 1/2 sum_{i=0}^{n} (y_{i+1} - y_i) sgn(g_i(x)) with y_0 = -1, y_{n+1} = +1.
/// Requires a generalized model (StateError otherwise). n = 0 gives +1.
double eval_generalized(const WaveletModel& model, PointView x);

/// g_0(x), ..., g_n(x) of the recursion g_i = g_{i-1} - (2/n) chi(b_i(x)).
std::vector<double> chi_recursion(const WaveletModel& model, PointView x);

/// Exact L1 error of the sign or generalized approximant with k = d at
/// resolution r, for a truth constant on resolution-s cells (s <= r).
///
/// With k = d the reconstruction on a resolution-r cell only sees the
/// samples inside it, so the output there is the truth value (generalized)
/// or its sign (sign mode) if the cell is occupied, and +1 if it is empty.
/// The error therefore depends on the samples only through the multinomial
/// cell occupancy, which is drawn directly by recursive binomial splitting.
/// Subtrees in which the union bound on "some cell is empty" is below 2^-64
/// are taken to have no empty cell.
struct OccupancyError {
    double l1_error = 0.0;
    /// Empty resolution-r cells whose truth value is not +1.
    double empty_cells = 0.0;
};

OccupancyError full_resolution_error(const Oracle& truth, unsigned d, unsigned truth_resolution,
                                     unsigned r, std::uint64_t n, std::uint64_t seed, Mode mode,
                                     std::uint64_t budget = default_cell_budget());

/// Number of empty cells when N balls fall uniformly into 2^exponent cells.
template <typename Engine>
double sample_empty_cells(std::uint64_t balls, unsigned exponent, Engine& eng);

} // namespace monoapprox

#include "monoapprox/detail/occupancy.hpp"

#endif
