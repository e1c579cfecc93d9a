#ifndef MONOAPPROX_HAAR_BASIS_HPP
#define MONOAPPROX_HAAR_BASIS_HPP

// Dyadic index arithmetic and the Haar basis on [0,1]^d, in the convention
// where each wavelet is positive on the upper half of its support.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "monoapprox/common.hpp"

namespace monoapprox {

using BigInt = boost::multiprecision::cpp_int;

/// Largest resolution accepted anywhere (2^r must fit comfortably in 64 bits).
inline constexpr unsigned kMaxResolution = 52;

/// One-dimensional Haar index alpha = 2^level + shift. alpha = 0 is the
/// constant function; its level is "bottom" (no numeric value).
class HaarIndex1D {
public:
    HaarIndex1D() = default;
    explicit HaarIndex1D(std::uint64_t alpha);

    std::uint64_t alpha() const noexcept { return alpha_; }
    bool is_constant() const noexcept { return alpha_ == 0; }
    /// std::nullopt is the bottom level of the constant index.
    std::optional<unsigned> level() const noexcept;
    std::uint64_t shift() const noexcept;

    /// max(0, level); bottom counts as 0.
    unsigned level_plus() const noexcept;

    friend bool operator==(const HaarIndex1D&, const HaarIndex1D&) = default;

private:
    std::uint64_t alpha_ = 0;
};

struct LevelShift {
    std::optional<unsigned> level;
    std::uint64_t shift = 0;

    friend bool operator==(const LevelShift&, const LevelShift&) = default;
};

LevelShift split_index(std::uint64_t alpha);

/// Inverse of split_index. Throws DomainError if shift >= 2^level.
std::uint64_t join_index(std::optional<unsigned> level, std::uint64_t shift);

/// [lo, hi) or, for the last interval of a level, [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool closed_right = true;

    bool contains(double x) const noexcept
    {
        return x >= lo && (x < hi || (closed_right && x == hi));
    }
};

Interval interval_of(unsigned level, std::uint64_t shift);

/// min(floor(2^level x), 2^level - 1); the top cell is closed.
std::uint64_t cell_of_point(double x, unsigned level);

/// Base-m version of cell_of_point: min(floor(m x), m - 1).
std::uint64_t cell_of_point_m(double x, std::uint64_t m);

double psi_1d(std::uint64_t alpha, double x);

/// Tensor-product Haar index.
class MultiIndex {
public:
    MultiIndex() = default;
    explicit MultiIndex(std::vector<std::uint64_t> alphas);
    static MultiIndex zero(std::size_t d) { return MultiIndex(std::vector<std::uint64_t>(d, 0)); }

    std::size_t dim() const noexcept { return alphas_.size(); }
    std::uint64_t operator[](std::size_t j) const { return alphas_[j]; }
    HaarIndex1D entry(std::size_t j) const { return HaarIndex1D(alphas_[j]); }
    const std::vector<std::uint64_t>& alphas() const noexcept { return alphas_; }

    /// |alpha|_0, the number of active variables.
    std::size_t active_count() const noexcept;
    /// |lambda|_+.
    unsigned level_sum() const noexcept;
    /// 2^{-|lambda|_+}.
    double support_volume() const noexcept;
    /// Largest level among active entries, or nullopt if none are active.
    std::optional<unsigned> max_level() const noexcept;

    friend bool operator==(const MultiIndex&, const MultiIndex&) = default;
    friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;

private:
    std::vector<std::uint64_t> alphas_;
};

double psi_d(const MultiIndex& index, PointView x);

/// Sign pattern of psi_d: value is sign * 2^{|lambda|_+ / 2}, sign in {-1,0,1}.
int psi_d_sign(const MultiIndex& index, PointView x);

/// A cell of a (possibly anisotropic) dyadic grid.
struct DyadicCell {
    std::vector<unsigned> resolution;
    std::vector<std::uint64_t> cell_index;

    double volume() const;
    Point midpoint() const;
    bool contains(PointView x) const;
};

/// The support C_alpha of psi_alpha as a dyadic cell.
DyadicCell support_cell(const MultiIndex& index);

struct IndexSetSize {
    BigInt exact;
    /// 2^{rk} (e d / k)^k; NaN for k = 0, where the bound is undefined.
    double bound;
};

/// #{alpha : |alpha|_0 <= k, all levels < r} = sum_l C(d,l) (2^r - 1)^l.
IndexSetSize index_set_size(unsigned d, unsigned k, unsigned r);

/// Exact binomial coefficient.
BigInt binomial(unsigned n, unsigned k);

/// Converts to uint64, throwing ResourceError with `what` if it does not fit.
std::uint64_t to_u64_checked(const BigInt& v, const char* what);

/// Bijection between the index set {|alpha|_0 <= k, levels < r} and
/// 0..size-1. Order: by active count, then active coordinate set in
/// colexicographic order, then the active alphas in mixed radix (2^r - 1)
/// with the lowest active coordinate fastest.
class IndexRanking {
public:
    IndexRanking(unsigned d, unsigned k, unsigned r);

    unsigned d() const noexcept { return d_; }
    unsigned k() const noexcept { return k_; }
    unsigned r() const noexcept { return r_; }
    std::uint64_t size() const noexcept { return size_; }

    std::uint64_t rank(const MultiIndex& index) const;
    MultiIndex unrank(std::uint64_t rank) const;

    /// Rank from an explicit active set (ascending coordinates) and the
    /// corresponding alphas, without building a MultiIndex.
    std::uint64_t rank_active(std::span<const unsigned> coords,
                              std::span<const std::uint64_t> alphas) const;

    bool contains(const MultiIndex& index) const noexcept;

private:
    unsigned d_, k_, r_;
    std::uint64_t radix_;                       // 2^r - 1
    std::uint64_t size_;
    std::vector<std::uint64_t> offset_;         // first rank of each active count
    std::vector<std::uint64_t> radix_pow_;      // radix^l
    std::vector<std::vector<std::uint64_t>> binom_; // C(n, l), n <= d
};

/// Lazily produces enumerate_indices(d, k, r) in IndexRanking order.
class IndexStream {
public:
    IndexStream(unsigned d, unsigned k, unsigned r);

    /// Writes the next index into `out`; false once exhausted.
    bool next(MultiIndex& out);
    std::uint64_t size() const noexcept { return ranking_.size(); }

private:
    IndexRanking ranking_;
    std::uint64_t pos_ = 0;
};

/// All indices with |alpha|_0 <= k and levels < r. Throws ResourceError
/// if the set has more than `budget` elements.
std::vector<MultiIndex> enumerate_indices(unsigned d, unsigned k, unsigned r,
                                          std::uint64_t budget = kDefaultCoefficientBudget);

/// Calls visit(coords, alphas, sign, level_sum) for every index with
/// |alpha|_0 <= k and levels < r whose support contains the point with
/// resolution-r digit keys `keys`. coords are ascending, alphas match them,
/// and sign is the sign of psi_alpha at the point. The zero index comes first.
template <typename Visit>
void for_each_index_at(std::span<const std::uint64_t> keys, unsigned k, unsigned r, Visit&& visit)
{
    const auto d = static_cast<unsigned>(keys.size());
    std::vector<unsigned> coords;
    std::vector<std::uint64_t> alphas;
    coords.reserve(k);
    alphas.reserve(k);
    auto rec = [&](auto& self, unsigned start, int sign, unsigned level_sum) -> void {
        visit(std::span<const unsigned>(coords), std::span<const std::uint64_t>(alphas), sign,
              level_sum);
        if (coords.size() == k)
            return;
        for (unsigned j = start; j < d; ++j) {
            for (unsigned lambda = 0; lambda < r; ++lambda) {
                const std::uint64_t shift = keys[j] >> (r - lambda);
                const bool upper = ((keys[j] >> (r - lambda - 1)) & 1U) != 0;
                coords.push_back(j);
                alphas.push_back((std::uint64_t{1} << lambda) + shift);
                self(self, j + 1, upper ? sign : -sign, level_sum + lambda);
                coords.pop_back();
                alphas.pop_back();
            }
        }
    };
    rec(rec, 0U, 1, 0U);
}

/// Number of indices for_each_index_at visits: sum_l C(d,l) r^l.
BigInt indices_per_point(unsigned d, unsigned k, unsigned r);

} // namespace monoapprox

#endif
