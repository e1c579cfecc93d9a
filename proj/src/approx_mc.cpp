#include "monoapprox/approx_mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "monoapprox/detail/numeric.hpp"

namespace monoapprox {

std::string_view to_string(Mode mode)
{
    switch (mode) {
    case Mode::linear:
        return "linear";
    case Mode::sign:
        return "sign";
    case Mode::generalized:
        return "generalized";
    }
    return "?";
}

Mode parse_mode(std::string_view text)
{
    if (text == "linear")
        return Mode::linear;
    if (text == "sign" || text == "hat")
        return Mode::sign;
    if (text == "generalized" || text == "bar")
        return Mode::generalized;
    throw DomainError("unknown mode '" + std::string(text) + "'");
}

namespace {

void check_params(unsigned d, unsigned k, unsigned r)
{
    if (d == 0)
        throw DomainError("dimension d must be positive");
    if (k > d)
        throw DomainError("k must satisfy 0 <= k <= d");
    if (r == 0 || r > kMaxResolution)
        throw DomainError("resolution r must satisfy 1 <= r <= 52");
}

void point_keys(PointView x, unsigned r, std::span<std::uint64_t> out)
{
    for (std::size_t j = 0; j < x.size(); ++j)
        out[j] = cell_of_point(x[j], r);
}

} // namespace

SampleSet::SampleSet(unsigned d) : d_(d)
{
    if (d == 0)
        throw DomainError("SampleSet: dimension must be positive");
}

void SampleSet::add(PointView x, double y)
{
    if (x.size() != d_)
        throw ContractError("SampleSet::add: point has wrong dimension");
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0))
            throw ContractError("SampleSet::add: point outside [0,1]^d");
    if (!(y >= -1.0 && y <= 1.0))
        throw ContractError("oracle value " + std::to_string(y) + " outside [-1,1]");
    points_.insert(points_.end(), x.begin(), x.end());
    values_.push_back(y);
    if (key_resolution_) {
        keys_.resize(keys_.size() + d_);
        point_keys(x, *key_resolution_, {keys_.data() + keys_.size() - d_, d_});
    }
    sorted_ = false;
}

void SampleSet::prepare_keys(unsigned r)
{
    if (r == 0 || r > kMaxResolution)
        throw DomainError("prepare_keys: resolution r must satisfy 1 <= r <= 52");
    keys_.assign(points_.size(), 0);
    for (std::size_t i = 0; i < size(); ++i)
        point_keys(point(i), r, {keys_.data() + i * d_, d_});
    key_resolution_ = r;
}

std::span<const std::uint64_t> SampleSet::keys(std::size_t i) const
{
    if (!key_resolution_)
        throw StateError("SampleSet::keys: digit keys not prepared");
    return {keys_.data() + i * d_, d_};
}

void SampleSet::sort_by_value()
{
    std::vector<std::size_t> order(size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values_[a] < values_[b]; });
    std::vector<double> points(points_.size());
    std::vector<double> values(values_.size());
    std::vector<std::uint64_t> keys(keys_.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        const std::size_t src = order[i];
        std::copy_n(points_.begin() + src * d_, d_, points.begin() + i * d_);
        values[i] = values_[src];
        if (key_resolution_)
            std::copy_n(keys_.begin() + src * d_, d_, keys.begin() + i * d_);
    }
    points_ = std::move(points);
    values_ = std::move(values);
    keys_ = std::move(keys);
    sorted_ = true;
}

SampleSet draw_samples(unsigned d, std::uint64_t n, const Oracle& oracle, std::uint64_t seed,
                       std::uint64_t budget)
{
    if (d == 0)
        throw DomainError("draw_samples: dimension must be positive");
    if (n > budget)
        throw ResourceError("draw_samples: n = " + std::to_string(n) + " exceeds sample budget " +
                            std::to_string(budget));
    std::mt19937_64 eng(seed);
    SampleSet out(d);
    Point x(d);
    for (std::uint64_t i = 0; i < n; ++i) {
        for (auto& v : x)
            v = detail::uniform01(eng);
        out.add(x, oracle(x));
    }
    return out;
}

CoefficientTable::CoefficientTable(unsigned d, unsigned k, unsigned r, std::uint64_t budget)
    : ranking_(d, k, r)
{
    if (ranking_.size() > budget)
        throw ResourceError("coefficient table of size " + std::to_string(ranking_.size()) +
                            " exceeds budget " + std::to_string(budget));
    raw_.assign(ranking_.size(), 0.0);
}

CoefficientTable CoefficientTable::from_coefficients(unsigned d, unsigned k, unsigned r,
                                                     std::span<const double> coefficients)
{
    CoefficientTable t(d, k, r, std::numeric_limits<std::uint64_t>::max());
    if (coefficients.size() != t.size())
        throw ContractError("from_coefficients: expected one value per index");
    for (std::uint64_t i = 0; i < t.size(); ++i) {
        const unsigned ls = t.ranking_.unrank(i).level_sum();
        t.raw_[i] = coefficients[i] * std::exp2(-0.5 * ls);
    }
    t.n_ = 1;
    return t;
}

double CoefficientTable::at_rank(std::uint64_t rank) const
{
    if (rank >= size())
        throw DomainError("CoefficientTable: rank out of range");
    if (n_ == 0)
        return 0.0;
    const unsigned ls = ranking_.unrank(rank).level_sum();
    return std::exp2(0.5 * ls) * raw_[rank] / static_cast<double>(n_);
}

double CoefficientTable::at(const MultiIndex& index) const { return at_rank(ranking_.rank(index)); }

ScaledValue CoefficientTable::scaled_terms(PointView x) const
{
    if (x.size() != ranking_.d())
        throw DomainError("reconstruction: point has wrong dimension");
    std::vector<std::uint64_t> keys(x.size());
    point_keys(x, ranking_.r(), keys);
    detail::CompensatedSum sum;
    double magnitude = 0.0;
    for_each_index_at(keys, ranking_.k(), ranking_.r(),
                      [&](auto coords, auto alphas, int sign, unsigned ls) {
                          const double t = raw_[ranking_.rank_active(coords, alphas)];
                          sum.add(sign * std::ldexp(t, static_cast<int>(ls)));
                          magnitude += std::ldexp(std::abs(t), static_cast<int>(ls));
                      });
    return {sum.value(), magnitude};
}

double CoefficientTable::scaled_reconstruction(PointView x) const { return scaled_terms(x).value; }

double CoefficientTable::reconstruct(PointView x) const
{
    if (n_ == 0)
        return 0.0;
    return scaled_reconstruction(x) / static_cast<double>(n_);
}

CoefficientTable estimate_coefficients(const SampleSet& samples, unsigned d, unsigned k, unsigned r,
                                       std::uint64_t budget)
{
    check_params(d, k, r);
    if (samples.dim() != d)
        throw DomainError("estimate_coefficients: sample dimension differs from d");
    CoefficientTable table(d, k, r, budget);
    const std::size_t n = samples.size();
    const bool have_keys = samples.key_resolution() == r;

    // Each block owns a private accumulator table; blocks are merged in
    // order. The block count depends only on the table size, never on the
    // machine, so results are reproducible everywhere.
    constexpr std::uint64_t kAccumulatorEntries = std::uint64_t{1} << 24;
    const std::size_t blocks = static_cast<std::size_t>(
        std::clamp<std::uint64_t>(kAccumulatorEntries / std::max<std::uint64_t>(table.size(), 1), 1,
                                  detail::kWorkBlocks));
    std::vector<std::vector<detail::CompensatedSum>> partial(blocks);
    const IndexRanking& ranking = table.ranking();

    detail::parallel_blocks(
        n,
        [&](std::size_t b, std::size_t begin, std::size_t end) {
            auto& acc = partial[b];
            acc.assign(ranking.size(), {});
            std::vector<std::uint64_t> local(d);
            for (std::size_t i = begin; i < end; ++i) {
                std::span<const std::uint64_t> keys;
                if (have_keys) {
                    keys = samples.keys(i);
                } else {
                    point_keys(samples.point(i), r, local);
                    keys = local;
                }
                const double y = samples.value(i);
                for_each_index_at(keys, k, r, [&](auto coords, auto alphas, int sign, unsigned) {
                    acc[ranking.rank_active(coords, alphas)].add(sign * y);
                });
            }
        },
        blocks);

    for (std::uint64_t i = 0; i < table.size(); ++i) {
        detail::CompensatedSum s;
        for (const auto& acc : partial)
            if (!acc.empty())
                s.add(acc[i]);
        table.raw_[i] = s.value();
    }
    table.n_ = n;
    return table;
}

unsigned match_count(PointView x, std::span<const std::uint64_t> keys, unsigned r)
{
    if (x.size() != keys.size())
        throw DomainError("match_count: dimension mismatch");
    unsigned b = 0;
    for (std::size_t j = 0; j < x.size(); ++j)
        b += cell_of_point(x[j], r) == keys[j] ? 1U : 0U;
    return b;
}

BigInt chi_value(unsigned b, unsigned d, unsigned k, unsigned r)
{
    check_params(d, k, r);
    if (b > d)
        throw DomainError("chi_value: b must satisfy 0 <= b <= d");
    const BigInt radix = (BigInt(1) << r) - 1;
    const unsigned free = d - b;
    BigInt out = 0;
    BigInt radix_pow = 1;
    for (unsigned l = 0; l <= std::min(b, k); ++l, radix_pow *= radix) {
        // sum_{m=0}^{M} (-1)^m C(N, m) = (-1)^M C(N-1, M) for N >= 1.
        const unsigned m_max = std::min(free, k - l);
        BigInt inner;
        if (free == 0)
            inner = 1;
        else
            inner = (m_max % 2 == 0 ? 1 : -1) * binomial(free - 1, m_max);
        out += binomial(b, l) * radix_pow * inner;
    }
    return out;
}

ChiTable ChiTable::build(unsigned d, unsigned k, unsigned r)
{
    ChiTable t;
    t.fits_int64 = true;
    for (unsigned b = 0; b <= d; ++b) {
        BigInt v = chi_value(b, d, k, r);
        t.fits_int64 = t.fits_int64 && v >= std::numeric_limits<std::int64_t>::min() &&
                       v <= std::numeric_limits<std::int64_t>::max();
        t.approx.push_back(v.convert_to<long double>());
        t.exact.push_back(std::move(v));
    }
    if (t.fits_int64)
        for (const auto& v : t.exact)
            t.small.push_back(v.convert_to<std::int64_t>());
    return t;
}

double WaveletModel::operator()(PointView x) const
{
    switch (mode_) {
    case Mode::linear:
        return eval_linear(*this, x);
    case Mode::sign:
        return eval_sign(*this, x);
    case Mode::generalized:
        return eval_generalized(*this, x);
    }
    return 0.0;
}

WaveletModel build_model(SampleSet samples, unsigned k, unsigned r, Mode mode,
                         std::uint64_t budget)
{
    const unsigned d = samples.dim();
    check_params(d, k, r);
    WaveletModel m;
    m.mode_ = mode;
    m.params_ = {d, k, r, static_cast<std::uint64_t>(samples.size())};
    if (mode == Mode::generalized) {
        samples.prepare_keys(r);
        samples.sort_by_value();
        m.chi_ = ChiTable::build(d, k, r);
        m.samples_ = std::make_shared<const SampleSet>(std::move(samples));
    } else {
        m.table_ = std::make_shared<const CoefficientTable>(
            estimate_coefficients(samples, d, k, r, budget));
    }
    return m;
}

WaveletModel fit(const Oracle& oracle, unsigned d, unsigned k, unsigned r, std::uint64_t n,
                 std::uint64_t seed, Mode mode, std::uint64_t sample_budget,
                 std::uint64_t coefficient_budget)
{
    check_params(d, k, r);
    if (mode != Mode::generalized) {
        // Fail before drawing samples if the table cannot be stored.
        const IndexRanking ranking(d, k, r);
        if (ranking.size() > coefficient_budget)
            throw ResourceError("coefficient table of size " + std::to_string(ranking.size()) +
                                " exceeds budget " + std::to_string(coefficient_budget));
    }
    return build_model(draw_samples(d, n, oracle, seed, sample_budget), k, r, mode,
                       coefficient_budget);
}

double eval_linear(const WaveletModel& model, PointView x)
{
    const CoefficientTable* t = model.coefficients();
    if (t == nullptr)
        throw StateError("eval_linear: model has no coefficient table");
    return t->reconstruct(x);
}

double eval_sign(const WaveletModel& model, PointView x)
{
    const CoefficientTable* t = model.coefficients();
    if (t == nullptr)
        throw StateError("eval_sign: model has no coefficient table");
    // sgn(h) = sgn(n h). The scaled sum is exact for sign-valued data; for
    // other data an exact cancellation (e.g. on an empty cell with k = d)
    // leaves rounding noise, which is read as zero.
    const ScaledValue v = t->scaled_terms(x);
    if (std::abs(v.value) <= 64 * std::numeric_limits<double>::epsilon() * v.magnitude)
        return 1.0;
    return sgn(v.value);
}

namespace {

const SampleSet& generalized_samples(const WaveletModel& model)
{
    const SampleSet* s = model.sorted_samples();
    if (s == nullptr || !s->sorted() || s->key_resolution() != model.params().r)
        throw StateError("generalized evaluation needs a sorted, keyed sample set");
    if (model.chi_table().exact.size() != model.params().d + 1)
        throw StateError("generalized evaluation needs a chi table");
    return *s;
}

std::vector<unsigned> match_counts(const SampleSet& s, PointView x, unsigned r)
{
    if (x.size() != s.dim())
        throw DomainError("evaluation point has wrong dimension");
    std::vector<std::uint64_t> xk(x.size());
    point_keys(x, r, xk);
    std::vector<unsigned> b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto keys = s.keys(i);
        unsigned c = 0;
        for (std::size_t j = 0; j < xk.size(); ++j)
            c += xk[j] == keys[j] ? 1U : 0U;
        b[i] = c;
    }
    return b;
}

// Calls step(i, G_i) for i = 0..n where G_i = n g_i(x). Integer arithmetic
// when the chi table and the running sums fit in 63 bits, long double
// otherwise.
template <typename Step>
void walk_recursion(const WaveletModel& model, PointView x, Step&& step)
{
    const SampleSet& s = generalized_samples(model);
    const std::vector<unsigned> b = match_counts(s, x, model.params().r);
    const ChiTable& chi = model.chi_table();
    const std::size_t n = s.size();

    bool integer = chi.fits_int64;
    if (integer) {
        std::uint64_t max_abs = 0;
        for (auto v : chi.small)
            max_abs = std::max<std::uint64_t>(max_abs, v < 0 ? 0 - static_cast<std::uint64_t>(v)
                                                              : static_cast<std::uint64_t>(v));
        // |G_i| <= n max|chi|; keep a spare bit for the 2 chi update.
        integer = n == 0 || max_abs <= (std::uint64_t{1} << 61) / n;
    }
    if (integer) {
        std::int64_t g = 0;
        for (unsigned bi : b)
            g += chi.small[bi];
        step(std::size_t{0}, static_cast<long double>(g), g >= 0);
        for (std::size_t i = 1; i <= n; ++i) {
            g -= 2 * chi.small[b[i - 1]];
            step(i, static_cast<long double>(g), g >= 0);
        }
    } else {
        long double g = 0;
        for (unsigned bi : b)
            g += chi.approx[bi];
        step(std::size_t{0}, g, g >= 0);
        for (std::size_t i = 1; i <= n; ++i) {
            g -= 2 * chi.approx[b[i - 1]];
            step(i, g, g >= 0);
        }
    }
}

} // namespace

double eval_generalized(const WaveletModel& model, PointView x)
{
    if (model.mode() != Mode::generalized)
        throw StateError("eval_generalized: model is not in generalized mode");
    const SampleSet& s = generalized_samples(model);
    const std::size_t n = s.size();
    if (n == 0)
        return 1.0;
    const auto y = [&](std::size_t i) { return i == 0 ? -1.0 : (i == n + 1 ? 1.0 : s.value(i - 1)); };
    detail::CompensatedSum out;
    walk_recursion(model, x, [&](std::size_t i, long double, bool nonnegative) {
        const double jump = y(i + 1) - y(i);
        if (jump != 0.0)
            out.add(nonnegative ? jump : -jump);
    });
    return std::clamp(0.5 * out.value(), -1.0, 1.0);
}

std::vector<double> chi_recursion(const WaveletModel& model, PointView x)
{
    const std::size_t n = generalized_samples(model).size();
    std::vector<double> g;
    g.reserve(n + 1);
    const long double scale = n == 0 ? 1.0L : 1.0L / static_cast<long double>(n);
    walk_recursion(model, x, [&](std::size_t, long double gi, bool) {
        g.push_back(static_cast<double>(gi * scale));
    });
    return g;
}

OccupancyError full_resolution_error(const Oracle& truth, unsigned d, unsigned truth_resolution,
                                     unsigned r, std::uint64_t n, std::uint64_t seed, Mode mode,
                                     std::uint64_t budget)
{
    check_params(d, d, r);
    if (truth_resolution > r)
        throw DomainError("full_resolution_error: truth resolution must not exceed r");
    if (mode == Mode::linear)
        throw DomainError("full_resolution_error: only sign and generalized modes");
    const unsigned block_bits = truth_resolution * d;
    const unsigned inner_bits = (r - truth_resolution) * d;
    if (block_bits >= 63 || (std::uint64_t{1} << block_bits) > budget)
        throw ResourceError("full_resolution_error: too many truth cells for budget");
    const std::uint64_t blocks = std::uint64_t{1} << block_bits;

    std::mt19937_64 eng(seed);
    // Multinomial block counts by sequential binomial splitting.
    std::vector<std::uint64_t> counts(blocks);
    std::uint64_t remaining = n;
    for (std::uint64_t bidx = 0; bidx < blocks; ++bidx) {
        if (bidx + 1 == blocks) {
            counts[bidx] = remaining;
            break;
        }
        std::binomial_distribution<std::uint64_t> pick(remaining,
                                                       1.0 / static_cast<double>(blocks - bidx));
        counts[bidx] = pick(eng);
        remaining -= counts[bidx];
    }

    const double cells_per_block = std::ldexp(1.0, static_cast<int>(inner_bits));
    const double cell_volume = std::ldexp(1.0, -static_cast<int>(r * d));
    const std::uint64_t side = std::uint64_t{1} << truth_resolution;
    detail::CompensatedSum err;
    double empty_bad = 0.0;
    Point mid(d);
    for (std::uint64_t bidx = 0; bidx < blocks; ++bidx) {
        std::uint64_t rest = bidx;
        for (unsigned j = 0; j < d; ++j) {
            mid[j] = (static_cast<double>(rest % side) + 0.5) / static_cast<double>(side);
            rest /= side;
        }
        const double yc = truth(mid);
        const double empty = sample_empty_cells(counts[bidx], inner_bits, eng);
        const double occupied = cells_per_block - empty;
        err.add(empty * std::abs(yc - 1.0) * cell_volume);
        if (mode == Mode::sign)
            err.add(occupied * std::abs(yc - sgn(yc)) * cell_volume);
        if (yc != 1.0)
            empty_bad += empty;
    }
    return {err.value(), empty_bad};
}

} // namespace monoapprox
