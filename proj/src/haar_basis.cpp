#include "monoapprox/haar_basis.hpp"

#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace monoapprox {

HaarIndex1D::HaarIndex1D(std::uint64_t alpha) : alpha_(alpha) {}

std::optional<unsigned> HaarIndex1D::level() const noexcept
{
    if (alpha_ == 0)
        return std::nullopt;
    return static_cast<unsigned>(std::bit_width(alpha_) - 1);
}

std::uint64_t HaarIndex1D::shift() const noexcept
{
    if (alpha_ == 0)
        return 0;
    return alpha_ - (std::uint64_t{1} << *level());
}

unsigned HaarIndex1D::level_plus() const noexcept { return level().value_or(0); }

LevelShift split_index(std::uint64_t alpha)
{
    const HaarIndex1D h(alpha);
    return {h.level(), h.shift()};
}

std::uint64_t join_index(std::optional<unsigned> level, std::uint64_t shift)
{
    if (!level) {
        if (shift != 0)
            throw DomainError("join_index: bottom level requires shift 0");
        return 0;
    }
    if (*level > kMaxResolution || shift >= (std::uint64_t{1} << *level))
        throw DomainError("join_index: shift out of range for level");
    return (std::uint64_t{1} << *level) + shift;
}

Interval interval_of(unsigned level, std::uint64_t shift)
{
    if (level > kMaxResolution || shift >= (std::uint64_t{1} << level))
        throw DomainError("interval_of: shift must be < 2^level");
    const double width = std::ldexp(1.0, -static_cast<int>(level));
    const bool last = shift + 1 == (std::uint64_t{1} << level);
    return {static_cast<double>(shift) * width, static_cast<double>(shift + 1) * width, last};
}

std::uint64_t cell_of_point(double x, unsigned level)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("cell_of_point: x must lie in [0,1]");
    if (level > kMaxResolution)
        throw DomainError("cell_of_point: level too large");
    const std::uint64_t cells = std::uint64_t{1} << level;
    const auto c = static_cast<std::uint64_t>(std::floor(std::ldexp(x, static_cast<int>(level))));
    return c < cells ? c : cells - 1;
}

std::uint64_t cell_of_point_m(double x, std::uint64_t m)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw DomainError("cell_of_point_m: x must lie in [0,1]");
    if (m == 0)
        throw DomainError("cell_of_point_m: m must be positive");
    const auto c = static_cast<std::uint64_t>(std::floor(static_cast<double>(m) * x));
    return c < m ? c : m - 1;
}

namespace {

// Sign of the one-dimensional wavelet at x, in {-1, 0, +1}.
int psi_1d_sign(std::uint64_t alpha, double x)
{
    if (alpha == 0) {
        if (!(x >= 0.0 && x <= 1.0))
            throw DomainError("psi: x must lie in [0,1]");
        return 1;
    }
    const HaarIndex1D h(alpha);
    const unsigned level = *h.level();
    if (level + 1 > kMaxResolution)
        throw DomainError("psi: level too large");
    const std::uint64_t c = cell_of_point(x, level + 1);
    if ((c >> 1) != h.shift())
        return 0;
    return (c & 1U) ? 1 : -1;
}

} // namespace

double psi_1d(std::uint64_t alpha, double x)
{
    const int s = psi_1d_sign(alpha, x);
    if (s == 0)
        return 0.0;
    if (alpha == 0)
        return 1.0;
    const unsigned level = *HaarIndex1D(alpha).level();
    return s * std::exp2(0.5 * level);
}

MultiIndex::MultiIndex(std::vector<std::uint64_t> alphas) : alphas_(std::move(alphas)) {}

std::size_t MultiIndex::active_count() const noexcept
{
    std::size_t n = 0;
    for (auto a : alphas_)
        n += a > 0 ? 1 : 0;
    return n;
}

unsigned MultiIndex::level_sum() const noexcept
{
    unsigned s = 0;
    for (auto a : alphas_)
        s += HaarIndex1D(a).level_plus();
    return s;
}

double MultiIndex::support_volume() const noexcept
{
    return std::ldexp(1.0, -static_cast<int>(level_sum()));
}

std::optional<unsigned> MultiIndex::max_level() const noexcept
{
    std::optional<unsigned> out;
    for (auto a : alphas_) {
        if (auto l = HaarIndex1D(a).level(); l && (!out || *l > *out))
            out = l;
    }
    return out;
}

int psi_d_sign(const MultiIndex& index, PointView x)
{
    if (index.dim() != x.size())
        throw DomainError("psi_d: dimension mismatch between index and point");
    int s = 1;
    for (std::size_t j = 0; j < x.size(); ++j) {
        s *= psi_1d_sign(index[j], x[j]);
        if (s == 0)
            return 0;
    }
    return s;
}

double psi_d(const MultiIndex& index, PointView x)
{
    const int s = psi_d_sign(index, x);
    if (s == 0)
        return 0.0;
    return s * std::exp2(0.5 * index.level_sum());
}

double DyadicCell::volume() const
{
    int total = 0;
    for (auto r : resolution)
        total += static_cast<int>(r);
    return std::ldexp(1.0, -total);
}

Point DyadicCell::midpoint() const
{
    Point p(resolution.size());
    for (std::size_t j = 0; j < p.size(); ++j)
        p[j] = std::ldexp(static_cast<double>(cell_index[j]) + 0.5, -static_cast<int>(resolution[j]));
    return p;
}

bool DyadicCell::contains(PointView x) const
{
    if (x.size() != resolution.size())
        throw DomainError("DyadicCell::contains: dimension mismatch");
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (!interval_of(resolution[j], cell_index[j]).contains(x[j]))
            return false;
    }
    return true;
}

DyadicCell support_cell(const MultiIndex& index)
{
    DyadicCell c;
    c.resolution.resize(index.dim());
    c.cell_index.resize(index.dim());
    for (std::size_t j = 0; j < index.dim(); ++j) {
        const HaarIndex1D h = index.entry(j);
        c.resolution[j] = h.level_plus();
        c.cell_index[j] = h.shift();
    }
    return c;
}

BigInt binomial(unsigned n, unsigned k)
{
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    BigInt out = 1;
    for (unsigned i = 1; i <= k; ++i) {
        out *= n - k + i;
        out /= i;
    }
    return out;
}

std::uint64_t to_u64_checked(const BigInt& v, const char* what)
{
    if (v < 0 || v > std::numeric_limits<std::uint64_t>::max())
        throw ResourceError(std::string(what) + ": value does not fit in 64 bits");
    return v.convert_to<std::uint64_t>();
}

namespace {

void check_dkr(unsigned d, unsigned k, unsigned r)
{
    if (d == 0)
        throw DomainError("dimension d must be positive");
    if (k > d)
        throw DomainError("k must satisfy 0 <= k <= d");
    if (r == 0 || r > kMaxResolution)
        throw DomainError("resolution r must satisfy 1 <= r <= 52");
}

} // namespace

IndexSetSize index_set_size(unsigned d, unsigned k, unsigned r)
{
    check_dkr(d, k, r);
    BigInt radix = (BigInt(1) << r) - 1;
    BigInt exact = 0;
    BigInt radix_pow = 1;
    for (unsigned l = 0; l <= k; ++l) {
        exact += binomial(d, l) * radix_pow;
        radix_pow *= radix;
    }
    double bound = std::nan("");
    if (k >= 1) {
        const double kk = k;
        bound = std::exp(kk * (r * std::log(2.0) + 1.0 + std::log(d / kk)));
    }
    return {exact, bound};
}

BigInt indices_per_point(unsigned d, unsigned k, unsigned r)
{
    check_dkr(d, k, r);
    BigInt out = 0;
    BigInt rp = 1;
    for (unsigned l = 0; l <= k; ++l) {
        out += binomial(d, l) * rp;
        rp *= r;
    }
    return out;
}

IndexRanking::IndexRanking(unsigned d, unsigned k, unsigned r) : d_(d), k_(k), r_(r)
{
    check_dkr(d, k, r);
    size_ = to_u64_checked(index_set_size(d, k, r).exact, "index set size");
    radix_ = (std::uint64_t{1} << r) - 1;
    binom_.assign(d + 1, std::vector<std::uint64_t>(k + 2, 0));
    for (unsigned n = 0; n <= d; ++n)
        for (unsigned l = 0; l <= k + 1; ++l)
            binom_[n][l] = binomial(n, l).convert_to<std::uint64_t>();
    radix_pow_.assign(k + 1, 1);
    for (unsigned l = 1; l <= k; ++l)
        radix_pow_[l] = radix_pow_[l - 1] * radix_;
    offset_.assign(k + 2, 0);
    for (unsigned l = 0; l <= k; ++l)
        offset_[l + 1] = offset_[l] + binom_[d][l] * radix_pow_[l];
}

bool IndexRanking::contains(const MultiIndex& index) const noexcept
{
    if (index.dim() != d_ || index.active_count() > k_)
        return false;
    for (auto a : index.alphas())
        if (a > radix_)
            return false;
    return true;
}

std::uint64_t IndexRanking::rank_active(std::span<const unsigned> coords,
                                        std::span<const std::uint64_t> alphas) const
{
    const auto l = coords.size();
    std::uint64_t comb = 0;
    std::uint64_t digits = 0;
    for (std::size_t i = 0; i < l; ++i) {
        comb += binom_[coords[i]][i + 1];
        digits += (alphas[i] - 1) * radix_pow_[i];
    }
    return offset_[l] + comb * radix_pow_[l] + digits;
}

std::uint64_t IndexRanking::rank(const MultiIndex& index) const
{
    if (!contains(index))
        throw DomainError("IndexRanking::rank: index outside the index set");
    std::vector<unsigned> coords;
    std::vector<std::uint64_t> alphas;
    for (unsigned j = 0; j < d_; ++j) {
        if (index[j] > 0) {
            coords.push_back(j);
            alphas.push_back(index[j]);
        }
    }
    return rank_active(coords, alphas);
}

MultiIndex IndexRanking::unrank(std::uint64_t rank) const
{
    if (rank >= size_)
        throw DomainError("IndexRanking::unrank: rank out of range");
    unsigned l = 0;
    while (offset_[l + 1] <= rank)
        ++l;
    std::uint64_t rem = rank - offset_[l];
    std::uint64_t comb = rem / radix_pow_[l];
    std::uint64_t digits = rem % radix_pow_[l];

    std::vector<std::uint64_t> alphas(d_, 0);
    std::vector<unsigned> coords(l);
    for (unsigned i = l; i-- > 0;) {
        unsigned s = i;
        while (s + 1 < d_ && binom_[s + 1][i + 1] <= comb)
            ++s;
        coords[i] = s;
        comb -= binom_[s][i + 1];
    }
    for (unsigned i = 0; i < l; ++i) {
        alphas[coords[i]] = digits % radix_ + 1;
        digits /= radix_;
    }
    return MultiIndex(std::move(alphas));
}

IndexStream::IndexStream(unsigned d, unsigned k, unsigned r) : ranking_(d, k, r) {}

bool IndexStream::next(MultiIndex& out)
{
    if (pos_ >= ranking_.size())
        return false;
    out = ranking_.unrank(pos_++);
    return true;
}

std::vector<MultiIndex> enumerate_indices(unsigned d, unsigned k, unsigned r, std::uint64_t budget)
{
    IndexStream stream(d, k, r);
    if (stream.size() > budget)
        throw ResourceError("enumerate_indices: index set larger than budget");
    std::vector<MultiIndex> out;
    out.reserve(stream.size());
    MultiIndex idx;
    while (stream.next(idx))
        out.push_back(idx);
    return out;
}

} // namespace monoapprox
