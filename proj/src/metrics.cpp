#include "monoapprox/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "monoapprox/detail/numeric.hpp"

namespace monoapprox {

namespace {

std::uint64_t dyadic_cell_count(unsigned d, unsigned r, std::uint64_t budget, const char* what)
{
    if (d == 0)
        throw DomainError(std::string(what) + ": d must be positive");
    if (r > kMaxResolution)
        throw DomainError(std::string(what) + ": resolution too large");
    if (static_cast<std::uint64_t>(r) * d >= 63 || (std::uint64_t{1} << (r * d)) > budget)
        throw ResourceError(std::string(what) + ": 2^(rd) cells exceed budget " +
                            std::to_string(budget));
    return std::uint64_t{1} << (r * d);
}

void cell_midpoint(std::uint64_t flat, unsigned r, std::span<double> out)
{
    const std::uint64_t mask = (std::uint64_t{1} << r) - 1;
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = std::ldexp(static_cast<double>((flat >> (r * j)) & mask) + 0.5,
                            -static_cast<int>(r));
}

std::vector<double> cell_values(const Oracle& f, unsigned d, unsigned r, std::uint64_t budget,
                                const char* what)
{
    const std::uint64_t cells = dyadic_cell_count(d, r, budget, what);
    std::vector<double> v(cells);
    detail::parallel_blocks(cells, [&](std::size_t, std::size_t begin, std::size_t end) {
        Point x(d);
        for (std::size_t i = begin; i < end; ++i) {
            cell_midpoint(i, r, x);
            v[i] = f(x);
        }
    });
    return v;
}

// Sums fn(i) over [0, count) in fixed blocks with compensated merging.
template <typename Fn>
double block_sum(std::uint64_t count, Fn&& fn)
{
    std::vector<detail::CompensatedSum> partial(detail::kWorkBlocks);
    detail::parallel_blocks(count, [&](std::size_t b, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            partial[b].add(fn(i));
    });
    detail::CompensatedSum total;
    for (const auto& p : partial)
        total.add(p);
    return total.value();
}

void check_piecewise_constant(const Oracle& f, const Oracle& g, unsigned d, unsigned r)
{
    std::mt19937_64 eng(0x9e3779b97f4a7c15ULL);
    const std::uint64_t side = std::uint64_t{1} << r;
    const double width = std::ldexp(1.0, -static_cast<int>(r));
    Point p(d), q(d);
    for (int trial = 0; trial < 100; ++trial) {
        for (unsigned j = 0; j < d; ++j) {
            const auto c = static_cast<double>(eng() % side);
            p[j] = (c + detail::uniform01(eng)) * width;
            q[j] = (c + detail::uniform01(eng)) * width;
        }
        if (f(p) != f(q) || g(p) != g(q))
            throw ContractError("l1_exact_dyadic: oracle is not constant on resolution-" +
                                std::to_string(r) + " cells");
    }
}

} // namespace

ErrorEstimate l1_exact_dyadic(const Oracle& f, const Oracle& g, unsigned d, unsigned resolution,
                              std::uint64_t budget)
{
    const std::uint64_t cells = dyadic_cell_count(d, resolution, budget, "l1_exact_dyadic");
    check_piecewise_constant(f, g, d, resolution);
    const double volume = std::ldexp(1.0, -static_cast<int>(resolution * d));
    const double total = block_sum(cells, [&](std::uint64_t i) {
        thread_local Point x;
        x.resize(d);
        cell_midpoint(i, resolution, x);
        return std::abs(f(x) - g(x));
    });
    return {total * volume, 0.0, true, cells};
}

ErrorEstimate l1_quadrature(const Oracle& f, const Oracle& g, unsigned d, std::uint64_t m,
                            std::uint64_t budget)
{
    if (d == 0 || m == 0)
        throw DomainError("l1_quadrature: d and m must be positive");
    const std::uint64_t cells = checked_pow(m, d, budget, "l1_quadrature grid");
    const double total = block_sum(cells, [&](std::uint64_t i) {
        thread_local Point x;
        x.resize(d);
        for (unsigned j = 0; j < d; ++j) {
            x[j] = (static_cast<double>(i % m) + 0.5) / static_cast<double>(m);
            i /= m;
        }
        return std::abs(f(x) - g(x));
    });
    return {total / static_cast<double>(cells), 0.0, false, cells};
}

ErrorEstimate l1_mc(const Oracle& f, const Oracle& g, unsigned d, std::uint64_t n_probe,
                    std::uint64_t seed)
{
    if (d == 0)
        throw DomainError("l1_mc: d must be positive");
    if (n_probe < 2)
        throw DomainError("l1_mc: need at least 2 probes");
    std::mt19937_64 eng(seed);
    std::vector<double> points(n_probe * d);
    for (auto& v : points)
        v = detail::uniform01(eng);
    std::vector<double> diff(n_probe);
    detail::parallel_blocks(n_probe, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const PointView x(points.data() + i * d, d);
            diff[i] = std::abs(f(x) - g(x));
        }
    });
    detail::CompensatedSum s;
    for (double v : diff)
        s.add(v);
    const double mean = s.value() / static_cast<double>(n_probe);
    detail::CompensatedSum ss;
    for (double v : diff)
        ss.add((v - mean) * (v - mean));
    const double var = ss.value() / static_cast<double>(n_probe - 1);
    return {mean, std::sqrt(var / static_cast<double>(n_probe)), false, n_probe};
}

double exact_coefficient(const Oracle& f, const MultiIndex& index, unsigned d, unsigned r,
                         std::uint64_t budget)
{
    if (index.dim() != d)
        throw DomainError("exact_coefficient: index has wrong dimension");
    if (r == 0 || r > kMaxResolution)
        throw DomainError("exact_coefficient: resolution r must satisfy 1 <= r <= 52");
    std::vector<std::uint64_t> first(d), count(d);
    std::uint64_t total = 1;
    for (unsigned j = 0; j < d; ++j) {
        const HaarIndex1D h = index.entry(j);
        const unsigned level = h.level_plus();
        if (h.level() && level >= r)
            throw DomainError("exact_coefficient: index level must be below r");
        count[j] = std::uint64_t{1} << (r - level);
        first[j] = h.shift() << (r - level);
        if (count[j] > budget / total)
            throw ResourceError("exact_coefficient: support has too many cells for budget");
        total *= count[j];
    }
    const double volume = std::ldexp(1.0, -static_cast<int>(r * d));
    const double sum = block_sum(total, [&](std::uint64_t i) {
        thread_local Point x;
        x.resize(d);
        for (unsigned j = 0; j < d; ++j) {
            x[j] = std::ldexp(static_cast<double>(first[j] + i % count[j]) + 0.5,
                              -static_cast<int>(r));
            i /= count[j];
        }
        return f(x) * psi_d(index, x);
    });
    return sum * volume;
}

CoefficientGrid::CoefficientGrid(unsigned d, unsigned r, std::vector<double> values)
    : d_(d), r_(r), values_(std::move(values))
{
    if (d == 0 || r == 0 || r * d >= 63 || values_.size() != (std::uint64_t{1} << (r * d)))
        throw DomainError("CoefficientGrid: need 2^(rd) values");
}

double CoefficientGrid::at(const MultiIndex& index) const
{
    if (index.dim() != d_)
        throw DomainError("CoefficientGrid::at: index has wrong dimension");
    std::uint64_t flat = 0;
    for (unsigned j = d_; j-- > 0;) {
        if (index[j] >> r_)
            throw DomainError("CoefficientGrid::at: index level must be below r");
        flat = (flat << r_) | index[j];
    }
    return values_[flat];
}

MultiIndex CoefficientGrid::index_at(std::uint64_t flat) const
{
    if (flat >= values_.size())
        throw DomainError("CoefficientGrid::index_at: out of range");
    std::vector<std::uint64_t> a(d_);
    const std::uint64_t mask = (std::uint64_t{1} << r_) - 1;
    for (unsigned j = 0; j < d_; ++j)
        a[j] = (flat >> (r_ * j)) & mask;
    return MultiIndex(std::move(a));
}

CoefficientGrid all_coefficients(const Oracle& f, unsigned d, unsigned r, std::uint64_t budget)
{
    if (r == 0)
        throw DomainError("all_coefficients: resolution r must be positive");
    std::vector<double> v = cell_values(f, d, r, budget, "all_coefficients");
    const double volume = std::ldexp(1.0, -static_cast<int>(r * d));
    for (auto& x : v)
        x *= volume;

    const std::uint64_t n = std::uint64_t{1} << r;
    std::vector<double> line(n), cur(n), out(n);
    for (unsigned axis = 0; axis < d; ++axis) {
        const std::uint64_t stride = std::uint64_t{1} << (r * axis);
        for (std::uint64_t base = 0; base < v.size(); ++base) {
            if ((base / stride) % n != 0)
                continue;
            for (std::uint64_t i = 0; i < n; ++i)
                cur[i] = v[base + i * stride];
            // cur holds integrals over intervals of width 2^-(lambda+1).
            for (unsigned lambda = r; lambda-- > 0;) {
                const std::uint64_t len = std::uint64_t{1} << lambda;
                const double scale = std::exp2(0.5 * lambda);
                for (std::uint64_t kappa = 0; kappa < len; ++kappa) {
                    const double lo = cur[2 * kappa];
                    const double hi = cur[2 * kappa + 1];
                    out[len + kappa] = scale * (hi - lo);
                    line[kappa] = lo + hi;
                }
                std::copy_n(line.begin(), len, cur.begin());
            }
            out[0] = cur[0];
            for (std::uint64_t i = 0; i < n; ++i)
                v[base + i * stride] = out[i];
        }
    }
    return CoefficientGrid(d, r, std::move(v));
}

double tail_mass(const Oracle& f, unsigned d, unsigned k, unsigned r, std::uint64_t budget)
{
    if (k > d)
        throw DomainError("tail_mass: k must satisfy 0 <= k <= d");
    const CoefficientGrid grid = all_coefficients(f, d, r, budget);
    const std::uint64_t mask = (std::uint64_t{1} << r) - 1;
    detail::CompensatedSum s;
    for (std::uint64_t i = 0; i < grid.size(); ++i) {
        unsigned active = 0;
        for (unsigned j = 0; j < d; ++j)
            active += ((i >> (r * j)) & mask) != 0 ? 1U : 0U;
        if (active > k)
            s.add(grid.values()[i] * grid.values()[i]);
    }
    return s.value();
}

double l2_squared_exact(const Oracle& f, unsigned d, unsigned r, std::uint64_t budget)
{
    const std::vector<double> v = cell_values(f, d, r, budget, "l2_squared_exact");
    detail::CompensatedSum s;
    for (double x : v)
        s.add(x * x);
    return s.value() * std::ldexp(1.0, -static_cast<int>(r * d));
}

double bakhvalov_step_error(unsigned d, std::uint64_t m,
                            const std::vector<std::uint64_t>& sampled_cells)
{
    if (d == 0 || m == 0)
        throw DomainError("bakhvalov_step_error: d and m must be positive");
    const std::uint64_t cells = checked_pow(m, d, std::numeric_limits<std::uint64_t>::max(),
                                            "bakhvalov_step_error cells");
    std::vector<std::uint64_t> distinct(sampled_cells);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (!distinct.empty() && distinct.back() >= cells)
        throw DomainError("bakhvalov_step_error: sampled cell outside {0..m-1}^d");
    const double unrevealed = static_cast<double>(cells - distinct.size());
    return unrevealed / static_cast<double>(cells) /
           (static_cast<double>(d) * static_cast<double>(m - 1) + 1.0);
}

double fit_rate(const std::vector<std::pair<double, double>>& points)
{
    if (points.size() < 3)
        throw DomainError("fit_rate: need at least 3 points");
    double sx = 0, sy = 0;
    for (const auto& [n, e] : points) {
        if (!(n > 0.0) || !(e > 0.0))
            throw DomainError("fit_rate: n and error must be positive");
        sx += std::log(n);
        sy += std::log(e);
    }
    const double k = static_cast<double>(points.size());
    const double mx = sx / k, my = sy / k;
    double sxx = 0, sxy = 0;
    for (const auto& [n, e] : points) {
        const double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(e) - my);
    }
    if (sxx == 0.0)
        throw DomainError("fit_rate: n values must not all be equal");
    return sxy / sxx;
}

} // namespace monoapprox
