#include "monoapprox/functions.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

#include "monoapprox/detail/numeric.hpp"
#include "monoapprox/haar_basis.hpp"

namespace monoapprox {

Oracle boxbslash(unsigned d)
{
    if (d == 0)
        throw DomainError("boxbslash: d must be positive");
    return [d](PointView x) {
        double s = 0.0;
        for (double v : x)
            s += v;
        return sgn(s - 0.5 * d);
    };
}

StepFamily::StepFamily(unsigned d, std::uint64_t m, std::vector<std::uint8_t> delta)
    : d_(d), m_(m), delta_(std::move(delta))
{
    if (d == 0 || m == 0)
        throw DomainError("step_function: d and m must be positive");
    const std::uint64_t cells = checked_pow(m, d, std::numeric_limits<std::uint64_t>::max(),
                                            "step_function cells");
    if (delta_.size() != cells)
        throw DomainError("step_function: delta must assign a bit to each of the m^d cells");
    for (auto v : delta_)
        if (v > 1)
            throw DomainError("step_function: delta entries must be 0 or 1");
}

double StepFamily::cell_value(std::span<const std::uint64_t> cell) const
{
    if (cell.size() != d_)
        throw DomainError("StepFamily: cell has wrong dimension");
    std::uint64_t l1 = 0;
    std::uint64_t flat = 0;
    for (std::size_t j = cell.size(); j-- > 0;) {
        if (cell[j] >= m_)
            throw DomainError("StepFamily: cell index out of range");
        l1 += cell[j];
        flat = flat * m_ + cell[j];
    }
    const double denom = static_cast<double>(d_) * static_cast<double>(m_ - 1) + 1.0;
    return 2.0 * static_cast<double>(l1 + delta_[flat]) / denom - 1.0;
}

double StepFamily::operator()(PointView x) const
{
    if (x.size() != d_)
        throw DomainError("StepFamily: point has wrong dimension");
    std::uint64_t cell[64];
    std::vector<std::uint64_t> big;
    std::span<std::uint64_t> c(cell, std::min<std::size_t>(d_, 64));
    if (d_ > 64) {
        big.resize(d_);
        c = big;
    }
    for (unsigned j = 0; j < d_; ++j)
        c[j] = cell_of_point_m(x[j], m_);
    return cell_value(c);
}

StepFamily step_function(unsigned d, std::uint64_t m, std::vector<std::uint8_t> delta)
{
    return StepFamily(d, m, std::move(delta));
}

std::vector<std::uint8_t> random_delta(unsigned d, std::uint64_t m, std::uint64_t seed,
                                       std::uint64_t budget)
{
    const std::uint64_t cells = checked_pow(m, d, budget, "random_delta cells");
    std::mt19937_64 eng(seed);
    std::vector<std::uint8_t> delta(cells);
    for (auto& v : delta)
        v = static_cast<std::uint8_t>(eng() >> 63);
    return delta;
}

LevelSetFunction::LevelSetFunction(unsigned d, unsigned t, unsigned b,
                                   const std::vector<CubePoint>& U)
    : d_(d), t_(t), b_(b)
{
    if (d == 0 || d > 63)
        throw DomainError("level_set_function: d must satisfy 1 <= d <= 63");
    if (!(t <= b && b <= d))
        throw DomainError("level_set_function: need t <= b <= d");
    const CubePoint mask = (CubePoint{1} << d) - 1;
    for (CubePoint u : U) {
        if ((u & ~mask) != 0 || static_cast<unsigned>(std::popcount(u)) != t)
            throw DomainError("level_set_function: member of U must be a weight-t point");
        U_.insert(u);
    }
}

bool LevelSetFunction::has_witness(CubePoint x, unsigned weight) const
{
    if (U_.empty())
        return false;
    // Enumerate whichever is smaller: the weight-t subsets of x, or U.
    const BigInt subsets = binomial(weight, t_);
    if (subsets < U_.size()) {
        if (t_ == 0)
            return U_.contains(0);
        std::vector<unsigned> bits;
        for (unsigned j = 0; j < d_; ++j)
            if ((x >> j) & 1U)
                bits.push_back(j);
        std::vector<unsigned> pick(t_);
        for (unsigned i = 0; i < t_; ++i)
            pick[i] = i;
        while (true) {
            CubePoint u = 0;
            for (auto i : pick)
                u |= CubePoint{1} << bits[i];
            if (U_.contains(u))
                return true;
            int i = static_cast<int>(t_) - 1;
            while (i >= 0 && pick[i] == bits.size() - t_ + i)
                --i;
            if (i < 0)
                return false;
            ++pick[i];
            for (unsigned j = i + 1; j < t_; ++j)
                pick[j] = pick[j - 1] + 1;
        }
    }
    for (CubePoint u : U_)
        if ((u & ~x) == 0)
            return true;
    return false;
}

double LevelSetFunction::eval_bits(CubePoint x) const
{
    if ((x >> d_) != 0)
        throw DomainError("LevelSetFunction: point outside {0,1}^d");
    const auto weight = static_cast<unsigned>(std::popcount(x));
    if (weight > b_)
        return 1.0;
    if (weight < t_)
        return -1.0;
    return has_witness(x, weight) ? 1.0 : -1.0;
}

double LevelSetFunction::operator()(PointView x) const
{
    if (x.size() != d_)
        throw DomainError("LevelSetFunction: point has wrong dimension");
    CubePoint bits = 0;
    for (unsigned j = 0; j < d_; ++j)
        bits |= static_cast<CubePoint>(cell_of_point(x[j], 1)) << j;
    return eval_bits(bits);
}

LevelSetFunction level_set_function(unsigned d, unsigned t, unsigned b,
                                    const std::vector<CubePoint>& U)
{
    return LevelSetFunction(d, t, b, U);
}

std::vector<CubePoint> sample_U(unsigned d, unsigned t, double p, std::uint64_t seed,
                                std::uint64_t budget)
{
    if (d == 0 || d > 63 || t > d)
        throw DomainError("sample_U: need 0 <= t <= d <= 63");
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError("sample_U: p must lie in [0,1]");
    if (binomial(d, t) > budget)
        throw ResourceError("sample_U: too many weight-t points for budget");
    std::mt19937_64 eng(seed);
    std::vector<CubePoint> U;
    if (t == 0) {
        if (detail::uniform01(eng) < p)
            U.push_back(0);
        return U;
    }
    const CubePoint limit = CubePoint{1} << d;
    // Weight-t masks in increasing order (Gosper's hack).
    for (CubePoint w = (CubePoint{1} << t) - 1; w < limit;) {
        if (detail::uniform01(eng) < p)
            U.push_back(w);
        const CubePoint c = w & (0 - w);
        const CubePoint r = w + c;
        w = (((r ^ w) >> 2) / c) | r;
    }
    return U;
}

Oracle threshold(Oracle f, double t)
{
    return [f = std::move(f), t](PointView x) { return sgn(f(x) - t); };
}

bool is_monotone_on_grid(const Oracle& f, unsigned d, std::uint64_t resolution,
                         std::uint64_t budget)
{
    if (d == 0 || resolution == 0)
        throw DomainError("is_monotone_on_grid: d and resolution must be positive");
    const std::uint64_t count = checked_pow(resolution, d, budget, "is_monotone_on_grid lattice");
    std::vector<double> values(count);
    detail::parallel_blocks(count, [&](std::size_t, std::size_t begin, std::size_t end) {
        Point x(d);
        for (std::size_t idx = begin; idx < end; ++idx) {
            std::uint64_t rest = idx;
            for (unsigned j = 0; j < d; ++j) {
                x[j] = (static_cast<double>(rest % resolution) + 0.5) / static_cast<double>(resolution);
                rest /= resolution;
            }
            values[idx] = f(x);
        }
    });
    std::uint64_t stride = 1;
    for (unsigned j = 0; j < d; ++j, stride *= resolution)
        for (std::uint64_t idx = 0; idx < count; ++idx)
            if ((idx / stride) % resolution + 1 < resolution && values[idx] > values[idx + stride])
                return false;
    return true;
}

FamilySpec parse_family(const std::string& text)
{
    FamilySpec spec;
    const auto colon = text.find(':');
    spec.name = text.substr(0, colon);
    if (spec.name.empty())
        throw DomainError("family spec '" + text + "' has no name");
    if (colon == std::string::npos)
        return spec;
    std::stringstream rest(text.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw DomainError("family parameter '" + item + "' is not key=value");
        spec.params[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return spec;
}

std::string format_family(const FamilySpec& spec)
{
    std::string out = spec.name;
    char sep = ':';
    for (const auto& [k, v] : spec.params) {
        out += sep;
        out += k + "=" + v;
        sep = ',';
    }
    return out;
}

namespace {

double param_real(const FamilySpec& spec, const std::string& key, double fallback)
{
    auto it = spec.params.find(key);
    if (it == spec.params.end())
        return fallback;
    try {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size())
            throw std::invalid_argument(key);
        return v;
    } catch (const std::exception&) {
        throw DomainError("family parameter " + key + "='" + it->second + "' is not a number");
    }
}

unsigned param_uint(const FamilySpec& spec, const std::string& key, unsigned fallback)
{
    const double v = param_real(spec, key, fallback);
    if (v < 0 || v != std::floor(v) || v > 1e9)
        throw DomainError("family parameter " + key + " must be a nonnegative integer");
    return static_cast<unsigned>(v);
}

void check_keys(const FamilySpec& spec, std::initializer_list<const char*> allowed)
{
    for (const auto& [k, v] : spec.params)
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            throw DomainError("family '" + spec.name + "' has no parameter '" + k + "'");
}

} // namespace

Family make_family(const FamilySpec& spec, unsigned d, std::uint64_t seed)
{
    if (d == 0)
        throw DomainError("make_family: d must be positive");
    Family f;
    f.description = format_family(spec);
    if (spec.name == "boxbslash") {
        check_keys(spec, {});
        f.oracle = boxbslash(d);
        f.sign_valued = true;
    } else if (spec.name == "sum") {
        check_keys(spec, {});
        f.oracle = [d](PointView x) {
            double s = 0.0;
            for (double v : x)
                s += v;
            return 2.0 * s / d - 1.0;
        };
    } else if (spec.name == "const") {
        check_keys(spec, {"c"});
        const double c = param_real(spec, "c", 0.0);
        if (!(c >= -1.0 && c <= 1.0))
            throw DomainError("const family: c must lie in [-1,1]");
        f.oracle = [c](PointView) { return c; };
        f.sign_valued = c == 1.0 || c == -1.0;
        f.constant_resolution = 0;
    } else if (spec.name == "step") {
        check_keys(spec, {"m"});
        const unsigned m = param_uint(spec, "m", 2);
        auto fam = std::make_shared<const StepFamily>(d, m, random_delta(d, m, seed));
        f.oracle = [fam](PointView x) { return (*fam)(x); };
        if (std::has_single_bit(m))
            f.constant_resolution = static_cast<unsigned>(std::countr_zero(m));
    } else if (spec.name == "levelset") {
        check_keys(spec, {"t", "b", "p"});
        const unsigned t = param_uint(spec, "t", d / 2);
        const unsigned b = param_uint(spec, "b", d);
        const double p = param_real(spec, "p", 0.5);
        auto fam = std::make_shared<const LevelSetFunction>(d, t, b, sample_U(d, t, p, seed));
        f.oracle = [fam](PointView x) { return (*fam)(x); };
        f.sign_valued = true;
        f.constant_resolution = 1;
    } else if (spec.name == "neg") {
        check_keys(spec, {});
        f.oracle = [](PointView x) { return -x[0]; };
    } else {
        throw DomainError("unknown family '" + spec.name + "'");
    }
    return f;
}

} // namespace monoapprox
