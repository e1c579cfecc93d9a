#ifndef MONOAPPROX_FUNCTIONS_HPP
#define MONOAPPROX_FUNCTIONS_HPP

// Monotone test functions: the diagonal split, the piecewise-constant step
// family on m^d subcubes, level-set functions on the Boolean cube, and
// thresholding. Plus a lattice monotonicity checker.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "monoapprox/common.hpp"

namespace monoapprox {

/// sgn(sum_j x_j - d/2) with sgn(0) = +1.
Oracle boxbslash(unsigned d);

/// Piecewise-constant monotone function on the m^d subcubes of [0,1]^d:
/// 2(|i|_1 + delta_i)/(d(m-1)+1) - 1 on cell i.
class StepFamily {
public:
    /// `delta` holds one bit per cell, first coordinate fastest. Throws
    /// DomainError unless it has exactly m^d entries, all 0 or 1.
    StepFamily(unsigned d, std::uint64_t m, std::vector<std::uint8_t> delta);

    unsigned d() const noexcept { return d_; }
    std::uint64_t m() const noexcept { return m_; }
    const std::vector<std::uint8_t>& delta() const noexcept { return delta_; }

    double cell_value(std::span<const std::uint64_t> cell) const;
    double operator()(PointView x) const;

private:
    unsigned d_;
    std::uint64_t m_;
    std::vector<std::uint8_t> delta_;
};

StepFamily step_function(unsigned d, std::uint64_t m, std::vector<std::uint8_t> delta);

/// Uniform random delta over {0..m-1}^d. Throws ResourceError if m^d
/// exceeds the budget.
std::vector<std::uint8_t> random_delta(unsigned d, std::uint64_t m, std::uint64_t seed,
                                       std::uint64_t budget = default_cell_budget());

/// Bit-packed point of the Boolean cube {0,1}^d (bit j is coordinate j).
using CubePoint = std::uint64_t;

/// f_U on {0,1}^d: -1 iff |x|_1 <= b and no u in U with u <= x, else +1.
/// Extended to [0,1]^d through the 2^d half-split subcubes.
class LevelSetFunction {
public:
    /// Throws DomainError unless t <= b <= d <= 63 and every u has weight t.
    LevelSetFunction(unsigned d, unsigned t, unsigned b, const std::vector<CubePoint>& U);

    unsigned d() const noexcept { return d_; }
    unsigned t() const noexcept { return t_; }
    unsigned b() const noexcept { return b_; }
    const std::unordered_set<CubePoint>& U() const noexcept { return U_; }

    double eval_bits(CubePoint x) const;
    double operator()(PointView x) const;

private:
    bool has_witness(CubePoint x, unsigned weight) const;

    unsigned d_, t_, b_;
    std::unordered_set<CubePoint> U_;
};

LevelSetFunction level_set_function(unsigned d, unsigned t, unsigned b,
                                    const std::vector<CubePoint>& U);

/// Each weight-t point of {0,1}^d joins U independently with probability p.
/// Result is sorted. Throws ResourceError if C(d,t) exceeds the budget.
std::vector<CubePoint> sample_U(unsigned d, unsigned t, double p, std::uint64_t seed,
                                std::uint64_t budget = default_cell_budget());

/// sgn(f(x) - t) with sgn(0) = +1.
Oracle threshold(Oracle f, double t);

/// Checks f(p) <= f(p + e_j / resolution) for all points p of the lattice of
/// cell midpoints (i + 1/2)/resolution, i in {0..resolution-1}^d.
bool is_monotone_on_grid(const Oracle& f, unsigned d, std::uint64_t resolution,
                         std::uint64_t budget = default_cell_budget());

/// A named family with parameters, e.g. "levelset:t=2,b=4,p=0.3".
struct FamilySpec {
    std::string name;
    std::map<std::string, std::string> params;

    bool operator==(const FamilySpec&) const = default;
};

/// Parses "name" or "name:key=value,key=value". Throws DomainError on
/// malformed text.
FamilySpec parse_family(const std::string& text);
/// Inverse of parse_family (keys in sorted order).
std::string format_family(const FamilySpec& spec);

struct Family {
    Oracle oracle;
    std::string description;
    bool sign_valued = false;
    /// Dyadic resolution on whose cells the function is constant, if any.
    std::optional<unsigned> constant_resolution;
};

/// Instantiates a family in dimension d. Random members are drawn from
/// `seed`. Known names:
///   boxbslash                 sgn(sum x - d/2)
///   sum                       2 sum_j x_j / d - 1
///   const:c=..                constant c
///   step:m=..                 step family with random delta
///   levelset:t=..,b=..,p=..   f_U with U ~ Bernoulli(p) (defaults t=d/2, b=d, p=0.5)
///   neg                       -x_1 (not monotone; for checks)
Family make_family(const FamilySpec& spec, unsigned d, std::uint64_t seed);

} // namespace monoapprox

#endif
