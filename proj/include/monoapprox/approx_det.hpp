#ifndef MONOAPPROX_APPROX_DET_HPP
#define MONOAPPROX_APPROX_DET_HPP

// Deterministic non-adaptive grid algorithm: (m-1)^d function values at the
// interior lattice points i/m, output on each subcube the midpoint of the
// values known at its lower and upper corners.

#include <cstdint>
#include <string>
#include <vector>

#include "monoapprox/common.hpp"

namespace monoapprox {

class GridModel {
public:
    unsigned d() const noexcept { return d_; }
    std::uint64_t m() const noexcept { return m_; }

    /// (m-1)^d values, first coordinate fastest, lattice index i_j in 1..m-1.
    const std::vector<double>& lattice_values() const noexcept { return values_; }
    double value_at(std::span<const std::uint64_t> lattice_index) const;

    /// False if some coordinate-successor pair of lattice values decreases,
    /// i.e. the oracle is not monotone. The model is still usable.
    bool monotone() const noexcept { return monotone_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    double operator()(PointView x) const;

private:
    friend GridModel fit_grid(const Oracle&, unsigned, std::uint64_t, std::uint64_t);

    unsigned d_ = 1;
    std::uint64_t m_ = 2;
    std::vector<double> values_;
    bool monotone_ = true;
    std::vector<std::string> warnings_;
};

/// Evaluates the oracle at all (m-1)^d interior lattice points. Throws
/// DomainError for m < 2, ResourceError if (m-1)^d exceeds `budget`,
/// ContractError for values outside [-1, 1].
GridModel fit_grid(const Oracle& oracle, unsigned d, std::uint64_t m,
                   std::uint64_t budget = default_cell_budget());

/// Midpoint of lower- and upper-corner knowledge on the subcube containing x.
/// Lower corners on the boundary count as -1, upper corners on the boundary
/// as +1.
double eval_grid(const GridModel& model, PointView x);

/// Lower and upper corner knowledge at x.
std::pair<double, double> grid_corners(const GridModel& model, PointView x);

/// d / m.
double grid_error_bound(unsigned d, std::uint64_t m);

} // namespace monoapprox

#endif
