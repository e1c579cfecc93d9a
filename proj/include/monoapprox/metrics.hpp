#ifndef MONOAPPROX_METRICS_HPP
#define MONOAPPROX_METRICS_HPP

// L1 distances (exact for dyadic piecewise-constant pairs, midpoint-rule,
// and Monte Carlo), exact Haar coefficients, tail mass beyond k active
// variables, the average error of the step-family game, and rate fitting.

#include <cstdint>
#include <utility>
#include <vector>

#include "monoapprox/common.hpp"
#include "monoapprox/haar_basis.hpp"

namespace monoapprox {

struct ErrorEstimate {
    double value = 0.0;
    double std_error = 0.0;
    bool exact = false;
    std::uint64_t n_used = 0;
};

/// sum over the 2^{rd} resolution-r cells of |f - g| at the midpoint times
/// the cell volume. Both oracles must be constant on the cells; this is
/// spot-checked on 100 random within-cell pairs (ContractError on failure).
ErrorEstimate l1_exact_dyadic(const Oracle& f, const Oracle& g, unsigned d, unsigned resolution,
                              std::uint64_t budget = default_cell_budget());

/// Midpoint rule on the m^d grid; no piecewise-constancy assumption.
ErrorEstimate l1_quadrature(const Oracle& f, const Oracle& g, unsigned d, std::uint64_t m,
                            std::uint64_t budget = default_cell_budget());

/// Mean of |f - g| over n_probe uniform points with its standard error.
ErrorEstimate l1_mc(const Oracle& f, const Oracle& g, unsigned d, std::uint64_t n_probe,
                    std::uint64_t seed);

/// <psi_alpha, f> for f constant on resolution-r cells, by enumerating the
/// resolution-r cells inside the support of psi_alpha.
double exact_coefficient(const Oracle& f, const MultiIndex& index, unsigned d, unsigned r,
                         std::uint64_t budget = default_cell_budget());

/// All coefficients with levels < r (every active count) of f, constant on
/// resolution-r cells, by the separable fast Haar transform. Entry layout is
/// the tensor grid of one-dimensional indices alpha_j in [0, 2^r), first
/// coordinate fastest.
class CoefficientGrid {
public:
    CoefficientGrid(unsigned d, unsigned r, std::vector<double> values);

    unsigned d() const noexcept { return d_; }
    unsigned r() const noexcept { return r_; }
    std::uint64_t size() const noexcept { return values_.size(); }
    double at(const MultiIndex& index) const;
    MultiIndex index_at(std::uint64_t flat) const;
    const std::vector<double>& values() const noexcept { return values_; }

private:
    unsigned d_, r_;
    std::vector<double> values_;
};

CoefficientGrid all_coefficients(const Oracle& f, unsigned d, unsigned r,
                                 std::uint64_t budget = default_cell_budget());

/// sum of squared coefficients with |alpha|_0 > k and levels < r.
double tail_mass(const Oracle& f, unsigned d, unsigned k, unsigned r,
                 std::uint64_t budget = default_cell_budget());

/// ||f||_2^2 for f constant on resolution-r cells.
double l2_squared_exact(const Oracle& f, unsigned d, unsigned r,
                        std::uint64_t budget = default_cell_budget());

/// Average over uniform delta of the L1 error of the best algorithm knowing
/// the step-family values on `sampled_cells` (flat indices into {0..m-1}^d,
/// first coordinate fastest; duplicates count once):
/// (#unrevealed / m^d) / (d(m-1)+1).
double bakhvalov_step_error(unsigned d, std::uint64_t m,
                            const std::vector<std::uint64_t>& sampled_cells);

/// Least-squares slope of log(error) against log(n). Needs >= 3 points and
/// positive n and errors (DomainError otherwise).
double fit_rate(const std::vector<std::pair<double, double>>& points);

} // namespace monoapprox

#endif
