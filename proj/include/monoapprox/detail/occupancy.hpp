#ifndef MONOAPPROX_DETAIL_OCCUPANCY_HPP
#define MONOAPPROX_DETAIL_OCCUPANCY_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace monoapprox {

template <typename Engine>
double sample_empty_cells(std::uint64_t balls, unsigned exponent, Engine& eng)
{
    const double cells = std::ldexp(1.0, static_cast<int>(exponent));
    if (balls == 0)
        return cells;
    if (exponent == 0)
        return 0.0;
    // P(some cell empty) <= M (1 - 1/M)^N <= M exp(-N/M).
    if (std::log(cells) - static_cast<double>(balls) / cells < -64.0 * std::log(2.0))
        return 0.0;
    std::binomial_distribution<std::uint64_t> half(balls, 0.5);
    const std::uint64_t left = half(eng);
    return sample_empty_cells(left, exponent - 1, eng) +
           sample_empty_cells(balls - left, exponent - 1, eng);
}

} // namespace monoapprox

#endif
