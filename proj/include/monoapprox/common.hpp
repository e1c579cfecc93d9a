#ifndef MONOAPPROX_COMMON_HPP
#define MONOAPPROX_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace monoapprox {

using Point = std::vector<double>;
using PointView = std::span<const double>;

/// A real function on [0,1]^d. Oracles must be safe to call concurrently.
using Oracle = std::function<double(PointView)>;

/// Parameter or argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A configured enumeration or sampling budget would be exceeded.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller-supplied data violates an input contract (e.g. oracle range).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Operation invoked on an object in the wrong state.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Sign with sgn(0) := +1.
constexpr double sgn(double v) noexcept { return v < 0.0 ? -1.0 : 1.0; }

/// Default cap on enumerated cells / lattice points (2^22). The environment
/// variable MONOAPPROX_BUDGET_CELLS overrides it.
std::uint64_t default_cell_budget();

/// Default cap on drawn samples (2^26).
inline constexpr std::uint64_t kDefaultSampleBudget = std::uint64_t{1} << 26;

/// Default cap on the size of a stored coefficient table (2^24 entries).
inline constexpr std::uint64_t kDefaultCoefficientBudget = std::uint64_t{1} << 24;

/// Seed of stream `stream` under master seed `master`:
/// splitmix64(master + splitmix64(stream)). Counter-based, so replication i
/// gets the same seed no matter which thread runs it.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// base^exp, throwing ResourceError if the result exceeds `cap`.
std::uint64_t checked_pow(std::uint64_t base, unsigned exp, std::uint64_t cap,
                          const std::string& what);

} // namespace monoapprox

#endif
