#include "monoapprox/common.hpp"

#include <cstdlib>
#include <string>

#include "monoapprox/detail/numeric.hpp"

namespace monoapprox {

std::uint64_t default_cell_budget()
{
    if (const char* env = std::getenv("MONOAPPROX_BUDGET_CELLS")) {
        char* end = nullptr;
        const auto v = std::strtoull(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
            return v;
    }
    return std::uint64_t{1} << 22;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept
{
    return detail::splitmix64(master + detail::splitmix64(stream));
}

std::uint64_t checked_pow(std::uint64_t base, unsigned exp, std::uint64_t cap,
                          const std::string& what)
{
    std::uint64_t out = 1;
    for (unsigned i = 0; i < exp; ++i) {
        if (base != 0 && out > cap / base)
            throw ResourceError(what + ": exceeds budget of " + std::to_string(cap));
        out *= base;
    }
    if (out > cap)
        throw ResourceError(what + ": exceeds budget of " + std::to_string(cap));
    return out;
}

} // namespace monoapprox
