#ifndef MONOAPPROX_DETAIL_NUMERIC_HPP
#define MONOAPPROX_DETAIL_NUMERIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <thread>
#include <vector>

namespace monoapprox::detail {

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    void add(const CompensatedSum& other) noexcept
    {
        add(other.sum_);
        add(other.comp_);
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Fixed number of work blocks so reductions do not depend on the machine's
// thread count.
inline constexpr std::size_t kWorkBlocks = 8;

// Calls fn(block, begin, end) for `max_blocks` (at most) contiguous slices of
// [0, count). Blocks run on up to hardware_concurrency threads; the slicing
// itself never depends on the thread count.
template <typename Fn>
void parallel_blocks(std::size_t count, Fn&& fn, std::size_t max_blocks = kWorkBlocks)
{
    const std::size_t blocks =
        std::min<std::size_t>(std::max<std::size_t>(max_blocks, 1), std::max<std::size_t>(count, 1));
    auto slice = [&](std::size_t b) {
        const std::size_t begin = count * b / blocks;
        const std::size_t end = count * (b + 1) / blocks;
        fn(b, begin, end);
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (hw == 1 || count < 4096) {
        for (std::size_t b = 0; b < blocks; ++b)
            slice(b);
        return;
    }
    std::vector<std::thread> workers;
    const std::size_t threads = std::min<std::size_t>(hw, blocks);
    workers.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        workers.emplace_back([&, t] {
            for (std::size_t b = t; b < blocks; b += threads)
                slice(b);
        });
    }
    for (auto& w : workers)
        w.join();
}

// Uniform double in [0,1) from the top 53 bits of a 64-bit draw; identical on
// every platform, unlike std::uniform_real_distribution.
template <typename Engine>
double uniform01(Engine& eng)
{
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

} // namespace monoapprox::detail

#endif
