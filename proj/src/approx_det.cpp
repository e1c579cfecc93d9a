#include "monoapprox/approx_det.hpp"

#include "monoapprox/detail/numeric.hpp"
#include "monoapprox/haar_basis.hpp"

namespace monoapprox {

namespace {

std::uint64_t flat_index(std::span<const std::uint64_t> lattice, std::uint64_t m)
{
    std::uint64_t idx = 0;
    for (std::size_t j = lattice.size(); j-- > 0;)
        idx = idx * (m - 1) + (lattice[j] - 1);
    return idx;
}

} // namespace

double GridModel::value_at(std::span<const std::uint64_t> lattice_index) const
{
    if (lattice_index.size() != d_)
        throw DomainError("GridModel::value_at: dimension mismatch");
    for (auto i : lattice_index)
        if (i < 1 || i > m_ - 1)
            throw DomainError("GridModel::value_at: lattice index outside 1..m-1");
    return values_[flat_index(lattice_index, m_)];
}

double GridModel::operator()(PointView x) const { return eval_grid(*this, x); }

GridModel fit_grid(const Oracle& oracle, unsigned d, std::uint64_t m, std::uint64_t budget)
{
    if (d == 0)
        throw DomainError("fit_grid: dimension must be positive");
    if (m < 2)
        throw DomainError("fit_grid: m must be at least 2");
    const std::uint64_t count = checked_pow(m - 1, d, budget, "fit_grid lattice");

    GridModel g;
    g.d_ = d;
    g.m_ = m;
    g.values_.assign(count, 0.0);
    const double inv_m = 1.0 / static_cast<double>(m);
    detail::parallel_blocks(count, [&](std::size_t, std::size_t begin, std::size_t end) {
        Point x(d);
        for (std::size_t idx = begin; idx < end; ++idx) {
            std::uint64_t rest = idx;
            for (unsigned j = 0; j < d; ++j) {
                x[j] = static_cast<double>(rest % (m - 1) + 1) * inv_m;
                rest /= m - 1;
            }
            g.values_[idx] = oracle(x);
        }
    });

    std::uint64_t stride = 1;
    for (unsigned j = 0; j < d && g.monotone_; ++j, stride *= m - 1) {
        for (std::uint64_t idx = 0; idx < count; ++idx) {
            if ((idx / stride) % (m - 1) == m - 2)
                continue;
            if (g.values_[idx] > g.values_[idx + stride]) {
                g.monotone_ = false;
                g.warnings_.push_back("oracle is not monotone along coordinate " +
                                      std::to_string(j) + " on the lattice; input is outside "
                                                          "the monotone class");
                break;
            }
        }
    }
    for (double v : g.values_)
        if (!(v >= -1.0 && v <= 1.0))
            throw ContractError("fit_grid: oracle value outside [-1,1]");
    return g;
}

std::pair<double, double> grid_corners(const GridModel& model, PointView x)
{
    const unsigned d = model.d();
    const std::uint64_t m = model.m();
    if (x.size() != d)
        throw DomainError("eval_grid: point has wrong dimension");
    std::vector<std::uint64_t> cell(d);
    bool lower_boundary = false;
    bool upper_boundary = false;
    for (unsigned j = 0; j < d; ++j) {
        cell[j] = cell_of_point_m(x[j], m);
        lower_boundary = lower_boundary || cell[j] == 0;
        upper_boundary = upper_boundary || cell[j] == m - 1;
    }
    const double lower = lower_boundary ? -1.0 : model.value_at(cell);
    double upper = 1.0;
    if (!upper_boundary) {
        for (auto& c : cell)
            ++c;
        upper = model.value_at(cell);
    }
    return {lower, upper};
}

double eval_grid(const GridModel& model, PointView x)
{
    const auto [lower, upper] = grid_corners(model, x);
    return 0.5 * (lower + upper);
}

double grid_error_bound(unsigned d, std::uint64_t m)
{
    if (d == 0 || m == 0)
        throw DomainError("grid_error_bound: d and m must be positive");
    return static_cast<double>(d) / static_cast<double>(m);
}

} // namespace monoapprox
