#include <gtest/gtest.h>

#include <random>
#include <set>

#include "monoapprox/haar_basis.hpp"
#include "support/oracles.hpp"

using namespace monoapprox;

TEST(HaarIndex, SplitAndJoin)
{
    EXPECT_EQ(split_index(0), (LevelShift{std::nullopt, 0}));
    EXPECT_EQ(split_index(1), (LevelShift{0u, 0}));
    EXPECT_EQ(split_index(5), (LevelShift{2u, 1}));
    EXPECT_EQ(split_index(7), (LevelShift{2u, 3}));
    for (std::uint64_t a = 0; a < 300; ++a) {
        const auto ls = split_index(a);
        EXPECT_EQ(join_index(ls.level, ls.shift), a);
    }
    EXPECT_THROW(join_index(2u, 4), DomainError);
    EXPECT_THROW(join_index(std::nullopt, 1), DomainError);
}

TEST(HaarIndex, LevelPlusTreatsBottomAsZero)
{
    EXPECT_EQ(HaarIndex1D(0).level_plus(), 0u);
    EXPECT_EQ(HaarIndex1D(1).level_plus(), 0u);
    EXPECT_EQ(HaarIndex1D(6).level_plus(), 2u);
    EXPECT_FALSE(HaarIndex1D(0).level().has_value());
}

TEST(Intervals, LastIntervalIsClosed)
{
    const Interval a = interval_of(2, 1);
    EXPECT_DOUBLE_EQ(a.lo, 0.25);
    EXPECT_DOUBLE_EQ(a.hi, 0.5);
    EXPECT_TRUE(a.contains(0.25));
    EXPECT_FALSE(a.contains(0.5));
    EXPECT_TRUE(interval_of(2, 3).contains(1.0));
    EXPECT_THROW(interval_of(2, 4), DomainError);
}

TEST(Intervals, CellOfPoint)
{
    EXPECT_EQ(cell_of_point(0.0, 3), 0u);
    EXPECT_EQ(cell_of_point(0.125, 3), 1u);
    EXPECT_EQ(cell_of_point(0.99, 3), 7u);
    EXPECT_EQ(cell_of_point(1.0, 3), 7u);
    EXPECT_EQ(cell_of_point(0.3, 0), 0u);
    EXPECT_THROW(cell_of_point(1.5, 2), DomainError);
    EXPECT_THROW(cell_of_point(-0.1, 2), DomainError);
    EXPECT_EQ(cell_of_point_m(1.0, 3), 2u);
    EXPECT_EQ(cell_of_point_m(0.5, 3), 1u);
}

TEST(Psi, OneDimensionalValues)
{
    EXPECT_EQ(psi_1d(0, 0.3), 1.0);
    EXPECT_EQ(psi_1d(1, 0.2), -1.0);
    EXPECT_EQ(psi_1d(1, 0.5), 1.0);
    EXPECT_EQ(psi_1d(1, 1.0), 1.0);
    EXPECT_EQ(psi_1d(2, 0.3), std::sqrt(2.0));
    EXPECT_EQ(psi_1d(2, 0.1), -std::sqrt(2.0));
    EXPECT_EQ(psi_1d(2, 0.7), 0.0);
    EXPECT_EQ(psi_1d(3, 1.0), std::sqrt(2.0));
}

TEST(Psi, AgreesWithOracleOnRandomPoints)
{
    std::mt19937_64 eng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const std::vector<std::uint64_t> a{eng() % 16, eng() % 16, eng() % 16};
        Point x{u(eng), u(eng), u(eng)};
        if (i % 10 == 0)
            x[0] = 1.0;
        EXPECT_DOUBLE_EQ(psi_d(MultiIndex(a), x), oracle::psi(a, x));
    }
}

TEST(Psi, ValueMagnitudeIsTwoToHalfLevelSum)
{
    const MultiIndex a({3, 0, 9});
    EXPECT_EQ(a.level_sum(), 1u + 3u);
    EXPECT_EQ(a.active_count(), 2u);
    EXPECT_DOUBLE_EQ(a.support_volume(), 1.0 / 16.0);
    const Point inside{0.8, 0.3, 0.17};
    EXPECT_DOUBLE_EQ(std::abs(psi_d(a, inside)), 4.0);
    EXPECT_THROW(psi_d(a, Point{0.1, 0.2}), DomainError);
}

TEST(Support, CellMatchesNonzeroSet)
{
    const MultiIndex a({5, 0});
    const DyadicCell c = support_cell(a);
    EXPECT_EQ(c.resolution, (std::vector<unsigned>{2, 0}));
    EXPECT_EQ(c.cell_index, (std::vector<std::uint64_t>{1, 0}));
    EXPECT_TRUE(c.contains(Point{0.3, 0.9}));
    EXPECT_FALSE(c.contains(Point{0.6, 0.9}));
    EXPECT_DOUBLE_EQ(c.volume(), 0.25);
}

TEST(IndexSet, SizeExamples)
{
    EXPECT_EQ(index_set_size(3, 2, 2).exact, 37);
    EXPECT_EQ(index_set_size(1, 1, 4).exact, 16);
    EXPECT_EQ(index_set_size(4, 0, 5).exact, 1);
    EXPECT_TRUE(std::isnan(index_set_size(4, 0, 5).bound));
    EXPECT_THROW(index_set_size(2, 3, 2), DomainError);
    EXPECT_THROW(index_set_size(0, 0, 2), DomainError);
}

TEST(IndexSet, SizeBelowAnalyticBound)
{
    for (unsigned d = 1; d <= 12; ++d)
        for (unsigned k = 1; k <= d; ++k)
            for (unsigned r = 1; r <= 10; ++r) {
                const auto s = index_set_size(d, k, r);
                EXPECT_LE(s.exact.convert_to<double>(), s.bound * (1 + 1e-12));
            }
}

TEST(IndexSet, EnumerationMatchesBruteForce)
{
    for (unsigned d = 1; d <= 4; ++d)
        for (unsigned k = 0; k <= d; ++k)
            for (unsigned r = 1; r <= 3; ++r) {
                std::set<std::vector<std::uint64_t>> want;
                for (auto& a : oracle::index_set(d, k, r))
                    want.insert(a);
                std::set<std::vector<std::uint64_t>> got;
                for (auto& a : enumerate_indices(d, k, r))
                    got.insert(a.alphas());
                EXPECT_EQ(got, want) << d << k << r;
                EXPECT_EQ(BigInt(got.size()), index_set_size(d, k, r).exact);
            }
}

TEST(IndexSet, EnumerationRespectsBudget)
{
    EXPECT_THROW(enumerate_indices(10, 10, 3, 1000), ResourceError);
}

TEST(Ranking, IsABijection)
{
    const IndexRanking rk(5, 3, 3);
    std::set<std::vector<std::uint64_t>> seen;
    for (std::uint64_t i = 0; i < rk.size(); ++i) {
        const MultiIndex a = rk.unrank(i);
        EXPECT_TRUE(rk.contains(a));
        EXPECT_EQ(rk.rank(a), i);
        seen.insert(a.alphas());
    }
    EXPECT_EQ(seen.size(), rk.size());
    EXPECT_EQ(rk.unrank(0), MultiIndex::zero(5));
    EXPECT_THROW(rk.rank(MultiIndex({1, 1, 1, 1, 0})), DomainError);
    EXPECT_THROW(rk.rank(MultiIndex({8, 0, 0, 0, 0})), DomainError);
}

TEST(SupportWalk, VisitsExactlyTheIndicesContainingThePoint)
{
    std::mt19937_64 eng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (unsigned d = 1; d <= 4; ++d)
        for (unsigned k = 0; k <= d; ++k)
            for (unsigned r = 1; r <= 3; ++r) {
                Point x(d);
                for (auto& v : x)
                    v = u(eng);
                std::vector<std::uint64_t> keys(d);
                for (unsigned j = 0; j < d; ++j)
                    keys[j] = cell_of_point(x[j], r);
                std::set<std::vector<std::uint64_t>> visited;
                std::size_t calls = 0;
                for_each_index_at(keys, k, r, [&](auto coords, auto alphas, int sign, unsigned ls) {
                    std::vector<std::uint64_t> a(d, 0);
                    for (std::size_t i = 0; i < coords.size(); ++i)
                        a[coords[i]] = alphas[i];
                    const MultiIndex mi(a);
                    EXPECT_EQ(mi.level_sum(), ls);
                    EXPECT_DOUBLE_EQ(sign * std::exp2(0.5 * ls), psi_d(mi, x));
                    visited.insert(a);
                    ++calls;
                });
                std::set<std::vector<std::uint64_t>> want;
                for (auto& a : oracle::index_set(d, k, r))
                    if (oracle::psi(a, x) != 0.0)
                        want.insert(a);
                EXPECT_EQ(visited, want);
                EXPECT_EQ(calls, visited.size());
                EXPECT_EQ(BigInt(calls), indices_per_point(d, k, r));
            }
}

TEST(Binomial, ExactLargeValues)
{
    EXPECT_EQ(binomial(10, 3), 120);
    EXPECT_EQ(binomial(3, 5), 0);
    EXPECT_EQ(binomial(100, 50).str(), "100891344545564193334812497256");
    EXPECT_THROW(to_u64_checked(binomial(100, 50), "test"), ResourceError);
}
