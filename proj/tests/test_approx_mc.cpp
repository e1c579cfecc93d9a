#include <gtest/gtest.h>

#include <random>

#include "monoapprox/approx_mc.hpp"
#include "monoapprox/functions.hpp"
#include "monoapprox/metrics.hpp"
#include "support/oracles.hpp"

using namespace monoapprox;

namespace {

Point random_point(unsigned d, std::mt19937_64& eng)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Point x(d);
    for (auto& v : x)
        v = u(eng);
    return x;
}

} // namespace

TEST(Mode, ParseAndPrint)
{
    EXPECT_EQ(parse_mode("linear"), Mode::linear);
    EXPECT_EQ(parse_mode("sign"), Mode::sign);
    EXPECT_EQ(parse_mode("hat"), Mode::sign);
    EXPECT_EQ(parse_mode("generalized"), Mode::generalized);
    EXPECT_EQ(to_string(Mode::generalized), "generalized");
    EXPECT_THROW(parse_mode("tilde"), DomainError);
}

TEST(SampleSet, RejectsOutOfRangeData)
{
    SampleSet s(2);
    const Point x{0.2, 0.3};
    EXPECT_THROW(s.add(x, 1.5), ContractError);
    EXPECT_THROW(s.add(Point{1.2, 0.3}, 0.0), ContractError);
    EXPECT_THROW(s.keys(0), StateError);
    s.add(x, 0.5);
    s.add(Point{0.9, 0.9}, -0.5);
    s.prepare_keys(2);
    EXPECT_EQ(s.keys(1)[0], 3u);
    s.sort_by_value();
    EXPECT_TRUE(s.sorted());
    EXPECT_EQ(s.value(0), -0.5);
    EXPECT_EQ(s.keys(0)[0], 3u);
}

TEST(DrawSamples, DeterministicInSeedAndBudgeted)
{
    const Oracle f = boxbslash(3);
    EXPECT_EQ(draw_samples(3, 50, f, 9), draw_samples(3, 50, f, 9));
    EXPECT_FALSE(draw_samples(3, 50, f, 9) == draw_samples(3, 50, f, 10));
    EXPECT_THROW(draw_samples(3, 100, f, 1, 99), ResourceError);
}

TEST(MatchCount, Example)
{
    const std::vector<std::uint64_t> keys{cell_of_point(0.4, 1), cell_of_point(0.2, 1)};
    EXPECT_EQ(match_count(Point{0.1, 0.9}, keys, 1), 1u);
    EXPECT_EQ(match_count(Point{0.3, 0.1}, keys, 1), 2u);
}

TEST(Chi, SmallExamples)
{
    EXPECT_EQ(chi_value(1, 1, 1, 1), 2);
    EXPECT_EQ(chi_value(0, 1, 1, 1), 0);
    for (unsigned d = 1; d <= 5; ++d)
        for (unsigned r = 1; r <= 4; ++r)
            EXPECT_EQ(chi_value(d, d, d, r), BigInt(1) << (r * d));
}

TEST(Chi, AgreesWithLiteralDoubleSum)
{
    for (unsigned d = 1; d <= 8; ++d)
        for (unsigned k = 0; k <= d; ++k)
            for (unsigned r = 1; r <= 4; ++r)
                for (unsigned b = 0; b <= d; ++b)
                    EXPECT_EQ(chi_value(b, d, k, r), BigInt(oracle::chi_literal(b, d, k, r)))
                        << b << d << k << r;
}

TEST(Chi, FullDegreeVanishesOffTheCell)
{
    for (unsigned d = 1; d <= 6; ++d)
        for (unsigned b = 0; b < d; ++b)
            EXPECT_EQ(chi_value(b, d, d, 3), 0);
}

TEST(ChiTable, LargeEntriesFallBack)
{
    const ChiTable t = ChiTable::build(4, 4, 3);
    EXPECT_TRUE(t.fits_int64);
    EXPECT_EQ(t.small[4], 4096);
    const ChiTable big = ChiTable::build(40, 40, 10);
    EXPECT_FALSE(big.fits_int64);
    EXPECT_EQ(big.exact[40], BigInt(1) << 400);
}

TEST(Coefficients, MatchBruteForceEmpiricalMeans)
{
    const unsigned d = 3, k = 2, r = 2;
    const Family f = make_family(parse_family("sum"), d, 0);
    const SampleSet s = draw_samples(d, 64, f.oracle, 4);
    const CoefficientTable t = estimate_coefficients(s, d, k, r);
    for (const auto& a : oracle::index_set(d, k, r)) {
        double mean = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto p = s.point(i);
            mean += oracle::psi(a, oracle::Vec(p.begin(), p.end())) * s.value(i);
        }
        mean /= static_cast<double>(s.size());
        EXPECT_NEAR(t.at(MultiIndex(a)), mean, 1e-12);
    }
}

TEST(Coefficients, ReconstructionIsTheTruncatedSeries)
{
    const unsigned d = 2, k = 1, r = 3;
    const SampleSet s = draw_samples(d, 100, boxbslash(d), 5);
    const CoefficientTable t = estimate_coefficients(s, d, k, r);
    std::mt19937_64 eng(6);
    for (int i = 0; i < 50; ++i) {
        const Point x = random_point(d, eng);
        double want = 0.0;
        for (const auto& a : oracle::index_set(d, k, r))
            want += t.at(MultiIndex(a)) * oracle::psi(a, x);
        EXPECT_NEAR(t.reconstruct(x), want, 1e-12);
        EXPECT_NEAR(t.scaled_reconstruction(x), want * 100, 1e-9);
    }
}

TEST(Coefficients, FromCoefficientsRoundTrips)
{
    const IndexRanking rk(2, 2, 2);
    std::vector<double> c(rk.size());
    for (std::size_t i = 0; i < c.size(); ++i)
        c[i] = 0.1 * static_cast<double>(i) - 0.5;
    const auto t = CoefficientTable::from_coefficients(2, 2, 2, c);
    for (std::size_t i = 0; i < c.size(); ++i)
        EXPECT_NEAR(t.at_rank(i), c[i], 1e-15);
    EXPECT_THROW(CoefficientTable(12, 12, 4, 1000), ResourceError);
}

TEST(Models, SignIsSgnOfLinear)
{
    const unsigned d = 3;
    const SampleSet s = draw_samples(d, 200, boxbslash(d), 7);
    const WaveletModel lin = build_model(s, 2, 2, Mode::linear);
    const WaveletModel sg = build_model(s, 2, 2, Mode::sign);
    std::mt19937_64 eng(8);
    for (int i = 0; i < 200; ++i) {
        const Point x = random_point(d, eng);
        EXPECT_EQ(eval_sign(sg, x), sgn(eval_linear(lin, x)));
        EXPECT_EQ(sg(x), eval_sign(sg, x));
        EXPECT_EQ(lin(x), eval_linear(lin, x));
    }
    EXPECT_THROW(eval_generalized(sg, Point(d, 0.5)), StateError);
}

TEST(Models, GeneralizedCollapsesToSignOnSignData)
{
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const unsigned d = 4;
        const Family f = make_family(parse_family("levelset"), d, seed);
        const SampleSet s = draw_samples(d, 150, f.oracle, seed + 20);
        const WaveletModel sg = build_model(s, 2, 3, Mode::sign);
        const WaveletModel gm = build_model(s, 2, 3, Mode::generalized);
        std::mt19937_64 eng(seed);
        for (int i = 0; i < 200; ++i) {
            const Point x = random_point(d, eng);
            EXPECT_EQ(eval_generalized(gm, x), eval_sign(sg, x));
        }
    }
}

TEST(Models, GeneralizedMatchesItsDefinition)
{
    // Thresholded sign reconstructions written out directly.
    const unsigned d = 2, k = 2, r = 2;
    const Family f = make_family(parse_family("sum"), d, 0);
    const SampleSet s = draw_samples(d, 30, f.oracle, 3);
    const WaveletModel gm = build_model(s, k, r, Mode::generalized);
    std::vector<double> ys(s.values());
    std::sort(ys.begin(), ys.end());
    const auto idx = oracle::index_set(d, k, r);
    std::mt19937_64 eng(4);
    for (int t = 0; t < 40; ++t) {
        const Point x = random_point(d, eng);
        double out = 0.0;
        for (std::size_t i = 0; i <= ys.size(); ++i) {
            const double lo = i == 0 ? -1.0 : ys[i - 1];
            const double hi = i == ys.size() ? 1.0 : ys[i];
            if (hi == lo)
                continue;
            // Sign data for threshold between lo and hi: sgn(y_j - lo) with ties up.
            double h = 0.0;
            for (const auto& a : idx) {
                double c = 0.0;
                for (std::size_t j = 0; j < s.size(); ++j) {
                    const auto p = s.point(j);
                    c += oracle::psi(a, oracle::Vec(p.begin(), p.end())) *
                         (s.value(j) > lo || (i == 0) ? 1.0 : -1.0);
                }
                h += c / static_cast<double>(s.size()) * oracle::psi(a, x);
            }
            out += 0.5 * (hi - lo) * (h < -1e-9 ? -1.0 : 1.0);
        }
        EXPECT_NEAR(eval_generalized(gm, x), out, 1e-12);
    }
}

TEST(Models, RecursionEndpoints)
{
    const Family f = make_family(parse_family("sum"), 3, 0);
    const WaveletModel gm = fit(f.oracle, 3, 3, 2, 80, 2, Mode::generalized);
    std::mt19937_64 eng(5);
    for (int i = 0; i < 20; ++i) {
        const auto g = chi_recursion(gm, random_point(3, eng));
        ASSERT_EQ(g.size(), 81u);
        EXPECT_NEAR(g.front(), -g.back(), 1e-12);
    }
}

TEST(Models, EmptySampleGivesPlusOne)
{
    const WaveletModel gm = build_model(SampleSet(2), 1, 1, Mode::generalized);
    EXPECT_EQ(eval_generalized(gm, Point{0.2, 0.2}), 1.0);
}

TEST(Models, FitChecksCoefficientBudgetBeforeSampling)
{
    EXPECT_THROW(fit(boxbslash(20), 20, 20, 6, 10, 1, Mode::sign), ResourceError);
}

TEST(Models, ParallelFitIsDeterministic)
{
    const Family f = make_family(parse_family("sum"), 4, 0);
    const WaveletModel a = fit(f.oracle, 4, 2, 3, 20000, 8, Mode::linear);
    const WaveletModel b = fit(f.oracle, 4, 2, 3, 20000, 8, Mode::linear);
    for (std::uint64_t i = 0; i < a.coefficients()->size(); ++i)
        EXPECT_EQ(a.coefficients()->at_rank(i), b.coefficients()->at_rank(i));
}

TEST(Occupancy, FullDegreeFitFollowsTheOccupancyRule)
{
    // With k = d a fitted model returns the truth (or its sign) on occupied
    // resolution-r cells and +1 on empty ones.
    const unsigned d = 2, r = 3;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const Family f = make_family(parse_family("step:m=4"), d, seed);
        const SampleSet s = draw_samples(d, 30, f.oracle, seed + 1);
        std::vector<bool> occupied(64, false);
        for (std::size_t i = 0; i < s.size(); ++i)
            occupied[cell_of_point(s.point(i)[0], r) + 8 * cell_of_point(s.point(i)[1], r)] = true;
        for (Mode mode : {Mode::sign, Mode::generalized}) {
            const WaveletModel m = build_model(s, d, r, mode);
            for (std::uint64_t c = 0; c < 64; ++c) {
                const Point mid{(c % 8 + 0.5) / 8, (c / 8 + 0.5) / 8};
                const double y = f.oracle(mid);
                const double want = !occupied[c] ? 1.0 : mode == Mode::sign ? sgn(y) : y;
                EXPECT_NEAR(m(mid), want, 1e-12) << c;
            }
        }
    }
}

TEST(Occupancy, MeanMatchesRealFitsInDistribution)
{
    const unsigned d = 2, r = 3;
    const Family f = make_family(parse_family("levelset:t=1,b=2,p=0.5"), d, 1);
    double real = 0.0, occ = 0.0;
    const int reps = 300;
    for (int i = 0; i < reps; ++i) {
        const WaveletModel m = fit(f.oracle, d, d, r, 80, derive_seed(3, i), Mode::sign);
        const Oracle g = [&m](PointView x) { return m(x); };
        real += l1_exact_dyadic(f.oracle, g, d, r).value;
        occ += full_resolution_error(f.oracle, d, 1, r, 80, derive_seed(4, i), Mode::sign).l1_error;
    }
    // Each error is a sum of 2/64 per empty (-1)-cell; relative tolerance is loose.
    EXPECT_NEAR(real / reps, occ / reps, 0.25 * std::max(real, occ) / reps + 1e-3);
}

TEST(Occupancy, SaturatedSamplesLeaveNoError)
{
    const Family f = make_family(parse_family("levelset"), 4, 2);
    const auto e = full_resolution_error(f.oracle, 4, 1, 3, 1ull << 30, 1, Mode::sign);
    EXPECT_EQ(e.l1_error, 0.0);
    EXPECT_EQ(e.empty_cells, 0.0);
}

TEST(Occupancy, EmptyCellCountHasTheRightMean)
{
    std::mt19937_64 eng(77);
    double sum = 0.0;
    const int reps = 2000;
    for (int i = 0; i < reps; ++i)
        sum += sample_empty_cells(200, 8, eng);
    const double want = 256.0 * std::pow(1.0 - 1.0 / 256.0, 200.0);
    EXPECT_NEAR(sum / reps, want, 0.02 * want);
    EXPECT_EQ(sample_empty_cells(0, 5, eng), 32.0);
    EXPECT_EQ(sample_empty_cells(5, 0, eng), 0.0);
}
