// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "monoapprox/approx_det.hpp"
#include "monoapprox/approx_mc.hpp"
#include "monoapprox/bounds.hpp"
#include "monoapprox/cli/cli.hpp"
#include "monoapprox/functions.hpp"
#include "monoapprox/metrics.hpp"
#include "support/oracles.hpp"

using namespace monoapprox;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string num(double v) { return cli::format_real(v); }

// Volume of {x in box : sum x < t}, by inclusion-exclusion over the corners.
double box_below(const std::vector<double>& lo, const std::vector<double>& hi, double t)
{
    const std::size_t d = lo.size();
    double fact = 1.0, vol = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        fact *= static_cast<double>(j + 1);
        vol *= hi[j] - lo[j];
    }
    double s = 0.0;
    for (std::uint64_t S = 0; S < (std::uint64_t{1} << d); ++S) {
        double corner = 0.0;
        int parity = 0;
        for (std::size_t j = 0; j < d; ++j) {
            const bool up = (S >> j) & 1U;
            corner += up ? hi[j] : lo[j];
            parity += up;
        }
        const double e = t - corner;
        if (e > 0)
            s += (parity % 2 ? -1.0 : 1.0) * std::pow(e, static_cast<double>(d));
    }
    return std::min(vol, s / fact);
}

// <psi_a, sgn(sum x - d/2)> from exact half-space volumes of the sign boxes.
double boxbslash_coefficient(const std::vector<std::uint64_t>& a)
{
    const std::size_t d = a.size();
    std::vector<std::size_t> active;
    std::vector<double> lo(d, 0.0), hi(d, 1.0);
    double amp = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
        if (a[j] == 0)
            continue;
        int level;
        std::uint64_t shift;
        oracle::level_shift(a[j], level, shift);
        const double w = std::pow(2.0, -level);
        lo[j] = shift * w;
        hi[j] = lo[j] + w;
        amp *= std::pow(2.0, level / 2.0);
        active.push_back(j);
    }
    double out = 0.0;
    for (std::uint64_t S = 0; S < (std::uint64_t{1} << active.size()); ++S) {
        std::vector<double> l = lo, h = hi;
        double sign = 1.0;
        for (std::size_t i = 0; i < active.size(); ++i) {
            const std::size_t j = active[i];
            const double mid = 0.5 * (lo[j] + hi[j]);
            if ((S >> i) & 1U) {
                l[j] = mid;
            } else {
                h[j] = mid;
                sign = -sign;
            }
        }
        double vol = 1.0;
        for (std::size_t j = 0; j < d; ++j)
            vol *= h[j] - l[j];
        out += sign * (vol - 2.0 * box_below(l, h, d / 2.0));
    }
    return amp * out;
}

Oracle random_sign_truth(unsigned d, std::mt19937_64& eng)
{
    if (eng() % 2 == 0) {
        const unsigned t = static_cast<unsigned>(eng() % (d + 1));
        const unsigned b = t + static_cast<unsigned>(eng() % (d - t + 1));
        const double p = 0.2 + 0.6 * std::uniform_real_distribution<double>(0, 1)(eng);
        return make_family(parse_family("levelset:t=" + std::to_string(t) + ",b=" +
                                        std::to_string(b) + ",p=" + num(p)),
                           d, eng())
            .oracle;
    }
    const Family st = make_family(parse_family("step:m=4"), d, eng());
    return threshold(st.oracle, std::uniform_real_distribution<double>(-1, 1)(eng));
}

Outcome criterion1()
{
    const LbParams p = LbParams::reference();
    const EpsHatComponents c = lb_epshat(p, p.d0, p.alpha0, p.beta0, p.tau0);
    return {std::abs(c.eps_hat - 0.0666667) <= 1e-3,
            "eps_hat=" + num(c.eps_hat) + " C0=" + num(p.c0) + " target 0.0666667 tol 1e-3"};
}

Outcome criterion2()
{
    const LbParams p = LbParams::reference();
    const double a = lb_curve(p, 1.0 / 15, 100).n_lower;
    const double b = lb_curve(p, 1.0 / 15, 400).n_lower;
    const double want = 108.0 * std::exp(10.0);
    const double ulp = std::nextafter(want, 2 * want) - want;
    return {std::abs(a - 108.0) <= 4 * std::nextafter(108.0, 200.0) - 4 * 108.0 &&
                std::abs(b - want) <= 4 * ulp,
            "n_lower(d=100)=" + num(a) + " n_lower(d=400)=" + num(b) + " want " + num(want)};
}

Outcome criterion3()
{
    for (unsigned d = 1; d <= 30; ++d)
        if (n_det_curse(0.5, d) != static_cast<double>(std::uint64_t{1} << (d - 1)))
            return {false, "d=" + std::to_string(d)};
    return {true, "d=1..30 exact"};
}

// Digits of X agree with those of x in every coordinate where `pattern`
// is r, and first differ at digit pattern[j] < r otherwise.
Outcome criterion4()
{
    std::mt19937_64 eng(4);
    std::size_t checks = 0;
    for (unsigned d = 1; d <= 4; ++d)
        for (unsigned r = 1; r <= 3; ++r) {
            const std::uint64_t side = std::uint64_t{1} << r;
            std::uint64_t patterns = 1;
            for (unsigned j = 0; j < d; ++j)
                patterns *= r + 1;
            for (unsigned k = 0; k <= d; ++k) {
                const auto idx = enumerate_indices(d, k, r);
                std::vector<BigInt> chi(d + 1);
                for (unsigned b = 0; b <= d; ++b)
                    chi[b] = chi_value(b, d, k, r);
                for (std::uint64_t pat = 0; pat < patterns; ++pat) {
                    oracle::Vec x(d), X(d);
                    unsigned b = 0;
                    std::uint64_t rest = pat;
                    for (unsigned j = 0; j < d; ++j) {
                        const unsigned split = static_cast<unsigned>(rest % (r + 1));
                        rest /= r + 1;
                        const std::uint64_t c = eng() % side;
                        std::uint64_t C = c;
                        if (split == r) {
                            ++b;
                        } else {
                            const unsigned low = r - 1 - split;
                            C = ((c >> low) ^ 1U) << low;
                            C |= eng() % (std::uint64_t{1} << low);
                        }
                        x[j] = (c + 0.5) / side;
                        X[j] = (C + 0.5) / side;
                    }
                    double brute = 0.0;
                    for (const auto& a : idx)
                        brute += oracle::psi(a.alphas(), X) * oracle::psi(a.alphas(), x);
                    const long long rounded = std::llround(brute);
                    ++checks;
                    if (std::abs(brute - rounded) > 1e-6 || chi[b] != BigInt(rounded))
                        return {false, "d=" + std::to_string(d) + " k=" + std::to_string(k) +
                                           " r=" + std::to_string(r) + " b=" +
                                           std::to_string(b) + ": chi=" + chi[b].str() +
                                           " brute=" + num(brute)};
                }
            }
        }
    return {true, std::to_string(checks) + " match patterns, exact"};
}

Outcome criterion5()
{
    std::mt19937_64 eng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t probes = 0;
    for (unsigned s = 0; s < 20; ++s) {
        const unsigned d = 2 + s % 5;
        const Oracle truth = s % 4 == 3 ? boxbslash(d) : random_sign_truth(d, eng);
        const unsigned k = 1 + s % std::min(d, 3u);
        const unsigned r = 2 + s % 2;
        const SampleSet samples = draw_samples(d, 400, truth, derive_seed(55, s));
        const WaveletModel sm = build_model(samples, k, r, Mode::sign);
        const WaveletModel gm = build_model(samples, k, r, Mode::generalized);
        Point x(d);
        for (int i = 0; i < 1000; ++i) {
            for (auto& v : x)
                v = u(eng);
            ++probes;
            if (eval_generalized(gm, x) != eval_sign(sm, x))
                return {false, "fit " + std::to_string(s) + " probe " + std::to_string(i)};
        }
    }
    return {true, std::to_string(probes) + " probes over 20 fits, all equal"};
}

Outcome criterion6()
{
    std::mt19937_64 eng(6);
    std::size_t checks = 0;
    double worst = 0.0;
    for (unsigned s = 0; s < 100; ++s) {
        const unsigned d = 2 + s % 2;
        const unsigned r = 1 + (s / 2) % 2;
        Oracle f;
        if (s % 4 < 2) {
            const unsigned t = static_cast<unsigned>(eng() % (d + 1));
            const unsigned b = t + static_cast<unsigned>(eng() % (d - t + 1));
            f = level_set_function(d, t, b, sample_U(d, t, 0.5, eng()));
        } else {
            f = step_function(d, std::uint64_t{1} << r, random_delta(d, std::uint64_t{1} << r, eng()));
        }
        for (unsigned k = 0; k <= d; ++k) {
            const double tail = tail_mass(f, d, k, r);
            const double bound = std::sqrt(static_cast<double>(d * r)) / (k + 1);
            worst = std::max(worst, tail / bound);
            ++checks;
            if (!(tail <= bound))
                return {false, "function " + std::to_string(s) + " k=" + std::to_string(k) +
                                   " tail=" + num(tail) + " bound=" + num(bound)};
        }
    }
    return {true, std::to_string(checks) + " comparisons, max tail/bound=" + num(worst)};
}

Outcome criterion7()
{
    std::mt19937_64 eng(7);
    double worst = 0.0;
    for (unsigned d = 1; d <= 3; ++d)
        for (unsigned r = 1; r <= 2; ++r)
            for (int rep = 0; rep < 5; ++rep) {
                // Arbitrary (not necessarily monotone) cell values.
                const std::uint64_t side = std::uint64_t{1} << r;
                std::vector<double> cells(static_cast<std::size_t>(std::pow(side, d)));
                for (auto& v : cells)
                    v = std::uniform_real_distribution<double>(-1, 1)(eng);
                const Oracle f = [&cells, d, r, side](PointView x) {
                    std::uint64_t flat = 0, stride = 1;
                    for (unsigned j = 0; j < d; ++j) {
                        flat += cell_of_point(x[j], r) * stride;
                        stride *= side;
                    }
                    return cells[flat];
                };
                const CoefficientGrid g = all_coefficients(f, d, r);
                double sq = 0.0;
                for (double v : g.values())
                    sq += v * v;
                double l2 = 0.0;
                for (double v : cells)
                    l2 += v * v / static_cast<double>(cells.size());
                worst = std::max(worst, std::abs(sq - l2));
                worst = std::max(worst, std::abs(l2_squared_exact(f, d, r) - l2));
            }
    return {worst <= 1e-10, "max |sum c^2 - ||f||^2| = " + num(worst)};
}

Outcome criterion8()
{
    const unsigned d = 3;
    const Oracle f = boxbslash(d);
    const std::vector<std::vector<std::uint64_t>> picks{
        {0, 0, 0}, {1, 0, 0}, {0, 1, 1}, {1, 1, 1}, {2, 0, 3}};
    const int reps = 500;
    const std::uint64_t n = 256;
    std::vector<double> sum(picks.size(), 0.0), sumsq(picks.size(), 0.0);
    for (int i = 0; i < reps; ++i) {
        const CoefficientTable t =
            estimate_coefficients(draw_samples(d, n, f, derive_seed(8, i)), d, 3, 2);
        for (std::size_t p = 0; p < picks.size(); ++p) {
            const double v = t.at(MultiIndex(picks[p]));
            sum[p] += v;
            sumsq[p] += v * v;
        }
    }
    std::string detail;
    bool ok = true;
    for (std::size_t p = 0; p < picks.size(); ++p) {
        const double mean = sum[p] / reps;
        const double var = (sumsq[p] - reps * mean * mean) / (reps - 1);
        const double exact = boxbslash_coefficient(picks[p]);
        const double z = std::abs(mean - exact) / std::sqrt(var / reps);
        ok = ok && z <= 4.0 && var <= 1.2 / n;
        char buf[64];
        std::snprintf(buf, sizeof buf, " [z=%.2f n*var=%.3f]", z, var * static_cast<double>(n));
        detail += buf;
    }
    return {ok, "5 indices:" + detail};
}

Outcome criterion9()
{
    std::size_t checks = 0;
    double worst = 0.0;
    auto check = [&](const Oracle& truth, unsigned d, std::uint64_t m) {
        const GridModel g = fit_grid(truth, d, m);
        const Oracle h = [&g](PointView x) { return eval_grid(g, x); };
        const double err = l1_exact_dyadic(truth, h, d, 2).value;
        worst = std::max(worst, err / grid_error_bound(d, m));
        ++checks;
        return err <= grid_error_bound(d, m);
    };
    for (std::uint64_t delta = 0; delta < 16; ++delta) {
        std::vector<std::uint8_t> bits(4);
        for (int c = 0; c < 4; ++c)
            bits[c] = (delta >> c) & 1U;
        const StepFamily f = step_function(2, 2, bits);
        for (std::uint64_t m : {2u, 4u})
            if (!check(f, 2, m))
                return {false, "step delta " + std::to_string(delta) + " m=" + std::to_string(m)};
    }
    std::mt19937_64 eng(9);
    for (int s = 0; s < 50; ++s) {
        const unsigned t = static_cast<unsigned>(eng() % 4);
        const unsigned b = t + static_cast<unsigned>(eng() % (4 - t));
        const LevelSetFunction f = level_set_function(3, t, b, sample_U(3, t, 0.5, eng()));
        for (std::uint64_t m : {2u, 4u})
            if (!check(f, 3, m))
                return {false, "level set " + std::to_string(s) + " m=" + std::to_string(m)};
    }
    return {true, std::to_string(checks) + " truths, max error/(d/m)=" + num(worst)};
}

Outcome criterion10()
{
    double slope[2];
    for (unsigned d = 1; d <= 2; ++d) {
        cli::ExperimentConfig c;
        c.subcommand = "convergence";
        c.algo = "det";
        c.d = d;
        c.family = "sum";
        slope[d - 1] = cli::cmd_convergence(c).summary["fit_slope"].get<double>();
    }
    return {std::abs(slope[0] + 1.0) <= 0.1 && std::abs(slope[1] + 0.5) <= 0.15,
            "slope d=1 " + num(slope[0]) + " (-1 +- 0.1), d=2 " + num(slope[1]) +
                " (-0.5 +- 0.15)"};
}

Outcome criterion11()
{
    const unsigned d = 2;
    const std::uint64_t m = 2;
    double worst = 0.0;
    for (std::uint64_t mask = 0; mask < 16; ++mask) {
        std::vector<std::uint64_t> cells;
        std::vector<bool> revealed(4, false);
        for (std::uint64_t c = 0; c < 4; ++c)
            if ((mask >> c) & 1U) {
                cells.push_back(c);
                revealed[c] = true;
            }
        const double formula = (1.0 - cells.size() / 4.0) / (d * (m - 1) + 1.0);
        const double v = bakhvalov_step_error(d, m, cells);
        if (v != formula)
            return {false, "mask " + std::to_string(mask) + ": " + num(v) + " vs " + num(formula)};
        worst = std::max(worst, std::abs(oracle::bakhvalov_brute(d, m, revealed) - formula));
    }
    return {worst <= 1e-12, "16 sample sets exact; brute-force max deviation " + num(worst)};
}

Outcome criterion12()
{
    std::string detail;
    bool ok = true;
    for (unsigned d : {2u, 4u}) {
        const McParams p = choose_params(0.5, d);
        const double bound = ub_error(p);
        std::mt19937_64 eng(1200 + d);
        double total = 0.0;
        for (int s = 0; s < 20; ++s) {
            const Oracle truth = random_sign_truth(d, eng);
            const std::uint64_t seed = derive_seed(12, 100 * d + s);
            const auto n = static_cast<std::uint64_t>(p.n);
            if (n <= kDefaultSampleBudget) {
                const WaveletModel m = fit(truth, d, p.k, p.r, n, seed, Mode::sign);
                const Oracle h = [&m](PointView x) { return m(x); };
                total += l1_exact_dyadic(truth, h, d, p.r).value;
            } else {
                // k = d here, so the occupancy reduction is exact.
                total += full_resolution_error(truth, d, 2, p.r, n, seed, Mode::sign).l1_error;
            }
        }
        const double mean = total / 20;
        ok = ok && mean <= bound;
        detail += " d=" + std::to_string(d) + " (k=" + std::to_string(p.k) + " r=" +
                  std::to_string(p.r) + " n=" + num(p.n) + ") mean=" + num(mean) +
                  " bound=" + num(bound);
    }
    return {ok, detail.substr(1)};
}

} // namespace

int main()
{
    const std::vector<std::function<Outcome()>> criteria{
        criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
        criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};
    // Runtime limits in seconds; 0 means none stated.
    const double limits[] = {1, 1, 0, 30, 0, 0, 0, 0, 0, 0, 0, 600};
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (limits[i] > 0 && secs > limits[i]) {
            o.pass = false;
            o.detail += " (over the " + num(limits[i]) + " s limit)";
        }
        failed += !o.pass;
        std::printf("criterion %zu %s %.3fs %s\n", i + 1, o.pass ? "PASS" : "FAIL", secs,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
