#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "monoapprox/approx_det.hpp"
#include "monoapprox/cli/cli.hpp"
#include "monoapprox/detail/numeric.hpp"
#include "monoapprox/functions.hpp"
#include "monoapprox/metrics.hpp"

namespace monoapprox::cli {

namespace {

struct Failure {
    std::string detail;
};

void require(bool ok, const std::function<std::string()>& detail)
{
    if (!ok)
        throw Failure{detail()};
}

std::string str(double v) { return format_real(v); }

// Random monotone truth constant on resolution-1 or resolution-r cells.
Family random_truth(unsigned d, unsigned r, std::uint64_t seed)
{
    std::mt19937_64 eng(seed);
    if (eng() % 2 == 0) {
        const unsigned t = static_cast<unsigned>(eng() % (d + 1));
        const unsigned b = t + static_cast<unsigned>(eng() % (d - t + 1));
        return make_family(parse_family("levelset:t=" + std::to_string(t) +
                                        ",b=" + std::to_string(b) + ",p=0.5"),
                           d, eng());
    }
    return make_family(parse_family("step:m=" + std::to_string(1u << r)), d, eng());
}

void prop_haar()
{
    for (unsigned d = 1; d <= 2; ++d)
        for (unsigned r = 1; r <= 2; ++r) {
            const auto idx = enumerate_indices(d, d, r);
            for (const auto& a : idx)
                for (const auto& b : idx) {
                    const Oracle pb = [&b](PointView x) { return psi_d(b, x); };
                    const double ip = exact_coefficient(pb, a, d, r);
                    const double want = a == b ? 1.0 : 0.0;
                    require(std::abs(ip - want) < 1e-12, [&] {
                        return "<psi_a, psi_b> = " + str(ip) + " at d=" + std::to_string(d) +
                               " r=" + std::to_string(r);
                    });
                }
        }
}

void prop_ranking()
{
    for (unsigned d = 1; d <= 5; ++d)
        for (unsigned k = 0; k <= d; ++k)
            for (unsigned r = 1; r <= 3; ++r) {
                const IndexRanking rk(d, k, r);
                require(BigInt(rk.size()) == index_set_size(d, k, r).exact,
                        [&] { return "size mismatch at d=" + std::to_string(d); });
                for (std::uint64_t i = 0; i < rk.size(); ++i)
                    require(rk.rank(rk.unrank(i)) == i,
                            [&] { return "rank(unrank(" + std::to_string(i) + ")) != i"; });
            }
}

void prop_chi()
{
    for (unsigned d = 1; d <= 3; ++d)
        for (unsigned r = 1; r <= 2; ++r)
            for (unsigned k = 0; k <= d; ++k) {
                const auto idx = enumerate_indices(d, k, r);
                for (unsigned b = 0; b <= d; ++b) {
                    // x in cell 0 everywhere; X shares the cell in the first b coordinates.
                    Point x(d, 0.1 / (1u << r)), X(d, 0.1 / (1u << r));
                    for (unsigned j = b; j < d; ++j)
                        X[j] = 1.0 - 0.1 / (1u << r);
                    double brute = 0.0;
                    for (const auto& a : idx)
                        brute += psi_d(a, X) * psi_d(a, x);
                    const BigInt chi = chi_value(b, d, k, r);
                    require(BigInt(static_cast<long long>(std::llround(brute))) == chi, [&] {
                        return "chi(" + std::to_string(b) + ") at d=" + std::to_string(d) +
                               " k=" + std::to_string(k) + " r=" + std::to_string(r) + ": " +
                               chi.str() + " vs " + str(brute);
                    });
                }
            }
}

void prop_collapse()
{
    for (unsigned s = 0; s < 5; ++s) {
        const unsigned d = 2 + s % 3;
        const Family truth = random_truth(d, 1, 100 + s);
        if (!truth.sign_valued)
            continue;
        const SampleSet samples = draw_samples(d, 300, truth.oracle, 200 + s);
        const WaveletModel sm = build_model(samples, std::min(d, 2u), 2, Mode::sign);
        const WaveletModel gm = build_model(samples, std::min(d, 2u), 2, Mode::generalized);
        std::mt19937_64 eng(300 + s);
        Point x(d);
        for (int i = 0; i < 200; ++i) {
            for (auto& v : x)
                v = detail::uniform01(eng);
            require(eval_sign(sm, x) == eval_generalized(gm, x),
                    [&] { return "sign and generalized outputs differ, seed " + std::to_string(s); });
        }
    }
}

void prop_recursion()
{
    const Family truth = make_family(parse_family("sum"), 3, 0);
    const WaveletModel gm = fit(truth.oracle, 3, 2, 2, 200, 11, Mode::generalized);
    std::mt19937_64 eng(12);
    Point x(3);
    for (int i = 0; i < 50; ++i) {
        for (auto& v : x)
            v = detail::uniform01(eng);
        const auto g = chi_recursion(gm, x);
        require(std::abs(g.back() + g.front()) < 1e-10, [&] {
            return "g_n + g_0 = " + str(g.back() + g.front());
        });
        const double y = eval_generalized(gm, x);
        require(y >= -1.0 && y <= 1.0, [&] { return "generalized output " + str(y); });
    }
}

void prop_tailmass()
{
    for (unsigned s = 0; s < 40; ++s) {
        const unsigned d = 2 + s % 2;
        const unsigned r = 1 + (s / 2) % 2;
        const Family truth = random_truth(d, r, 500 + s);
        for (unsigned k = 0; k <= d; ++k) {
            const double tail = tail_mass(truth.oracle, d, k, r);
            const double bound = std::sqrt(static_cast<double>(d * r)) / (k + 1);
            require(tail <= bound, [&] {
                return truth.description + " d=" + std::to_string(d) + " r=" + std::to_string(r) +
                       " k=" + std::to_string(k) + ": tail " + str(tail) + " > " + str(bound);
            });
        }
    }
}

void prop_parseval()
{
    for (unsigned d = 1; d <= 3; ++d)
        for (unsigned r = 1; r <= 2; ++r) {
            const Family f = random_truth(d, r, 700 + 10 * d + r);
            const CoefficientGrid g = all_coefficients(f.oracle, d, r);
            detail::CompensatedSum s;
            for (double v : g.values())
                s.add(v * v);
            const double l2 = l2_squared_exact(f.oracle, d, r);
            require(std::abs(s.value() - l2) <= 1e-10,
                    [&] { return "sum of squares " + str(s.value()) + " vs " + str(l2); });
        }
}

void prop_estimator()
{
    const unsigned d = 3;
    const Oracle f = boxbslash(d);
    const MultiIndex alpha({1, 0, 0});
    const double exact = exact_coefficient(f, alpha, d, 6);
    const int reps = 200;
    const std::uint64_t n = 256;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < reps; ++i) {
        const CoefficientTable t =
            estimate_coefficients(draw_samples(d, n, f, derive_seed(900, i)), d, 1, 1);
        const double v = t.at(alpha);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / reps;
    const double var = (sumsq - reps * mean * mean) / (reps - 1);
    require(std::abs(mean - exact) <= 4.0 * std::sqrt(var / reps),
            [&] { return "mean " + str(mean) + " vs exact " + str(exact); });
    require(var <= 1.2 / n, [&] { return "variance " + str(var) + " > 1.2/n"; });
}

void prop_grid()
{
    for (unsigned s = 0; s < 20; ++s) {
        const unsigned d = 2 + s % 2;
        const std::uint64_t m = s % 4 < 2 ? 2 : 4;
        const Family truth = random_truth(d, 2, 1100 + s);
        const GridModel g = fit_grid(truth.oracle, d, m);
        const Oracle model = [&g](PointView x) { return eval_grid(g, x); };
        const double err = l1_exact_dyadic(truth.oracle, model, d, 2).value;
        require(err <= grid_error_bound(d, m) + 1e-15, [&] {
            return truth.description + " d=" + std::to_string(d) + " m=" + std::to_string(m) +
                   ": error " + str(err);
        });
    }
}

void prop_rates()
{
    for (unsigned d = 1; d <= 2; ++d) {
        ExperimentConfig c;
        c.algo = "det";
        c.d = d;
        c.family = "sum";
        const Report rep = cmd_convergence(c);
        const double slope = rep.summary["fit_slope"].get<double>();
        const double tol = d == 1 ? 0.1 : 0.15;
        require(std::abs(slope + 1.0 / d) <= tol,
                [&] { return "d=" + std::to_string(d) + " slope " + str(slope); });
    }
}

void prop_bakhvalov()
{
    const unsigned d = 2;
    const std::uint64_t m = 2;
    for (std::uint64_t mask = 0; mask < 16; ++mask) {
        std::vector<std::uint64_t> cells;
        for (std::uint64_t c = 0; c < 4; ++c)
            if ((mask >> c) & 1U)
                cells.push_back(c);
        const double formula = (1.0 - cells.size() / 4.0) / (d * (m - 1) + 1.0);
        const double v = bakhvalov_step_error(d, m, cells);
        require(std::abs(v - formula) < 1e-15, [&] { return "mask " + std::to_string(mask); });
    }
}

void prop_certificate(std::ostream& out)
{
    const LbParams p = LbParams::reference();
    const EpsHatComponents c = lb_epshat(p, p.d0, p.alpha0, p.beta0, p.tau0);
    out << "  r0=" << str(c.r0) << " r1=" << str(c.r1) << " r_B=" << str(c.r_B)
        << " sigma=" << str(c.sigma) << " gamma=" << str(c.gamma) << " q=" << str(c.q)
        << "\n  eps_hat=" << str(c.eps_hat) << " (target 0.0666667, tolerance 1e-3)\n";
    require(std::abs(c.eps_hat - 0.0666667) <= 1e-3, [&] { return "eps_hat " + str(c.eps_hat); });
}

void prop_lbcurve()
{
    const LbParams p = LbParams::reference();
    const LbCurve a = lb_curve(p, 1.0 / 15.0, 100);
    require(a.valid && std::abs(a.n_lower - 108.0) < 1e-9,
            [&] { return "n_lower(1/15, 100) = " + str(a.n_lower); });
    const LbCurve b = lb_curve(p, 1.0 / 15.0, 400);
    const double want = 108.0 * std::exp(10.0);
    require(b.valid && std::abs(b.n_lower - want) <= 4 * (std::nextafter(want, 2 * want) - want),
            [&] { return "n_lower(1/15, 400) = " + str(b.n_lower); });
}

void prop_curse()
{
    for (unsigned d = 1; d <= 30; ++d)
        require(n_det_curse(0.5, d) == static_cast<double>(std::uint64_t{1} << (d - 1)),
                [&] { return "d=" + std::to_string(d); });
}

void prop_monotone()
{
    for (unsigned d = 1; d <= 3; ++d) {
        require(is_monotone_on_grid(boxbslash(d), d, 8), [] { return "boxbslash"; });
        for (std::uint64_t s = 0; s < 5; ++s) {
            const Family st = make_family(parse_family("step:m=3"), d, s);
            require(is_monotone_on_grid(st.oracle, d, 9), [] { return "step family"; });
        }
    }
    for (unsigned d = 1; d <= 10; ++d)
        for (std::uint64_t s = 0; s < 3; ++s) {
            const unsigned t = static_cast<unsigned>(s % (d + 1));
            const LevelSetFunction f(d, t, d - s % (d - t + 1), sample_U(d, t, 0.4, s));
            for (CubePoint x = 0; x < (CubePoint{1} << d); ++x)
                for (unsigned j = 0; j < d; ++j)
                    if (!((x >> j) & 1U))
                        require(f.eval_bits(x) <= f.eval_bits(x | (CubePoint{1} << j)),
                                [&] { return "level set decreases at " + std::to_string(x); });
        }
}

void prop_lbscaling()
{
    const LbParams p = LbParams::reference();
    const EpsHatComponents base = lb_epshat(p, p.d0, p.alpha0, p.beta0, p.tau0);
    for (unsigned d : {100u, 150u, 200u, 300u, 400u}) {
        const double tmax = p.tau0 * std::sqrt(d / static_cast<double>(p.d0));
        for (int i = 0; i <= 4; ++i) {
            const double tau = p.tau0 + (tmax - p.tau0) * i / 4.0;
            const double a = p.alpha0 * p.tau0 / tau;
            const double b = p.beta0 * p.tau0 / tau;
            const EpsHatComponents c = lb_epshat(p, d, a, b, tau);
            const auto where = [&] { return "d=" + std::to_string(d) + " tau=" + str(tau); };
            require(c.sigma <= base.sigma * (1 + 1e-12), where);
            require(c.q >= base.q * (1 - 1e-12), where);
            require(c.r_B >= p.tau0 / tau * base.r_B * (1 - 1e-12), where);
            require(c.gamma >= 1.0, where);
        }
    }
}

void prop_ub()
{
    for (unsigned d = 1; d <= 6; ++d)
        for (unsigned r = 1; r <= 8; ++r)
            for (unsigned k = 1; k < d; ++k) {
                const McParams p{d, k, r, 1e6, 0.5};
                McParams q = p;
                q.n *= 2;
                require(ub_error(q) < ub_error(p), [] { return "not decreasing in n"; });
                McParams kp = p, kq = p;
                kq.k = k + 1;
                kp.n = kq.n = std::numeric_limits<double>::infinity();
                require(ub_error(kq) < ub_error(kp), [] { return "not decreasing in k"; });
                McParams rq = p;
                rq.r = r + 1;
                require(ub_error_terms(rq).resolution < ub_error_terms(p).resolution,
                        [] { return "first term not decreasing in r"; });
            }
}

void prop_crossing()
{
    const LbParams p = LbParams::reference();
    for (unsigned d : {100u, 200u, 400u, 1000u})
        for (double eps : {1.0 / 15.0, 0.05, 0.03, 0.01}) {
            const LbCurve l = lb_curve(p, eps, d);
            if (!l.valid)
                continue;
            const NRanUpper u = n_ran_upper(eps, d);
            require(u.log_value >= std::log(std::max(l.n_lower, l.n_sharp)), [&] {
                return "upper below lower at eps=" + str(eps) + " d=" + std::to_string(d);
            });
        }
}

void prop_occupancy()
{
    // Real full-resolution fits agree with the occupancy rule cell by cell.
    const unsigned d = 2, r = 3;
    for (std::uint64_t s = 0; s < 4; ++s) {
        const Family truth = make_family(parse_family("levelset:t=1,b=2,p=0.5"), d, s);
        const SampleSet samples = draw_samples(d, 40, truth.oracle, 50 + s);
        for (Mode mode : {Mode::sign, Mode::generalized}) {
            const WaveletModel model = build_model(samples, d, r, mode);
            std::vector<int> occupied(1u << (r * d), 0);
            for (std::size_t i = 0; i < samples.size(); ++i) {
                const auto x = samples.point(i);
                occupied[cell_of_point(x[0], r) + (cell_of_point(x[1], r) << r)] = 1;
            }
            for (std::uint64_t c = 0; c < occupied.size(); ++c) {
                const Point mid{((c & 7) + 0.5) / 8.0, ((c >> 3) + 0.5) / 8.0};
                const double want = occupied[c] ? (mode == Mode::sign ? sgn(truth.oracle(mid))
                                                                       : truth.oracle(mid))
                                                 : 1.0;
                require(model(mid) == want, [&] { return "cell " + std::to_string(c); });
            }
        }
    }
    // Sampled empty-cell counts match M (1 - 1/M)^N on average.
    std::mt19937_64 eng(77);
    const unsigned e = 10;
    const double M = 1024.0;
    const std::uint64_t N = 3000;
    double sum = 0.0, sumsq = 0.0;
    const int reps = 400;
    for (int i = 0; i < reps; ++i) {
        const double v = sample_empty_cells(N, e, eng);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / reps;
    const double se = std::sqrt((sumsq / reps - mean * mean) / reps);
    const double want = M * std::pow(1.0 - 1.0 / M, static_cast<double>(N));
    require(std::abs(mean - want) <= 4 * se,
            [&] { return "mean empty " + str(mean) + " vs " + str(want); });
}

struct Property {
    const char* name;
    std::function<void(std::ostream&)> run;
};

std::vector<Property> properties()
{
    auto wrap = [](void (*fn)()) { return [fn](std::ostream&) { fn(); }; };
    return {
        {"haar", wrap(prop_haar)},           {"ranking", wrap(prop_ranking)},
        {"chi", wrap(prop_chi)},             {"collapse", wrap(prop_collapse)},
        {"recursion", wrap(prop_recursion)}, {"tailmass", wrap(prop_tailmass)},
        {"parseval", wrap(prop_parseval)},   {"estimator", wrap(prop_estimator)},
        {"grid", wrap(prop_grid)},           {"rates", wrap(prop_rates)},
        {"bakhvalov", wrap(prop_bakhvalov)}, {"certificate", prop_certificate},
        {"lbcurve", wrap(prop_lbcurve)},         {"curse", wrap(prop_curse)},
        {"monotone", wrap(prop_monotone)},   {"lbscaling", wrap(prop_lbscaling)},
        {"ub", wrap(prop_ub)},               {"crossing", wrap(prop_crossing)},
        {"occupancy", wrap(prop_occupancy)},
    };
}

} // namespace

std::vector<std::string> verify_property_names()
{
    std::vector<std::string> names;
    for (const auto& p : properties())
        names.emplace_back(p.name);
    return names;
}

std::vector<PropertyOutcome> cmd_verify(const ExperimentConfig& config, std::ostream& out)
{
    const auto all = properties();
    for (const auto& name : config.only)
        if (std::none_of(all.begin(), all.end(), [&](const Property& p) { return name == p.name; }))
            throw UsageError("unknown property '" + name + "'");
    std::vector<PropertyOutcome> outcomes;
    for (const auto& p : all) {
        if (!config.only.empty() &&
            std::find(config.only.begin(), config.only.end(), p.name) == config.only.end())
            continue;
        PropertyOutcome o;
        o.name = p.name;
        const auto start = std::chrono::steady_clock::now();
        std::ostringstream notes;
        try {
            p.run(notes);
            o.passed = true;
        } catch (const Failure& f) {
            o.detail = f.detail;
        } catch (const std::exception& e) {
            o.detail = std::string("exception: ") + e.what();
        }
        o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out << std::left << std::setw(10) << o.name << (o.passed ? " PASS " : " FAIL ")
            << std::fixed << std::setprecision(3) << o.seconds << "s";
        if (!o.passed)
            out << "  " << o.detail;
        out << '\n' << notes.str();
        out.unsetf(std::ios::floatfield);
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

} // namespace monoapprox::cli
