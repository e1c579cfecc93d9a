#include <algorithm>
#include <bit>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

#include "monoapprox/approx_det.hpp"
#include "monoapprox/cli/cli.hpp"
#include "monoapprox/detail/numeric.hpp"
#include "monoapprox/functions.hpp"
#include "monoapprox/metrics.hpp"

namespace monoapprox::cli {

namespace {

FamilySpec family_spec(const ExperimentConfig& c, const char* fallback = nullptr)
{
    if (c.family.empty()) {
        if (fallback == nullptr)
            throw UsageError("--family is required");
        return parse_family(fallback);
    }
    try {
        return parse_family(c.family);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

Family instantiate(const FamilySpec& spec, unsigned d, std::uint64_t seed)
{
    try {
        return make_family(spec, d, seed);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
}

// Runs fn(i) for i < count on a few threads; results are stored by index so
// the output order never depends on scheduling. Rethrows the exception of
// the lowest failing index.
template <typename Result, typename Fn>
std::vector<Result> run_indexed(std::size_t count, Fn&& fn)
{
    std::vector<Result> results(count);
    std::vector<std::exception_ptr> errors(count);
    const std::size_t threads =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    auto work = [&](std::size_t t) {
        for (std::size_t i = t; i < count; i += threads) {
            try {
                results[i] = fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back(work, t);
        for (auto& th : pool)
            th.join();
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return results;
}

struct Measured {
    double error = 0.0;
    double std_error = 0.0;
    bool exact = false;
    std::string engine;
};

bool fits_dyadic(unsigned d, unsigned res, std::uint64_t budget)
{
    return static_cast<std::uint64_t>(res) * d < 63 && (std::uint64_t{1} << (res * d)) <= budget;
}

Measured measure(const Oracle& truth, const Oracle& model, unsigned d,
                 std::optional<unsigned> common_resolution, std::uint64_t budget,
                 std::uint64_t probes, std::uint64_t probe_seed)
{
    if (common_resolution && fits_dyadic(d, *common_resolution, budget)) {
        const ErrorEstimate e = l1_exact_dyadic(truth, model, d, *common_resolution, budget);
        return {e.value, 0.0, true, ""};
    }
    const ErrorEstimate e = l1_mc(truth, model, d, probes, probe_seed);
    return {e.value, e.std_error, false, ""};
}

std::optional<unsigned> log2_exact(std::uint64_t m)
{
    if (!std::has_single_bit(m))
        return std::nullopt;
    return static_cast<unsigned>(std::countr_zero(m));
}

Measured measure_grid(const Family& truth, const GridModel& model, const ExperimentConfig& c,
                      std::uint64_t probe_seed, bool quadrature_fallback)
{
    const unsigned d = model.d();
    const std::uint64_t m = model.m();
    const Oracle g = [&model](PointView x) { return eval_grid(model, x); };
    if (auto lm = log2_exact(m); lm && truth.constant_resolution) {
        const unsigned res = std::max(*lm, *truth.constant_resolution);
        if (fits_dyadic(d, res, c.cell_budget()))
            return measure(truth.oracle, g, d, res, c.cell_budget(), c.probes, probe_seed);
    }
    if (quadrature_fallback) {
        // Midpoint rule on a refinement of the grid.
        const double per_axis = std::pow(static_cast<double>(c.cell_budget()), 1.0 / d);
        const auto q = static_cast<std::uint64_t>(
            std::clamp(std::floor(per_axis / static_cast<double>(m)), 1.0, 16.0));
        const ErrorEstimate e = l1_quadrature(truth.oracle, g, d, m * q, c.cell_budget());
        return {e.value, 0.0, false, "quadrature"};
    }
    return measure(truth.oracle, g, d, std::nullopt, c.cell_budget(), c.probes, probe_seed);
}

std::uint64_t to_sample_count(double n)
{
    if (!(n >= 1.0) || n >= 0x1p64)
        throw ResourceError("sample count " + format_real(n) + " is not representable");
    return static_cast<std::uint64_t>(n);
}

McParams mc_params(const ExperimentConfig& c)
{
    McParams p;
    if (c.eps) {
        try {
            p = choose_params(*c.eps, c.d);
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    } else if (!(c.k && c.r && c.n)) {
        throw UsageError("mc needs --eps, or all of --k, --r and --n");
    }
    p.d = c.d;
    if (c.k)
        p.k = *c.k;
    if (c.r)
        p.r = *c.r;
    if (c.n)
        p.n = static_cast<double>(*c.n);
    if (p.k == 0 || p.k > p.d || p.r == 0 || p.r > kMaxResolution)
        throw UsageError("need 1 <= k <= d and 1 <= r <= 52");
    return p;
}

// Error of one Monte Carlo replication; uses the occupancy reduction when
// the sample count is beyond the budget but the reduction applies.
Measured mc_replication(const Family& truth, const McParams& p, const ExperimentConfig& c,
                        std::uint64_t sample_seed, std::uint64_t probe_seed)
{
    const bool piecewise = truth.constant_resolution && *truth.constant_resolution <= p.r;
    if (p.n <= static_cast<double>(c.sample_budget)) {
        const WaveletModel model = fit(truth.oracle, p.d, p.k, p.r, to_sample_count(p.n),
                                       sample_seed, c.mode, c.sample_budget, c.coefficient_budget);
        const Oracle g = [&model](PointView x) { return model(x); };
        Measured m = measure(truth.oracle, g, p.d, piecewise ? std::optional(p.r) : std::nullopt,
                             c.cell_budget(), c.probes, probe_seed);
        m.engine = "samples";
        return m;
    }
    if (p.k == p.d && c.mode != Mode::linear && piecewise) {
        const OccupancyError e =
            full_resolution_error(truth.oracle, p.d, *truth.constant_resolution, p.r,
                                  to_sample_count(p.n), sample_seed, c.mode, c.cell_budget());
        return {e.l1_error, 0.0, true, "occupancy"};
    }
    throw ResourceError("n = " + format_real(p.n) + " exceeds the sample budget " +
                        std::to_string(c.sample_budget) +
                        " and the occupancy reduction needs k = d, a non-linear mode and a "
                        "truth constant on dyadic cells of resolution <= r");
}

nlohmann::json ub_json(const UbErrorTerms& t)
{
    return {{"resolution_term", t.resolution},
            {"truncation_term", t.truncation},
            {"sampling_term", t.sampling},
            {"total", t.total}};
}

std::pair<double, double> mean_and_se(const std::vector<Measured>& v)
{
    double mean = 0.0;
    for (const auto& x : v)
        mean += x.error;
    mean /= static_cast<double>(v.size());
    if (v.size() == 1)
        return {mean, v[0].std_error};
    double ss = 0.0;
    for (const auto& x : v)
        ss += (x.error - mean) * (x.error - mean);
    return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
}

} // namespace

Report cmd_approximate(const ExperimentConfig& c)
{
    const FamilySpec spec = family_spec(c);
    Report rep;
    rep.command = "approximate";
    const std::size_t R = c.replications;

    if (c.algo == "det") {
        const double bound = grid_error_bound(c.d, c.m);
        rep.table.columns = {"replication", "m", "n", "error", "std_error", "exact", "bound",
                             "monotone"};
        struct Out {
            Measured m;
            bool monotone = true;
            std::uint64_t n = 0;
        };
        auto outs = run_indexed<Out>(R, [&](std::size_t i) {
            const Family truth = instantiate(spec, c.d, derive_seed(c.seed, 2 * i));
            const GridModel model = fit_grid(truth.oracle, c.d, c.m, c.cell_budget());
            return Out{measure_grid(truth, model, c, derive_seed(c.seed, 2 * i + 1), false),
                       model.monotone(), model.lattice_values().size()};
        });
        std::vector<Measured> ms;
        for (std::size_t i = 0; i < R; ++i) {
            const auto& o = outs[i];
            rep.table.rows.push_back({static_cast<std::uint64_t>(i), c.m, o.n, o.m.error,
                                      o.m.std_error, o.m.exact, bound, o.monotone});
            if (!o.monotone)
                rep.warnings.push_back("replication " + std::to_string(i) +
                                       ": truth is not monotone on the lattice");
            ms.push_back(o.m);
        }
        const auto [mean, se] = mean_and_se(ms);
        rep.summary = {{"algorithm", "grid"},
                       {"family", format_family(spec)},
                       {"mean_error", mean},
                       {"std_error", se},
                       {"bound", bound},
                       {"within_bound", mean <= bound},
                       {"cardinality", outs.front().n}};
        return rep;
    }

    const McParams p = mc_params(c);
    const UbErrorTerms ub = ub_error_terms(p);
    rep.table.columns = {"replication", "engine", "d", "k", "r", "n", "error", "std_error",
                         "exact", "bound"};
    auto ms = run_indexed<Measured>(R, [&](std::size_t i) {
        const Family truth = instantiate(spec, c.d, derive_seed(c.seed, 2 * i));
        const std::uint64_t sample_seed = derive_seed(c.seed, 2 * i + 1);
        return mc_replication(truth, p, c, sample_seed, detail::splitmix64(sample_seed));
    });
    for (std::size_t i = 0; i < R; ++i)
        rep.table.rows.push_back({static_cast<std::uint64_t>(i), ms[i].engine,
                                  static_cast<std::uint64_t>(p.d), static_cast<std::uint64_t>(p.k),
                                  static_cast<std::uint64_t>(p.r), p.n, ms[i].error,
                                  ms[i].std_error, ms[i].exact, ub.total});
    const auto [mean, se] = mean_and_se(ms);
    rep.summary = {{"algorithm", std::string("wavelet_") + std::string(to_string(c.mode))},
                   {"family", format_family(spec)},
                   {"d", p.d},
                   {"k", p.k},
                   {"r", p.r},
                   {"n", p.n},
                   {"mean_error", mean},
                   {"std_error", se},
                   {"bound", ub_json(ub)},
                   {"within_bound", mean <= ub.total}};
    return rep;
}

Report cmd_convergence(const ExperimentConfig& c)
{
    const FamilySpec spec = family_spec(c, "sum");
    Report rep;
    rep.command = "convergence";
    const Family truth = instantiate(spec, c.d, derive_seed(c.seed, 0));
    std::vector<std::pair<double, double>> points;

    if (c.algo == "det") {
        std::vector<std::uint64_t> ms = c.m_values;
        if (ms.empty())
            ms = {8, 16, 32, 64, 128};
        rep.table.columns = {"point", "m", "n", "error", "std_error", "bound"};
        for (std::size_t i = 0; i < ms.size(); ++i) {
            const GridModel model = fit_grid(truth.oracle, c.d, ms[i], c.cell_budget());
            if (!model.monotone())
                rep.warnings.push_back("m = " + std::to_string(ms[i]) +
                                       ": truth is not monotone on the lattice");
            const Measured e = measure_grid(truth, model, c, derive_seed(c.seed, 1), true);
            const auto n = static_cast<std::uint64_t>(model.lattice_values().size());
            rep.table.rows.push_back({std::to_string(i), ms[i], n, e.error, e.std_error,
                                      grid_error_bound(c.d, ms[i])});
            points.emplace_back(static_cast<double>(n), e.error);
        }
    } else {
        std::vector<std::uint64_t> ns = c.n_values;
        if (ns.empty())
            ns = {256, 1024, 4096, 16384, 65536};
        McParams p;
        p.d = c.d;
        p.k = c.k.value_or(c.d);
        p.r = c.r ? *c.r : (c.eps ? choose_params(*c.eps, c.d).r : 4);
        if (p.k == 0 || p.k > p.d)
            throw UsageError("need 1 <= k <= d");
        rep.table.columns = {"point", "k", "r", "n", "error", "std_error", "bound"};
        for (std::size_t i = 0; i < ns.size(); ++i) {
            p.n = static_cast<double>(ns[i]);
            auto reps = run_indexed<Measured>(c.replications, [&](std::size_t j) {
                const std::uint64_t s = derive_seed(c.seed, 2 * j + 1);
                return mc_replication(truth, p, c, s, detail::splitmix64(s));
            });
            const auto [mean, se] = mean_and_se(reps);
            rep.table.rows.push_back({std::to_string(i), static_cast<std::uint64_t>(p.k),
                                      static_cast<std::uint64_t>(p.r), ns[i], mean, se,
                                      ub_error(p)});
            points.emplace_back(static_cast<double>(ns[i]), mean);
        }
    }
    std::optional<double> slope;
    try {
        slope = fit_rate(points);
    } catch (const DomainError& e) {
        rep.warnings.push_back(std::string("slope not fitted: ") + e.what());
    }
    std::vector<Cell> footer(rep.table.columns.size());
    footer[0] = std::string("fit_slope");
    footer[rep.table.columns.size() - 3] = slope ? Cell(*slope) : Cell();
    rep.table.rows.push_back(std::move(footer));
    rep.summary = {{"family", format_family(spec)},
                   {"algorithm", c.algo},
                   {"fit_slope", slope ? nlohmann::json(*slope) : nlohmann::json()},
                   {"expected_slope", -1.0 / c.d}};
    return rep;
}

Report cmd_bounds(const ExperimentConfig& c)
{
    Report rep;
    rep.command = "bounds";
    std::vector<double> epss = c.eps_values;
    if (epss.empty())
        epss = {1.0 / 15.0, 0.1, 0.25, 0.5, 0.75};
    std::vector<unsigned> ds = c.d_values;
    if (ds.empty())
        ds = {1, 10, 100, 400};
    LbParams lb = LbParams::reference();
    lb.c0 = c.c0;

    rep.table.columns = {"eps",           "d",          "upper_C",      "upper_log_first",
                         "upper_log_second", "upper_log", "upper",      "det_curse",
                         "lower_valid",   "lower_fallback", "lower_tau", "lower",
                         "lower_sharp",   "choose_r",   "choose_k",     "choose_n"};
    bool certificate_ok = true;
    try {
        (void)lb_curve(lb, lb.eps0, lb.d0);
    } catch (const DomainError& e) {
        certificate_ok = false;
        rep.warnings.push_back(std::string("lower bound unavailable: ") + e.what());
    }
    for (double eps : epss) {
        for (unsigned d : ds) {
            std::vector<Cell> row(rep.table.columns.size());
            row[0] = eps;
            row[1] = static_cast<std::uint64_t>(d);
            if (eps > 0.0 && eps < 1.0 && d >= 1) {
                const NRanUpper u = n_ran_upper(eps, d, c.det_branch, c.upper_constant);
                row[2] = u.C;
                row[3] = u.log_first;
                row[4] = u.log_second;
                row[5] = u.log_value;
                row[6] = u.value;
                const McParams p = choose_params(eps, d);
                row[13] = static_cast<std::uint64_t>(p.r);
                row[14] = static_cast<std::uint64_t>(p.k);
                row[15] = p.n;
            }
            if (eps > 0.0 && eps <= 0.5)
                row[7] = n_det_curse(eps, d);
            if (certificate_ok) {
                const LbCurve l = lb_curve(lb, eps, d);
                row[8] = l.valid;
                if (l.valid) {
                    row[9] = l.fallback;
                    row[10] = l.tau;
                    row[11] = l.n_lower;
                    row[12] = l.n_sharp;
                }
            }
            rep.table.rows.push_back(std::move(row));
        }
    }
    nlohmann::json cert;
    try {
        const EpsHatComponents e = lb_epshat(lb, lb.d0, lb.alpha0, lb.beta0, lb.tau0);
        cert = {{"C_ab", e.C_ab},   {"r0", e.r0},         {"kappa_tau", e.kappa_tau},
                {"C_abt", e.C_abt}, {"C1", e.C1},         {"kappa_at", e.kappa_at},
                {"K", e.K},         {"sigma", e.sigma},   {"r1", e.r1},
                {"r_B", e.r_B},     {"gamma", e.gamma},   {"kappa_rg", e.kappa_rg},
                {"q0", e.q0},       {"q_lambda", e.q_lambda}, {"q", e.q},
                {"eps_hat", e.eps_hat}};
    } catch (const DomainError& e) {
        cert = {{"error", e.what()}};
    }
    rep.summary = {{"upper_constant", c.upper_constant.value_or(calibrated_upper_constant())},
                   {"upper_constant_calibrated", !c.upper_constant.has_value()},
                   {"det_branch", std::string(to_string(c.det_branch))},
                   {"lower_parameters",
                    {{"alpha0", lb.alpha0}, {"beta0", lb.beta0}, {"tau0", lb.tau0},
                     {"lambda", lb.lambda_mass}, {"nu", lb.nu}, {"rho", lb.rho},
                     {"c0", lb.c0}, {"d0", lb.d0}, {"n0", lb.n0}, {"eps0", lb.eps0},
                     {"rate", lb.rate}}},
                   {"certificate", cert}};
    return rep;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    if (args.size() < 2 || std::any_of(args.begin() + 1, args.end(), [](const std::string& a) {
            return a == "-h" || a == "--help";
        })) {
        out << help_text();
        return args.size() < 2 ? kExitUsage : kExitOk;
    }
    ExperimentConfig config;
    try {
        config = parse_command_line(args);
        if (config.subcommand == "verify") {
            const auto outcomes = cmd_verify(config, out);
            for (const auto& o : outcomes) {
                if (!o.passed) {
                    err << "first failure: " << o.name << ": " << o.detail << '\n';
                    return kExitFailed;
                }
            }
            return kExitOk;
        }
        Report report;
        if (config.subcommand == "approximate")
            report = cmd_approximate(config);
        else if (config.subcommand == "convergence")
            report = cmd_convergence(config);
        else
            report = cmd_bounds(config);
        for (const auto& w : report.warnings)
            err << "warning: " << w << '\n';

        std::ofstream file;
        if (!config.out.empty()) {
            file.open(config.out, std::ios::binary);
            if (!file)
                throw std::runtime_error("cannot open output file '" + config.out + "'");
        }
        std::ostream& dest = config.out.empty() ? out : file;
        if (config.format == "json")
            write_json(report, config, dest);
        else
            write_csv(report, dest);
        return kExitOk;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n(run with --help for options)\n";
        return kExitUsage;
    } catch (const ResourceError& e) {
        err << "budget exceeded: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

} // namespace monoapprox::cli
