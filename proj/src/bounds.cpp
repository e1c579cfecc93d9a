#include "monoapprox/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "monoapprox/common.hpp"

namespace monoapprox {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// k (1 + log(d/k) + r log 2), the log of the analytic index-set bound.
double log_index_bound(unsigned d, unsigned k, unsigned r)
{
    const double kk = k;
    return kk * (1.0 + std::log(d / kk) + r * std::numbers::ln2);
}

void check_eps(double eps, const char* what)
{
    if (!(eps > 0.0 && eps < 1.0))
        throw DomainError(std::string(what) + ": eps must lie in (0,1)");
}

} // namespace

UbErrorTerms ub_error_terms(const McParams& p)
{
    if (p.d == 0 || p.k == 0 || p.k > p.d)
        throw DomainError("ub_error: need 1 <= k <= d");
    if (p.r == 0)
        throw DomainError("ub_error: need r >= 1");
    if (!(p.n > 0.0))
        throw DomainError("ub_error: need n > 0");
    UbErrorTerms t;
    t.resolution = 5.0 * p.d * std::ldexp(1.0, -static_cast<int>(p.r));
    t.truncation = 4.0 * std::sqrt(static_cast<double>(p.d) * p.r) / (p.k + 1.0);
    t.sampling = std::isinf(p.n) ? 0.0 : 4.0 * std::exp(log_index_bound(p.d, p.k, p.r)) / p.n;
    t.total = t.resolution + t.truncation + t.sampling;
    return t;
}

double ub_error(const McParams& p) { return ub_error_terms(p).total; }

McParams choose_params(double eps, unsigned d)
{
    check_eps(eps, "choose_params");
    if (d == 0)
        throw DomainError("choose_params: d must be positive");
    McParams p;
    p.d = d;
    p.eps = eps;
    p.r = static_cast<unsigned>(std::ceil(std::log2(15.0 * d / eps)));
    const double k = std::floor(12.0 * std::sqrt(static_cast<double>(d) * p.r) / eps);
    p.k = static_cast<unsigned>(std::min(k, static_cast<double>(d)));
    p.n = std::ceil(12.0 / eps * std::exp(log_index_bound(d, p.k, p.r)));
    return p;
}

double log_n_choose(double eps, unsigned d)
{
    const McParams p = choose_params(eps, d);
    if (std::isfinite(p.n))
        return std::log(p.n);
    return std::log(12.0 / eps) + log_index_bound(d, p.k, p.r);
}

DetBranch parse_det_branch(std::string_view text)
{
    if (text == "halved")
        return DetBranch::halved;
    if (text == "plain")
        return DetBranch::plain;
    throw DomainError("det-branch must be 'halved' or 'plain'");
}

std::string_view to_string(DetBranch b) { return b == DetBranch::halved ? "halved" : "plain"; }

namespace {

double upper_shape(double eps, unsigned d)
{
    return std::sqrt(static_cast<double>(d)) / eps * std::pow(1.0 + std::log(d / eps), 1.5);
}

} // namespace

double calibrated_upper_constant()
{
    static const double C = [] {
        double c = 0.0;
        for (unsigned d = 1; d <= 10; ++d)
            for (int e = 1; e <= 9; ++e) {
                const double eps = e / 10.0;
                c = std::max(c, log_n_choose(eps, d) / upper_shape(eps, d));
            }
        return c;
    }();
    return C;
}

NRanUpper n_ran_upper(double eps, unsigned d, DetBranch branch, std::optional<double> C)
{
    check_eps(eps, "n_ran_upper");
    if (d == 0)
        throw DomainError("n_ran_upper: d must be positive");
    NRanUpper out;
    out.branch = branch;
    out.C = C.value_or(calibrated_upper_constant());
    if (!(out.C > 0.0))
        throw DomainError("n_ran_upper: C must be positive");
    out.log_first = out.C * upper_shape(eps, d);
    const double denom = branch == DetBranch::halved ? 2.0 * eps : eps;
    out.log_second = d * std::log(d / denom);
    out.first = std::exp(out.log_first);
    out.second = std::exp(out.log_second);
    out.log_value = std::min(out.log_first, out.log_second);
    out.value = std::min(out.first, out.second);
    return out;
}

double n_det_curse(double eps, unsigned d)
{
    if (!(eps > 0.0 && eps <= 0.5))
        throw DomainError("n_det_curse: bound only holds for 0 < eps <= 1/2");
    if (d == 0)
        throw DomainError("n_det_curse: d must be positive");
    return std::ldexp(1.0, static_cast<int>(d) - 1);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

LbParams LbParams::reference()
{
    LbParams p;
    p.alpha0 = -0.33794;
    p.beta0 = 0.46332;
    p.tau0 = 1.47566;
    p.lambda_mass = 0.77399;
    p.rho = 0.25960;
    p.c0 = 0.4748;
    p.d0 = 100;
    p.n0 = 108.0;
    p.nu = p.n0 * std::exp2(-p.tau0 * std::sqrt(static_cast<double>(p.d0)));
    p.eps0 = 1.0 / 15.0;
    p.rate = 1.0;
    return p;
}

EpsHatComponents lb_epshat(const LbParams& p, double d, double alpha, double beta, double tau)
{
    if (!(d >= 1.0))
        throw DomainError("lb_epshat: d must be >= 1");
    const double sd = std::sqrt(d);
    if (!(beta - alpha >= 2.0 / sd))
        throw DomainError("lb_epshat: need beta - alpha >= 2/sqrt(d)");
    if (!(alpha - 2.0 * tau >= -sd + 2.0 / sd))
        throw DomainError("lb_epshat: need alpha - 2 tau >= -sqrt(d) + 2/sqrt(d)");
    if (!(tau > 0.0 && tau < sd - 1.0 / sd))
        throw DomainError("lb_epshat: need 0 < tau < sqrt(d) - 1/sqrt(d)");
    if (!(p.lambda_mass > 0.0 && p.lambda_mass < 1.0))
        throw DomainError("lb_epshat: need 0 < lambda < 1");
    if (!(p.nu >= 0.0))
        throw DomainError("lb_epshat: need nu >= 0");
    if (!(p.rho > 0.0))
        throw DomainError("lb_epshat: need rho > 0");
    if (!(p.c0 > 0.0))
        throw DomainError("lb_epshat: need C0 > 0");

    EpsHatComponents c;
    c.C_ab = normal_cdf(beta) - normal_cdf(alpha);
    c.r0 = c.C_ab - 2.0 * p.c0 / sd;
    c.kappa_tau = 1.0 / std::sqrt(1.0 - tau / sd - 1.0 / d);
    c.C_abt = normal_cdf(beta - tau) - normal_cdf(alpha - tau);
    c.C1 = 1.0 / std::sqrt(2.0 * std::numbers::pi) + 2.0 * p.c0;
    c.kappa_at = 1.0 / (1.0 + (alpha - 2.0 * tau) / sd);
    c.K = (beta - alpha) / (sd + alpha - 2.0 * tau);
    c.sigma = std::exp((beta - alpha) * tau * c.kappa_at + c.K);
    c.r1 = (c.sigma / (1.0 - p.lambda_mass) + 1.0) * (c.C_abt + c.C1 / sd) * c.kappa_tau;
    c.r_B = c.r0 - p.nu * c.r1;
    c.gamma = std::pow((sd + alpha) / (2.0 * (tau + 1.0 / sd)), tau * sd);
    if (!(p.rho < c.gamma))
        throw DomainError("lb_epshat: rho must be below gamma");
    c.kappa_rg = 0.5 + 1.0 / (2.0 * (1.0 - p.rho / c.gamma));
    c.q0 = std::exp(-p.rho * c.sigma * c.kappa_rg);
    c.q_lambda = 1.0 - std::exp(-p.rho * p.lambda_mass);
    c.q = std::min(c.q_lambda, c.q0);
    c.eps_hat = 2.0 * c.r_B * c.q;
    return c;
}

LbCurve lb_curve(const LbParams& p, double eps, unsigned d)
{
    if (!(p.beta0 <= p.tau0 && -p.tau0 <= p.alpha0 && p.alpha0 <= 0.0))
        throw DomainError("lb_curve: need beta0 <= tau0 and -tau0 <= alpha0 <= 0");
    const EpsHatComponents cert = lb_epshat(p, p.d0, p.alpha0, p.beta0, p.tau0);
    if (!(cert.eps_hat > p.eps0))
        throw DomainError("lb_curve: certificate eps_hat(d0) = " + std::to_string(cert.eps_hat) +
                          " does not exceed eps0");

    LbCurve out;
    if (!(eps > 0.0) || eps > p.eps0 || d < p.d0)
        return out;
    const double sd = std::sqrt(static_cast<double>(d));
    const double sd0 = std::sqrt(static_cast<double>(p.d0));
    const double eps_min = p.eps0 * sd0 / sd;
    out.valid = true;
    out.fallback = eps < eps_min;
    const double eps_used = out.fallback ? eps_min : eps;
    out.tau = p.tau0 * p.eps0 / eps_used;
    out.alpha = p.alpha0 * p.tau0 / out.tau;
    out.beta = p.beta0 * p.tau0 / out.tau;
    out.n_lower = p.n0 * std::exp(p.rate * (out.tau / p.tau0 * sd - sd0));
    out.n_sharp = p.nu * std::exp2(out.tau * sd);
    return out;
}

LbSearchResult lb_grid_search(const LbParams& p, double d, double tau_lo, double tau_hi,
                              unsigned steps)
{
    if (steps < 2 || !(tau_lo > 0.0 && tau_hi >= tau_lo))
        throw DomainError("lb_grid_search: need steps >= 2 and 0 < tau_lo <= tau_hi");
    LbSearchResult best;
    best.components.eps_hat = -kInf;
    for (unsigned it = 0; it < steps; ++it) {
        const double tau = tau_lo + (tau_hi - tau_lo) * it / (steps - 1);
        for (unsigned ia = 0; ia < steps; ++ia) {
            const double alpha = -tau + tau * ia / (steps - 1);
            for (unsigned ib = 0; ib < steps; ++ib) {
                const double beta = tau * ib / (steps - 1);
                try {
                    const EpsHatComponents c = lb_epshat(p, d, alpha, beta, tau);
                    if (c.eps_hat > best.components.eps_hat)
                        best = {alpha, beta, tau, c};
                } catch (const DomainError&) {
                }
            }
        }
    }
    if (best.components.eps_hat == -kInf)
        throw DomainError("lb_grid_search: no feasible grid point");
    return best;
}

} // namespace monoapprox
