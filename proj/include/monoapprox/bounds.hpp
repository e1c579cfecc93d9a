#ifndef MONOAPPROX_BOUNDS_HPP
#define MONOAPPROX_BOUNDS_HPP

// Closed-form error and complexity bounds: the Monte Carlo error bound and
// its parameter choice, the combined randomized upper bound, the
// deterministic curse bound, and the lower-bound certificate eps_hat with
// its scaling to a curve n_lower(eps, d).

#include <optional>
#include <string_view>

namespace monoapprox {

struct McParams {
    unsigned d = 1;
    unsigned k = 1;
    unsigned r = 1;
    /// Sample count; may exceed 2^64 and may be +infinity in ub_error.
    double n = 1.0;
    double eps = 0.5;
};

struct UbErrorTerms {
    double resolution = 0.0; ///< 5 d / 2^r
    double truncation = 0.0; ///< 4 sqrt(d r) / (k + 1)
    double sampling = 0.0;   ///< 4 exp(k (1 + log(d/k) + r log 2)) / n
    double total = 0.0;
};

/// Throws DomainError unless 1 <= k <= d, r >= 1 and n > 0.
UbErrorTerms ub_error_terms(const McParams& p);
double ub_error(const McParams& p);

/// r = ceil(log2(15 d / eps)), k = min(floor(12 sqrt(d r) / eps), d),
/// n = ceil((12 / eps) exp(k (1 + log(d/k) + r log 2))).
McParams choose_params(double eps, unsigned d);

/// log of the n chosen by choose_params, without overflow.
double log_n_choose(double eps, unsigned d);

/// Which form of the deterministic branch of the combined upper bound to
/// use: exp(d log(d / (2 eps))) (halved) or exp(d log(d / eps)) (plain).
enum class DetBranch { halved, plain };
DetBranch parse_det_branch(std::string_view text);
std::string_view to_string(DetBranch b);

struct NRanUpper {
    double C = 0.0;
    double log_first = 0.0;  ///< C sqrt(d)/eps (1 + log(d/eps))^{3/2}
    double log_second = 0.0; ///< d log(d/(2 eps)) or d log(d/eps)
    double first = 0.0;
    double second = 0.0;
    double value = 0.0; ///< min(first, second); may be +infinity
    double log_value = 0.0;
    DetBranch branch = DetBranch::halved;
};

/// Smallest C with log n_choose(eps, d) <= C sqrt(d)/eps (1 + log(d/eps))^{3/2}
/// for d in 1..10 and eps in {0.1, ..., 0.9}.
double calibrated_upper_constant();

/// min{exp[C sqrt(d)/eps (1 + log(d/eps))^{3/2}], exp[d log(d/(2 eps))]}.
/// C defaults to calibrated_upper_constant(). Throws DomainError unless
/// 0 < eps < 1 and d >= 1.
NRanUpper n_ran_upper(double eps, unsigned d, DetBranch branch = DetBranch::halved,
                      std::optional<double> C = std::nullopt);

/// 2^{d-1} for 0 < eps <= 1/2; DomainError otherwise.
double n_det_curse(double eps, unsigned d);

/// Standard normal CDF via erfc.
double normal_cdf(double x);

/// Constants of the lower-bound certificate.
struct LbParams {
    double alpha0 = 0.0;
    double beta0 = 0.0;
    double tau0 = 0.0;
    double lambda_mass = 0.0;
    double nu = 0.0;
    double rho = 0.0;
    double c0 = 0.4748; ///< Berry-Esseen constant; 0.409732 is the sharper C_E
    unsigned d0 = 1;
    /// Cardinality n0 = nu 2^{tau0 sqrt(d0)} at which the certificate is issued.
    double n0 = 1.0;
    /// Error level the certificate must exceed at d0.
    double eps0 = 0.0;
    /// Exponential rate used in the stated curve n0 exp(rate (sqrt(d') - sqrt(d0))).
    double rate = 1.0;

    /// alpha0 = -0.33794, beta0 = 0.46332, tau0 = 1.47566, lambda = 0.77399,
    /// rho = 0.25960, d0 = 100, n0 = 108, nu = 108 2^{-10 tau0}, eps0 = 1/15.
    static LbParams reference();
};

struct EpsHatComponents {
    double C_ab = 0.0;      ///< Phi(beta) - Phi(alpha)
    double r0 = 0.0;        ///< C_ab - 2 C0 / sqrt(d)
    double kappa_tau = 0.0; ///< (1 - tau/sqrt(d) - 1/d)^{-1/2}
    double C_abt = 0.0;     ///< Phi(beta - tau) - Phi(alpha - tau)
    double C1 = 0.0;        ///< 1/sqrt(2 pi) + 2 C0
    double kappa_at = 0.0;  ///< (1 + (alpha - 2 tau)/sqrt(d))^{-1}
    double K = 0.0;         ///< (beta - alpha)/(sqrt(d) + alpha - 2 tau)
    double sigma = 0.0;     ///< exp((beta - alpha) tau kappa_at + K)
    double r1 = 0.0;        ///< (sigma/(1-lambda) + 1)(C_abt + C1/sqrt(d)) kappa_tau
    double r_B = 0.0;       ///< r0 - nu r1
    double gamma = 0.0;     ///< ((sqrt(d) + alpha)/(2 (tau + 1/sqrt(d))))^{tau sqrt(d)}
    double kappa_rg = 0.0;  ///< 1/2 + 1/(2 (1 - rho/gamma))
    double q0 = 0.0;        ///< exp(-rho sigma kappa_rg)
    double q_lambda = 0.0;  ///< 1 - exp(-rho lambda)
    double q = 0.0;         ///< min(q_lambda, q0)
    double eps_hat = 0.0;   ///< 2 r_B q
};

/// The lower-bound certificate at (d, alpha, beta, tau). Throws DomainError
/// if a precondition fails (beta - alpha >= 2/sqrt(d), alpha - 2 tau >=
/// -sqrt(d) + 2/sqrt(d), tau < sqrt(d) - 1/sqrt(d), 0 < lambda < 1,
/// nu >= 0, rho > 0) or if rho >= gamma. A nonpositive r_B is returned as is.
EpsHatComponents lb_epshat(const LbParams& p, double d, double alpha, double beta, double tau);

struct LbCurve {
    bool valid = false;
    /// True when eps < eps0 sqrt(d0/d) and the bound at the smallest covered
    /// eps is reused (n is nonincreasing in eps).
    bool fallback = false;
    double tau = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    /// n0 exp(rate (tau/tau0 sqrt(d) - sqrt(d0))).
    double n_lower = 0.0;
    /// nu 2^{tau sqrt(d)}.
    double n_sharp = 0.0;
};

/// Lower bound on n(eps, d) from the certificate at d0, with tau = tau0
/// eps0/eps, alpha = alpha0 tau0/tau, beta = beta0 tau0/tau. Invalid (valid =
/// false) for d < d0, eps > eps0 or eps <= 0. Throws DomainError if the
/// certificate lb_epshat(p, d0, alpha0, beta0, tau0) does not exceed eps0 or
/// if beta0 <= tau0, -tau0 <= alpha0 <= 0 fails.
LbCurve lb_curve(const LbParams& p, double eps, unsigned d);

struct LbSearchResult {
    double alpha = 0.0;
    double beta = 0.0;
    double tau = 0.0;
    EpsHatComponents components;
};

/// Largest eps_hat over an (alpha, beta, tau) grid with `steps` points per
/// axis on [-tau, 0] x [0, tau] x [tau_lo, tau_hi]; infeasible points are
/// skipped. Plumbing only; no optimality claim.
LbSearchResult lb_grid_search(const LbParams& p, double d, double tau_lo, double tau_hi,
                              unsigned steps);

} // namespace monoapprox

#endif
