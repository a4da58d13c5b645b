#include "chicglm/evidence.hpp"

#include <cmath>
#include <limits>

#include "chicglm/errors.hpp"

namespace chicglm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int effective_p(const FitStats& s) { return s.rank; }

void require_usable(const FitStats& s, const char* what) {
  if (s.separation == Separation::complete)
    throw numeric_error(std::string(what) + ": complete separation invalidates the evidence");
  if (!s.converged && s.separation == Separation::none)
    throw validation_error(std::string(what) + ": fit did not converge");
}

// log of the integral of u^{t + extra - 1} (1-vu)^{q-1} e^{-su/2}
// [kappa + (1-kappa)vu]^{-r} (A + Bu)^{-power} over (0, 1/v]
double log_u_kernel_integral(const TcchParams& p, double extra, double A, double B,
                             double power, double rel_tol) {
  const double t = 0.5 * p.a + extra, q = 0.5 * p.b;
  const double sigma = 0.5 * p.s / p.v;
  const double r = p.r, kap = p.kappa, v = p.v;
  auto h = [=](double log_x, double) {
    const double x = std::exp(log_x);
    double val = -sigma * x - power * std::log(A + (B / v) * x);
    if (r != 0.0) val -= r * std::log(kap + (1.0 - kap) * x);
    return val;
  };
  return -t * std::log(v) + sf::log_integrate_beta_kernel(t, q, h, rel_tol);
}

}  // namespace

FitStats to_stats(const GlmFit& fit) {
  FitStats s;
  s.model = fit.model;
  s.n = static_cast<int>(fit.eta_hat.size());
  s.p_m = fit.model.size();
  s.rank = fit.rank;
  s.z = fit.deviance_z;
  s.q = fit.wald_q;
  s.log_j_alpha = fit.j_alpha > 0.0 ? std::log(fit.j_alpha) : -kInf;
  s.loglik = fit.loglik;
  s.residual_deviance = fit.residual_deviance;
  s.converged = fit.converged;
  s.used_generalized_inverse = fit.used_generalized_inverse;
  s.separation = fit.separation;
  return s;
}

double log_bf_fixed_g(const FitStats& stats, const FitStats& null_stats, double g) {
  if (!(g >= 0.0)) throw validation_error("log_bf_fixed_g: g must be >= 0");
  require_usable(stats, "log_bf_fixed_g");
  if (stats.model.is_null()) return 0.0;
  const int P = effective_p(stats);
  return 0.5 * stats.z + 0.5 * (null_stats.log_j_alpha - stats.log_j_alpha) -
         0.5 * P * std::log1p(g) - 0.5 * stats.q / (1.0 + g);
}

double log_tbf(double deviance_z, int p_m, double g) {
  if (!(deviance_z >= 0.0)) throw validation_error("log_tbf: deviance must be >= 0");
  if (!(g >= 0.0)) throw validation_error("log_tbf: g must be >= 0");
  return -0.5 * p_m * std::log1p(g) + 0.5 * g * deviance_z / (1.0 + g);
}

double local_eb_g(double wald_q, int p_m) {
  if (p_m <= 0) return 0.0;
  return std::max(wald_q / p_m - 1.0, 0.0);
}

Evidence local_eb_evidence(const FitStats& stats, const FitStats& null_stats) {
  Evidence ev;
  ev.model = stats.model;
  ev.method = HyperRule::local_eb();
  ev.used_generalized_inverse = stats.used_generalized_inverse;
  ev.separation_quasi = stats.separation == Separation::quasi;
  const double ghat = local_eb_g(stats.q, effective_p(stats));
  ev.log_bf_vs_null = log_bf_fixed_g(stats, null_stats, ghat);
  return ev;
}

Evidence log_bf_tcch(const FitStats& stats, const FitStats& null_stats,
                     const TcchParams& prior, bool improper,
                     const sf::EvalStrategy& strategy) {
  validate_tcch(prior, improper);
  Evidence ev;
  ev.model = stats.model;
  ev.used_generalized_inverse = stats.used_generalized_inverse;
  ev.separation_quasi = stats.separation == Separation::quasi;
  ev.improper_reference = improper;
  if (stats.model.is_null()) return ev;
  require_usable(stats, "log_bf_tcch");

  const int P = effective_p(stats);
  const TcchParams post = posterior_update(prior, P, stats.q);
  ev.u_posterior = post;

  auto bf_with = [&](const sf::EvalStrategy& strat) {
    double val = 0.5 * stats.z + 0.5 * (null_stats.log_j_alpha - stats.log_j_alpha) +
                 tcch_log_normalizer(post, strat);
    if (!improper) val -= tcch_log_normalizer(prior, strat);
    return val;
  };
  ev.log_bf_vs_null = bf_with(strategy);

  // dual-route check on genuine Phi1 evaluations (kappa != 1); the reduced
  // kappa = 1 cases collapse to one-argument series with their own coverage
  if (prior.kappa != 1.0) {
    const sf::EvalStrategy other =
        strategy.backend == sf::EvalStrategy::Backend::series
            ? sf::EvalStrategy::quadrature(strategy.rel_tol)
            : sf::EvalStrategy::series(strategy.rel_tol);
    try {
      const double alt = bf_with(other);
      const double scale = std::max(1.0, std::abs(ev.log_bf_vs_null));
      if (std::abs(alt - ev.log_bf_vs_null) > 1e-6 * scale) ev.numeric_warning = true;
    } catch (const numeric_error&) {
      // the alternate backend has no result to compare against
    }
  }
  return ev;
}

double ic_score(const FitStats& stats, RuleKind variant, int n) {
  const double k = stats.p_m + 1.0;
  switch (variant) {
    case RuleKind::aic:
      return -2.0 * stats.loglik + 2.0 * k;
    case RuleKind::bic:
      return -2.0 * stats.loglik + k * std::log(static_cast<double>(n));
    default:
      throw validation_error("ic_score supports aic and bic only");
  }
}

double gaussian_r2(const FitStats& stats) {
  if (stats.n <= 0) throw validation_error("gaussian_r2: stats lack n");
  return 1.0 - std::exp(-stats.z / stats.n);
}

double log_bf_gaussian_fixed_g(double r2, int n, int p_m, double g) {
  if (!(r2 >= 0.0) || r2 > 1.0) throw validation_error("R^2 must lie in [0, 1]");
  if (!(g >= 0.0)) throw validation_error("g must be >= 0");
  if (p_m == 0) return 0.0;
  if (r2 == 1.0) return kInf;
  return 0.5 * (n - p_m - 1.0) * std::log1p(g) - 0.5 * (n - 1.0) * std::log1p(g * (1.0 - r2));
}

namespace {

// numerator of the exact unknown-variance marginal: the tCCH kernel with a
// shifted by p and the extra factor [(1-R^2) + R^2 u]^{-(n-1)/2}
double gaussian_log_num(double r2, int n, int p, const TcchParams& pr,
                        const sf::EvalStrategy& strategy) {
  const double ap = pr.a + p;
  const double q = 0.5 * pr.b;
  const double sigma = 0.5 * pr.s / pr.v;
  const double half_nm1 = 0.5 * (n - 1.0);
  if (pr.r == 0.0 || pr.kappa == 1.0) {
    const double y = r2 / (pr.v - (pr.v - 1.0) * r2);
    const sf::LogValue phi =
        sf::log_humbert_phi1(q, half_nm1, 0.5 * (ap + pr.b), sigma, y, strategy);
    if (phi.sign <= 0) throw numeric_error("gaussian marginal: Phi1 not positive");
    return -0.5 * ap * std::log(pr.v) - sigma -
           half_nm1 * std::log1p(-(1.0 - 1.0 / pr.v) * r2) + sf::lbeta(0.5 * ap, q) +
           phi.log_magnitude;
  }
  if (pr.s == 0.0) {
    const double x = 1.0 - pr.kappa;
    const double y = 1.0 - pr.kappa - r2 * pr.kappa / ((1.0 - r2) * pr.v);
    const sf::LogValue f1 =
        sf::log_appell_f1(0.5 * ap, 0.5 * (ap + pr.b + 1.0 - n - 2.0 * pr.r), half_nm1,
                          0.5 * (ap + pr.b), x, y, strategy);
    if (f1.sign <= 0) throw numeric_error("gaussian marginal: F1 not positive");
    return 0.5 * (ap - 2.0 * pr.r) * std::log(pr.kappa) - 0.5 * ap * std::log(pr.v) -
           half_nm1 * std::log1p(-r2) + sf::lbeta(0.5 * ap, q) + f1.log_magnitude;
  }
  const double rel = std::max(strategy.rel_tol * 1e-2, 1e-14);
  return log_u_kernel_integral(pr, 0.5 * p, 1.0 - r2, r2, half_nm1, rel);
}

}  // namespace

double log_bf_gaussian_tcch(double r2, int n, int p_m, const TcchParams& prior,
                            bool improper, const sf::EvalStrategy& strategy) {
  validate_tcch(prior, improper);
  if (!(r2 >= 0.0) || r2 > 1.0) throw validation_error("R^2 must lie in [0, 1]");
  if (p_m == 0) return 0.0;
  if (n <= p_m + 1) throw validation_error("unknown-variance marginal needs n > p_m + 1");
  // a perfect fit sends the marginal to +inf for every mixing prior here
  if (r2 == 1.0) return kInf;
  double val = gaussian_log_num(r2, n, p_m, prior, strategy);
  if (!improper) val -= tcch_log_normalizer(prior, strategy);
  return val;
}

double gaussian_posterior_u_mean(double r2, int n, int p_m, const TcchParams& prior) {
  validate_tcch(prior, true);
  const double half_nm1 = 0.5 * (n - 1.0);
  const double den = log_u_kernel_integral(prior, 0.5 * p_m, 1.0 - r2, r2, half_nm1, 1e-12);
  const double num =
      log_u_kernel_integral(prior, 0.5 * p_m + 1.0, 1.0 - r2, r2, half_nm1, 1e-12);
  return std::exp(num - den);
}

double log_marglik_overdispersed(const FitStats& stats, double u) {
  if (!(u > 0.0)) throw validation_error("overdispersed marginal needs u > 0");
  if (!(stats.residual_deviance > 0.0))
    throw numeric_error("overdispersed marginal is unbounded: saturated fit has zero deviance");
  const int P = effective_p(stats);
  return -0.5 * stats.log_j_alpha + 0.5 * P * std::log(u) -
         0.5 * (stats.n - 1.0) * std::log(u * stats.q + stats.residual_deviance);
}

double log_bf_overdispersed_tcch(const FitStats& stats, const FitStats& null_stats,
                                 const TcchParams& prior,
                                 const sf::EvalStrategy& strategy) {
  validate_tcch(prior);
  if (stats.model.is_null()) return 0.0;
  require_usable(stats, "log_bf_overdispersed_tcch");
  if (!(stats.residual_deviance > 0.0) || !(null_stats.residual_deviance > 0.0))
    throw numeric_error("overdispersed evidence is unbounded: zero residual deviance");
  const int P = effective_p(stats);
  const double rel = std::max(strategy.rel_tol * 1e-2, 1e-14);
  const double num = log_u_kernel_integral(prior, 0.5 * P, stats.residual_deviance, stats.q,
                                           0.5 * (stats.n - 1.0), rel);
  return 0.5 * (null_stats.log_j_alpha - stats.log_j_alpha) +
         0.5 * (stats.n - 1.0) * std::log(null_stats.residual_deviance) + num -
         tcch_log_normalizer(prior, strategy);
}

Evidence evidence_for(const HyperRule& rule, const Family& family, const FitStats& stats,
                      const FitStats& null_stats, int p_total,
                      const sf::EvalStrategy& strategy) {
  Evidence ev;
  ev.model = stats.model;
  ev.method = rule;
  ev.used_generalized_inverse = stats.used_generalized_inverse;
  ev.separation_quasi = stats.separation == Separation::quasi;

  if (stats.separation == Separation::complete) {
    ev.valid = false;
    ev.log_bf_vs_null = kNaN;
    return ev;
  }
  const int n = stats.n;
  const int P = effective_p(stats);
  const bool exact_gaussian = family.gaussian_unknown_variance();
  ev.laplace = !exact_gaussian;

  if (rule_is_tcch(rule.kind)) {
    const bool improper = rule.kind == RuleKind::jeffreys;
    const TcchParams prior = resolve_prior(rule, n, P, p_total);
    if (exact_gaussian) {
      ev.improper_reference = improper;
      if (stats.model.is_null()) return ev;
      const double r2 = gaussian_r2(stats);
      ev.log_bf_vs_null = log_bf_gaussian_tcch(r2, n, P, prior, improper, strategy);
      return ev;
    }
    Evidence tcch = log_bf_tcch(stats, null_stats, prior, improper, strategy);
    tcch.method = rule;
    tcch.laplace = true;
    return tcch;
  }

  switch (rule.kind) {
    case RuleKind::fixed_g: {
      const double g = fixed_g_value(rule, n);
      if (exact_gaussian)
        ev.log_bf_vs_null =
            stats.model.is_null() ? 0.0 : log_bf_gaussian_fixed_g(gaussian_r2(stats), n, P, g);
      else
        ev.log_bf_vs_null = log_bf_fixed_g(stats, null_stats, g);
      return ev;
    }
    case RuleKind::tbf_fixed_g: {
      require_usable(stats, "tbf");
      const double g = fixed_g_value(rule, n);
      ev.log_bf_vs_null = stats.model.is_null() ? 0.0 : log_tbf(stats.z, P, g);
      return ev;
    }
    case RuleKind::local_eb: {
      if (exact_gaussian) {
        if (stats.model.is_null()) return ev;
        const double r2 = gaussian_r2(stats);
        const int df = n - 1 - P;
        if (df <= 0) throw validation_error("local EB needs n > p_m + 1");
        const double f = (r2 / P) / ((1.0 - r2) / df);
        const double ghat = std::max(f - 1.0, 0.0);
        ev.log_bf_vs_null = log_bf_gaussian_fixed_g(r2, n, P, ghat);
        return ev;
      }
      Evidence leb = local_eb_evidence(stats, null_stats);
      leb.method = rule;
      return leb;
    }
    case RuleKind::aic:
    case RuleKind::bic:
      require_usable(stats, "ic");
      ev.log_bf_vs_null =
          -0.5 * (ic_score(stats, rule.kind, n) - ic_score(null_stats, rule.kind, n));
      return ev;
    default:
      throw validation_error("unhandled evidence method: " + rule_name(rule));
  }
}

double method_shrink(const HyperRule& rule, const Evidence& ev, const FitStats& stats,
                     const Family& family, int p_total) {
  if (!ev.valid) throw validation_error("method_shrink: evidence is invalid");
  if (stats.model.is_null()) return 0.0;
  const int n = stats.n;
  const int P = effective_p(stats);
  if (rule_is_tcch(rule.kind)) {
    if (family.gaussian_unknown_variance()) {
      const TcchParams prior = resolve_prior(rule, n, P, p_total);
      return 1.0 - gaussian_posterior_u_mean(gaussian_r2(stats), n, P, prior);
    }
    if (!ev.u_posterior) throw validation_error("method_shrink: missing u posterior");
    return tcch_shrink_mean(*ev.u_posterior);
  }
  switch (rule.kind) {
    case RuleKind::fixed_g:
    case RuleKind::tbf_fixed_g: {
      const double g = fixed_g_value(rule, n);
      return g / (1.0 + g);
    }
    case RuleKind::local_eb: {
      double ghat;
      if (family.gaussian_unknown_variance()) {
        const double r2 = gaussian_r2(stats);
        const int df = n - 1 - P;
        const double f = (r2 / P) / ((1.0 - r2) / df);
        ghat = std::max(f - 1.0, 0.0);
      } else {
        ghat = local_eb_g(stats.q, P);
      }
      return std::isinf(ghat) ? 1.0 : ghat / (1.0 + ghat);
    }
    case RuleKind::aic:
    case RuleKind::bic:
      return 1.0;
    default:
      throw validation_error("method_shrink: unhandled method " + rule_name(rule));
  }
}

}  // namespace chicglm
