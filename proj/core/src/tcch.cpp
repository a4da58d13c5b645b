#include "chicglm/tcch.hpp"

#include <cmath>

#include "chicglm/errors.hpp"

namespace chicglm {

void validate_tcch(const TcchParams& p, bool allow_improper) {
  const bool a_ok = allow_improper ? p.a >= 0.0 : p.a > 0.0;
  if (!a_ok || !std::isfinite(p.a)) throw validation_error("tCCH requires a > 0");
  if (!(p.b > 0.0) || !std::isfinite(p.b)) throw validation_error("tCCH requires b > 0");
  if (!(p.v >= 1.0) || !std::isfinite(p.v)) throw validation_error("tCCH requires v >= 1");
  if (!(p.kappa > 0.0) || !std::isfinite(p.kappa))
    throw validation_error("tCCH requires kappa > 0");
  if (!std::isfinite(p.r) || !std::isfinite(p.s))
    throw validation_error("tCCH parameters must be finite");
}

double tcch_log_normalizer(const TcchParams& p, const sf::EvalStrategy& strategy) {
  validate_tcch(p);
  const double t = 0.5 * p.a, q = 0.5 * p.b;
  const double sigma = 0.5 * p.s / p.v;
  const sf::LogValue phi =
      sf::log_humbert_phi1(q, p.r, t + q, sigma, 1.0 - p.kappa, strategy);
  if (phi.sign <= 0)
    throw numeric_error("tCCH normalizer is not positive; parameters out of range");
  return -t * std::log(p.v) - sigma + sf::lbeta(t, q) + phi.log_magnitude;
}

double tcch_log_pdf(double u, const TcchParams& p, const sf::EvalStrategy& strategy) {
  validate_tcch(p);
  if (!(u > 0.0) || u > 1.0 / p.v) return -std::numeric_limits<double>::infinity();
  const double t = 0.5 * p.a, q = 0.5 * p.b;
  const double vu = p.v * u;
  double log_kernel = (t - 1.0) * std::log(u) - 0.5 * p.s * u -
                      p.r * std::log(p.kappa + (1.0 - p.kappa) * vu);
  if (q != 1.0) log_kernel += (q - 1.0) * std::log1p(-vu);
  return log_kernel - tcch_log_normalizer(p, strategy);
}

TcchParams posterior_update(const TcchParams& p, int p_m, double wald_q) {
  if (p_m < 0) throw validation_error("posterior_update: negative model size");
  if (!(wald_q >= 0.0)) throw validation_error("posterior_update: wald_q must be >= 0");
  TcchParams out = p;
  out.a = p.a + p_m;
  out.s = p.s + wald_q;
  return out;
}

double tcch_u_moment(const TcchParams& p, int k, const sf::EvalStrategy& strategy) {
  validate_tcch(p);
  if (k != 1 && k != 2) throw validation_error("tcch_u_moment supports k in {1, 2}");
  const double t = 0.5 * p.a, q = 0.5 * p.b;
  const double sigma = 0.5 * p.s / p.v;
  const sf::LogValue num =
      sf::log_humbert_phi1(q, p.r, t + q + k, sigma, 1.0 - p.kappa, strategy);
  const sf::LogValue den =
      sf::log_humbert_phi1(q, p.r, t + q, sigma, 1.0 - p.kappa, strategy);
  if (num.sign <= 0 || den.sign <= 0)
    throw numeric_error("tCCH moment normalizers must be positive");
  const double log_moment = -k * std::log(p.v) + sf::lbeta(t + k, q) - sf::lbeta(t, q) +
                            num.log_magnitude - den.log_magnitude;
  return std::exp(log_moment);
}

double tcch_u_variance(const TcchParams& p, const sf::EvalStrategy& strategy) {
  const double m1 = tcch_u_moment(p, 1, strategy);
  const double m2 = tcch_u_moment(p, 2, strategy);
  return std::max(m2 - m1 * m1, 0.0);
}

CoefPosterior conditional_beta_posterior(const GlmFit& fit, double g) {
  if (!(g >= 0.0)) throw validation_error("conditional_beta_posterior: g must be >= 0");
  if (!fit.converged && fit.separation == Separation::none)
    throw validation_error("conditional_beta_posterior needs a converged fit");
  const int pm = static_cast<int>(fit.beta_hat.size());
  const double shrink = std::isinf(g) ? 1.0 : g / (1.0 + g);

  CoefPosterior out;
  out.shrink_mean = shrink;
  out.alpha_mean = fit.alpha_hat;
  out.alpha_var = fit.j_alpha > 0.0 ? 1.0 / fit.j_alpha : 0.0;
  out.mean = shrink * fit.beta_hat;
  out.covariance.resize(pm, pm);
  out.covariance.setZero();
  if (pm == 0 || shrink == 0.0) return out;

  Eigen::MatrixXd inv(pm, pm);
  if (fit.used_generalized_inverse) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(fit.j_beta);
    cod.setThreshold(1e-12 * pm);
    inv = cod.pseudoInverse();
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(fit.j_beta);
    if (llt.info() != Eigen::Success)
      throw numeric_error("information matrix is singular; refit flagged it as full rank");
    inv = llt.solve(Eigen::MatrixXd::Identity(pm, pm));
  }
  out.covariance = shrink * inv;
  return out;
}

}  // namespace chicglm
