#pragma once

#include <Eigen/Dense>

#include "chicglm/glm.hpp"
#include "chicglm/special_functions.hpp"

namespace chicglm {

// Mixing distribution on u = 1/(1+g), support (0, 1/v].  Parameters are kept
// in the unhalved (a, b, ...) form; halving to (a/2, b/2, s/2) happens in one
// place, inside the normalizer.  kappa may exceed 1 (intrinsic prior).
struct TcchParams {
  double a = 2.0;
  double b = 2.0;
  double r = 0.0;
  double s = 0.0;
  double v = 1.0;
  double kappa = 1.0;
};

// throws validation_error on a <= 0, b <= 0, v < 1, kappa <= 0, or non-finite
// entries; allow_improper permits a == 0 for the posterior of the improper
// u^{-1} prior
void validate_tcch(const TcchParams& params, bool allow_improper = false);

// log of the integral of the unnormalized kernel
//   u^{a/2-1} (1-vu)^{b/2-1} e^{-su/2} [kappa + (1-kappa)vu]^{-r}
// over (0, 1/v]
double tcch_log_normalizer(const TcchParams& params,
                           const sf::EvalStrategy& strategy = {});

// log density at u; -inf outside the support
double tcch_log_pdf(double u, const TcchParams& params,
                    const sf::EvalStrategy& strategy = {});

// conjugate update from the quadratic-form likelihood kernel:
// (a, b, r, s, v, kappa) -> (a + p_M, b, r, s + wald_q, v, kappa)
TcchParams posterior_update(const TcchParams& params, int p_m, double wald_q);

// E[u^k] for k = 1, 2 as a ratio of normalizers with a shifted by 2k
double tcch_u_moment(const TcchParams& params, int k,
                     const sf::EvalStrategy& strategy = {});

inline double tcch_shrink_mean(const TcchParams& params,
                               const sf::EvalStrategy& strategy = {}) {
  return 1.0 - tcch_u_moment(params, 1, strategy);
}

double tcch_u_variance(const TcchParams& params,
                       const sf::EvalStrategy& strategy = {});

// Normal posterior of (alpha, beta_M) given g, from the curvature at the MLE.
// beta mean shrinks the MLE by g/(1+g); alpha is independent of beta.
struct CoefPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  double shrink_mean = 0.0;
  double alpha_mean = 0.0;
  double alpha_var = 0.0;
};

CoefPosterior conditional_beta_posterior(const GlmFit& fit, double g);

}  // namespace chicglm
