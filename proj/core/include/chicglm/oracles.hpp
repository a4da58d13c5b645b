#pragma once

#include <cstdint>
#include <functional>

#include "chicglm/model_search.hpp"

// Reference implementations for tests: a separate integrator, importance
// sampling, and a no-frills enumerator.  Nothing here reuses the main-path
// optimizer, quadrature, or caching, so agreement is meaningful evidence.
namespace chicglm::oracle {

// adaptive Simpson of exp(log_f); abs_tol bounds the error of the returned
// log value; throws with the offending bracket when max depth is hit
double log_adaptive_simpson(const std::function<double(double)>& log_f, double lo, double hi,
                            double abs_tol = 1e-10);

// density u^(a/2-1) (upper-u)^(b/2-1) exp(log_smooth(u)) / exp(log_norm) on
// (0, upper].  The endpoint powers are explicit so the integrator can apply
// the flattening substitutions (u = t^2 and stronger for a < 2, mirrored at
// the upper end); log_smooth must stay bounded on the open interval.
struct PriorDensity {
  double a = 2.0;
  double b = 2.0;
  double upper = 1.0;
  std::function<double(double)> log_smooth;
  double log_norm = 0.0;
};
PriorDensity tcch_prior_density(const TcchParams& prior);

// log of int_0^upper u^(pa-1) (upper-u)^(pb-1) exp(h(log_u, u)) du; the
// backbone behind the density normalization and the quad_* operations
double log_edge_integral(double pa, double pb, double upper,
                         const std::function<double(double, double)>& h,
                         double abs_tol = 1e-11);

// log of int exp(log BF(u)) pdf(u) du for the three fixed-u Bayes factor
// shapes the engine mixes over
double quad_bf_over_u(const FitStats& fit, const FitStats& null_fit,
                      const PriorDensity& prior);
double quad_bf_gaussian_over_u(double r_squared, int n, int p_m, const PriorDensity& prior);
double quad_bf_overdispersed_over_u(const FitStats& fit, const FitStats& null_fit,
                                    const PriorDensity& prior);

struct ISEstimate {
  double log_value = 0.0;
  double mc_standard_error = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

// data-based Bayes factor at fixed g by importance sampling with Student-t(4)
// proposals centered at the conditional posteriors
ISEstimate importance_sampling_bf(const Family& family, const Dataset& data,
                                  const ModelId& model, double g, std::uint64_t samples,
                                  std::uint64_t seed);

// joint (u, alpha, beta) importance sampler for one model under a tCCH mixing
// prior; mean[0] is the intercept, mean[1..] the included coefficients
struct IsCoefficients {
  Eigen::VectorXd mean;
  Eigen::VectorXd mc_se;
  double ess = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};
IsCoefficients is_coefficient_mean(const Family& family, const Dataset& data,
                                   const ModelId& model, const TcchParams& prior,
                                   std::uint64_t samples, std::uint64_t seed);

// plain-order enumeration with its own cold-start IRLS (p <= 12)
ModelPosterior brute_force_posterior(const Family& family, const Dataset& data,
                                     const HyperRule& rule, const ModelPrior& prior);

}  // namespace chicglm::oracle
