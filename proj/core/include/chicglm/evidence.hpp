#pragma once

#include <optional>

#include "chicglm/glm.hpp"
#include "chicglm/hyper_rules.hpp"
#include "chicglm/tcch.hpp"

namespace chicglm {

// Sufficient summary of a fit for every evidence method; enumeration keeps
// these instead of full GlmFit objects.
struct FitStats {
  ModelId model;
  int n = 0;
  int p_m = 0;
  int rank = 0;
  double z = 0.0;            // deviance statistic vs the null model
  double q = 0.0;            // wald statistic through the centered predictor
  double log_j_alpha = 0.0;  // log sum_i d_i
  double loglik = 0.0;
  double residual_deviance = 0.0;
  bool converged = false;
  bool used_generalized_inverse = false;
  Separation separation = Separation::none;
};

FitStats to_stats(const GlmFit& fit);

struct Evidence {
  ModelId model;
  HyperRule method;
  double log_bf_vs_null = 0.0;
  std::optional<TcchParams> u_posterior;
  bool valid = true;    // false under complete separation
  bool laplace = true;  // false on the exact unknown-variance Gaussian route
  bool used_generalized_inverse = false;
  bool separation_quasi = false;
  bool improper_reference = false;  // comparable only between non-null models
  bool numeric_warning = false;     // special-function backends disagreed
};

// log BF against the null at fixed g; uses the effective rank so duplicated
// columns change nothing
double log_bf_fixed_g(const FitStats& stats, const FitStats& null_stats, double g);

double log_tbf(double deviance_z, int p_m, double g);

double local_eb_g(double wald_q, int p_m);
Evidence local_eb_evidence(const FitStats& stats, const FitStats& null_stats);

// tCCH-mixed evidence via the conjugate update of the normalizer.  improper
// drops the prior normalizer (the a = 0 reference prior); such values only
// compare between non-null models.
Evidence log_bf_tcch(const FitStats& stats, const FitStats& null_stats,
                     const TcchParams& prior, bool improper = false,
                     const sf::EvalStrategy& strategy = {});

// the criterion value itself; pseudo-evidence is -ic/2
double ic_score(const FitStats& stats, RuleKind variant, int n);

// unknown-variance Gaussian: exact marginals through R^2
double gaussian_r2(const FitStats& stats);
double log_bf_gaussian_fixed_g(double r_squared, int n, int p_m, double g);
double log_bf_gaussian_tcch(double r_squared, int n, int p_m, const TcchParams& prior,
                            bool improper = false, const sf::EvalStrategy& strategy = {});
double gaussian_posterior_u_mean(double r_squared, int n, int p_m, const TcchParams& prior);

// over-dispersed double-exponential family; log marginal at a fixed u up to a
// model-independent constant, and its tCCH mixture
double log_marglik_overdispersed(const FitStats& stats, double u);
double log_bf_overdispersed_tcch(const FitStats& stats, const FitStats& null_stats,
                                 const TcchParams& prior,
                                 const sf::EvalStrategy& strategy = {});

// one-stop dispatch across every supported method
Evidence evidence_for(const HyperRule& rule, const Family& family, const FitStats& stats,
                      const FitStats& null_stats, int p_total,
                      const sf::EvalStrategy& strategy = {});

// posterior mean of g/(1+g) implied by the evidence, for shrinkage estimates
double method_shrink(const HyperRule& rule, const Evidence& ev, const FitStats& stats,
                     const Family& family, int p_total);

}  // namespace chicglm
