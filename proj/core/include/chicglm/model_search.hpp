#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "chicglm/evidence.hpp"

namespace chicglm {

struct ModelPrior {
  enum class Kind { uniform, beta_binomial };
  Kind kind = Kind::beta_binomial;
  double a = 1.0;
  double b = 1.0;

  static ModelPrior uniform() { return {Kind::uniform, 1.0, 1.0}; }
  static ModelPrior beta_binomial(double a = 1.0, double b = 1.0);
};

double model_log_prior(const ModelId& model, const ModelPrior& prior, int p);

struct ModelEntry {
  ModelId model;
  double log_evidence = 0.0;  // log BF against the null, or pseudo-evidence
  double log_prior = 0.0;
  double prob = 0.0;
  std::uint64_t visits = 0;  // stochastic search only
};

// Normalized posterior over the models actually scored: all 2^p under
// enumeration, the unique visited set under MCMC.  Probabilities renormalize
// exact evidences either way; visit counts only drive exploration.
struct ModelPosterior {
  enum class Coverage { exact_enumeration, mcmc };
  Coverage coverage = Coverage::exact_enumeration;
  int p = 0;
  std::vector<ModelEntry> entries;  // ascending by model bits
  std::vector<ModelId> excluded;    // complete separation or failed evidence
  std::uint64_t iterations = 0;
  std::uint64_t seed = 0;
  std::uint64_t rank_deficient = 0;  // models whose fit dropped columns

  const ModelEntry* find(const ModelId& model) const;
  // highest-probability model; ties prefer fewer predictors, then lower bits
  ModelId map_model() const;
};

// Per-model pieces kept aside for BMA summaries; keyed by ModelId::bits.
struct ModelFit {
  FitStats stats;
  double alpha_hat = 0.0;
  Eigen::VectorXd beta_hat;
};
using FitMap = std::map<std::uint64_t, ModelFit>;

// Exhaustive scan of all 2^p models (p <= 25).  Walks in Gray-code order so
// consecutive fits differ by one predictor and warm starts carry over.
ModelPosterior enumerate_models(const Family& family, const Dataset& data,
                                const HyperRule& rule, const ModelPrior& prior,
                                FitMap* fits = nullptr, int threads = 1);

// One fit pass shared across several evidence rules; results align with
// `rules`.  Every rule sees the same fits, exclusions are per rule.
std::vector<ModelPosterior> enumerate_models_many(const Family& family, const Dataset& data,
                                                  const std::vector<HyperRule>& rules,
                                                  const ModelPrior& prior,
                                                  FitMap* fits = nullptr, int threads = 1);

// Metropolis-Hastings on the model bits with an injected log posterior mass;
// proposal mix: flip one random bit 0.9, swap an included/excluded pair 0.1.
// Exposed separately so the chain can be tested against known stationary laws.
struct MhTrace {
  std::map<std::uint64_t, std::uint64_t> visit_counts;  // includes the start state
  std::uint64_t accepted = 0;
};
MhTrace mh_sample_models(int p, std::uint64_t iterations, std::uint64_t seed,
                         const std::function<double(std::uint64_t)>& log_mass);

ModelPosterior mcmc_search(const Family& family, const Dataset& data, const HyperRule& rule,
                           const ModelPrior& prior, std::uint64_t iterations,
                           std::uint64_t seed, FitMap* fits = nullptr);

// pip_j = sum of prob over entries containing j
Eigen::VectorXd inclusion_probabilities(const ModelPosterior& post);

// posterior mean of g/(1+g) a method applies to the MLE inside one model:
// the tCCH posterior moment for mixture rules, closed forms for fixed-g,
// local EB and TBF, and 1 for the IC scores
double posterior_shrink(const HyperRule& rule, const FitStats& stats, const Family& family,
                        int p_total);

// posterior-mean coefficients [intercept, beta_1..p]: per model the MLE
// shrunk by that model's posterior mean of g/(1+g), zeros over excluded
// coordinates, averaged under the model posterior
Eigen::VectorXd bma_coefficients(const ModelPosterior& post, const FitMap& fits,
                                 const HyperRule& rule, const Family& family);

// plug-in predictive means: mu_hat = sum_M p(M|Y) linkinv(alpha_M + shrink_M x'beta_M)
Eigen::VectorXd bma_predict(const ModelPosterior& post, const FitMap& fits,
                            const HyperRule& rule, const Family& family,
                            const Eigen::MatrixXd& new_X);

}  // namespace chicglm
