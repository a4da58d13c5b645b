#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "chicglm/model_search.hpp"
#include "chicglm/rng.hpp"

namespace chicglm {

// Four sparsity levels built from the base block b = (2, -1, -1, 0.5, -0.5)
// with intercept -0.5: the sparse truth places b on predictors 1..5, the
// medium truth on 1..5 and 11..15, the full truth tiles b everywhere.
// Poisson scales every true coefficient, intercept included, by one fifth.
enum class ScenarioKind { null_model, sparse, medium, full };

ScenarioKind parse_scenario_kind(const std::string& name);
std::string scenario_name(ScenarioKind kind);

struct Scenario {
  ScenarioKind kind = ScenarioKind::sparse;
  int p = 20;
  int n = 500;
  double corr_r = 0.0;
  FamilyKind family = FamilyKind::binomial_logit;
  std::uint64_t seed = 1;
};

double true_intercept(const Scenario& sc);
Eigen::VectorXd true_coefficients(const Scenario& sc);  // length p
ModelId true_model(const Scenario& sc);

// rows i.i.d. N(0, R) with R_jk = corr_r^|j-k|, drawn through the AR(1)
// recursion (the exact Cholesky factor of that Toeplitz correlation)
Eigen::MatrixXd gen_design(int n, int p, double corr_r, CounterRng& rng);

std::uint64_t draw_poisson(CounterRng& rng, double mean);

// design plus responses from the scenario truth; columns named x1..xp
Dataset simulate_dataset(const Scenario& sc, CounterRng& rng);

// One row of the report tables.  Selection runs fill hits/size/sse; bootstrap
// runs fill the four predictive metrics.  Unused metrics stay NaN.
struct MetricsReport {
  std::string method;
  int replicates = 0;  // completed, failures excluded
  int failures = 0;
  int redraws = 0;  // degenerate bootstrap resamples thrown back
  int selection_hits = 0;
  double avg_model_size = std::numeric_limits<double>::quiet_NaN();
  double sse = std::numeric_limits<double>::quiet_NaN();
  double auc = std::numeric_limits<double>::quiet_NaN();
  double calib_slope = std::numeric_limits<double>::quiet_NaN();
  double log_score = std::numeric_limits<double>::quiet_NaN();
  double brier = std::numeric_limits<double>::quiet_NaN();
  double avg_oob = std::numeric_limits<double>::quiet_NaN();
};

struct SearchOptions {
  ModelPrior model_prior = ModelPrior::uniform();
  int enum_limit = 18;  // enumerate up to here, stochastic search beyond
  std::uint64_t mcmc_iterations = std::uint64_t{1} << 15;
  int threads = 1;
};

// Coefficient vector [intercept, beta_1..p] a method reports: shrunk BMA for
// Bayes rules, the plain MLE of the selected model for AIC/BIC.
Eigen::VectorXd method_coefficients(const HyperRule& rule, const ModelPosterior& post,
                                    const FitMap& fits, const Family& family);

// Predictive means on new rows under the same convention as above.
Eigen::VectorXd method_predict(const HyperRule& rule, const ModelPosterior& post,
                               const FitMap& fits, const Family& family,
                               const Eigen::MatrixXd& new_X);

// Simulate `replicates` datasets from the scenario; per replicate select with
// every method and record the MAP hit (0-1 loss), the MAP model size and the
// coefficient SSE against the truth (intercept included).  Replicates that
// fail numerically are excluded and counted.
std::vector<MetricsReport> run_selection_experiment(const Scenario& sc,
                                                    const std::vector<HyperRule>& methods,
                                                    int replicates,
                                                    const SearchOptions& options = {});

struct BootstrapOptions {
  int B = 100;
  std::uint64_t seed = 1;
  ModelPrior model_prior = ModelPrior::uniform();
  int enum_limit = 14;
  std::uint64_t mcmc_iterations = std::uint64_t{1} << 15;
  int threads = 1;
};

// Bootstrap cross-validation for binary-response data: B resamples of size n
// with replacement, selection on the resample, AUC / calibration slope /
// log score / Brier evaluated on the out-of-bag rows.  Resamples whose
// out-of-bag set is empty, one-classed, or makes a predictor constant are
// redrawn and counted.
std::vector<MetricsReport> bootstrap_cv(const Family& family, const Dataset& data,
                                        const std::vector<HyperRule>& methods,
                                        const BootstrapOptions& options = {});

// rank-based Mann-Whitney AUC with midranks for ties
double auc_score(const Eigen::VectorXd& y, const Eigen::VectorXd& mu);

}  // namespace chicglm
