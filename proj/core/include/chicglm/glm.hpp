#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>

#include "chicglm/family.hpp"
#include "chicglm/model_id.hpp"

namespace chicglm {

enum class Separation { none, quasi, complete };

struct GlmFit {
  ModelId model;
  double alpha_hat = 0.0;
  Eigen::VectorXd beta_hat;  // length p_M
  Eigen::VectorXd eta_hat;   // length n, includes offset
  Eigen::VectorXd d;         // diagonal of J_n(eta_hat)
  double j_alpha = 0.0;      // sum of d
  Eigen::MatrixXd j_beta;    // X_c' diag(d) X_c
  double wald_q = 0.0;       // beta' J_n(beta) beta
  double deviance_z = 0.0;   // 2 (loglik - null loglik)
  double loglik = 0.0;
  double residual_deviance = 0.0;  // 2 (saturated - fitted)
  int rank = 0;                    // r_M of the centered design
  bool converged = false;
  bool used_generalized_inverse = false;
  Separation separation = Separation::none;
};

struct FitOptions {
  int max_iter = 100;
  double rel_tol = 1e-8;
  int max_halvings = 30;
  bool check_separation = true;
  bool validate_inputs = true;
  std::optional<double> null_loglik;  // reuse a cached null fit
};

// Reusable buffers for tight fitting loops (model enumeration).  warm_full is
// a (p_total + 1)-vector [alpha, beta_0..beta_{p-1}] scattered across all
// candidate columns; when warm_valid the next fit starts from it.  A workspace
// belongs to one (family, data) pair; the cached constants are keyed on shape
// only.
struct FitWorkspace {
  Eigen::MatrixXd Xm, scaled, J;
  Eigen::VectorXd lp, eta, mu, score, d, theta, theta_try, grad, delta, warm_full;
  Eigen::VectorXd lp_try, eta_try, mu_try, score_try, d_try;
  double loglik_const = std::numeric_limits<double>::quiet_NaN();
  double sat_llvar = std::numeric_limits<double>::quiet_NaN();
  bool warm_valid = false;
  void ensure(int n, int p_total);
};

// per-observation log-likelihood terms that do not depend on eta
double loglik_constant(const Family& family, const Dataset& data);

GlmFit fit_mle(const Family& family, const Dataset& data, const ModelId& model,
               const FitOptions& options = {}, FitWorkspace* ws = nullptr);

Eigen::VectorXd observed_info_eta(const Family& family, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& eta);

Eigen::MatrixXd weighted_center(const Eigen::MatrixXd& X_M, const Eigen::VectorXd& d);

Separation detect_separation(const Family& family, const Dataset& data, const ModelId& model,
                             const GlmFit& fit);

int effective_rank(const Eigen::MatrixXd& Xc);

// quadrant-stable phi(eta)/Phi(eta); probit information pieces need it far in
// the tails where Phi underflows
double inverse_mills(double eta);
double log_normal_cdf(double eta);

}  // namespace chicglm
