#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "chicglm/errors.hpp"

namespace chicglm {

enum class FamilyKind { binomial_logit, binomial_probit, poisson_log, gaussian_identity };

// Exponential-family description.  trials_or_weights holds binomial trial
// counts, Poisson replicate weights, or Gaussian precision weights; empty
// means all ones.  dispersion is the known Gaussian variance phi0; an absent
// dispersion for the Gaussian family means sigma^2 is unknown and evidence
// runs through the exact R^2 marginal instead of the Laplace route.
struct Family {
  FamilyKind kind = FamilyKind::binomial_logit;
  std::optional<double> dispersion;
  Eigen::VectorXd trials_or_weights;

  bool is_binomial() const {
    return kind == FamilyKind::binomial_logit || kind == FamilyKind::binomial_probit;
  }
  bool is_gaussian() const { return kind == FamilyKind::gaussian_identity; }
  bool gaussian_unknown_variance() const { return is_gaussian() && !dispersion.has_value(); }

  double weight(Eigen::Index i) const {
    return trials_or_weights.size() > 0 ? trials_or_weights(i) : 1.0;
  }
  // variance used by the Laplace path; unknown-variance Gaussian fits at phi = 1
  double phi() const { return dispersion.value_or(1.0); }
};

Family make_family(FamilyKind kind);
FamilyKind parse_family_kind(const std::string& family, const std::string& link);

// inverse link, vectorized
Eigen::VectorXd linkinv(FamilyKind kind, const Eigen::VectorXd& eta);
double linkinv_scalar(FamilyKind kind, double eta);

struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> column_names;
  Eigen::VectorXd offset;  // empty => none

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return static_cast<int>(X.cols()); }
  bool has_offset() const { return offset.size() > 0; }

  // finiteness, shape agreement, and the no-constant-column assumption
  void validate() const;
};

}  // namespace chicglm
