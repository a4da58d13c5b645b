#include "chicglm/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chicglm/errors.hpp"

namespace chicglm {

namespace {

constexpr double kPi = 3.141592653589793238462643;
constexpr double kEpsSep = 1e-10;
constexpr double kEtaMax = 30.0;

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

double log_normal_cdf(double eta) {
  if (eta > 8.0) return std::log1p(-0.5 * std::erfc(eta / std::sqrt(2.0)));
  if (eta > -37.0) return std::log(0.5 * std::erfc(-eta / std::sqrt(2.0)));
  // deep lower tail: log Phi = log phi + log Mills, Mills via Laplace's
  // continued fraction M(x) = 1/(x + 1/(x + 2/(x + ...))), x = -eta
  const double x = -eta;
  double cf = 0.0;
  for (int k = 60; k >= 1; --k) cf = k / (x + cf);
  const double mills = 1.0 / (x + cf);
  return -0.5 * eta * eta - 0.5 * std::log(2.0 * kPi) + std::log(mills);
}

double inverse_mills(double eta) {
  if (eta < -37.0) {
    const double x = -eta;
    double cf = 0.0;
    for (int k = 60; k >= 1; --k) cf = k / (x + cf);
    return x + cf;
  }
  const double log_phi = -0.5 * eta * eta - 0.5 * std::log(2.0 * kPi);
  return std::exp(log_phi - log_normal_cdf(eta));
}

Family make_family(FamilyKind kind) {
  Family f;
  f.kind = kind;
  return f;
}

FamilyKind parse_family_kind(const std::string& family, const std::string& link) {
  if (family == "binomial_logit") return FamilyKind::binomial_logit;
  if (family == "binomial_probit") return FamilyKind::binomial_probit;
  if (family == "poisson_log") return FamilyKind::poisson_log;
  if (family == "gaussian_identity") return FamilyKind::gaussian_identity;
  if (family == "binomial") {
    if (link.empty() || link == "logit") return FamilyKind::binomial_logit;
    if (link == "probit") return FamilyKind::binomial_probit;
    throw validation_error("unsupported binomial link: " + link);
  }
  if (family == "poisson") {
    if (link.empty() || link == "log") return FamilyKind::poisson_log;
    throw validation_error("unsupported poisson link: " + link);
  }
  if (family == "gaussian") {
    if (link.empty() || link == "identity") return FamilyKind::gaussian_identity;
    throw validation_error("unsupported gaussian link: " + link);
  }
  throw validation_error("unknown family: " + family);
}

double linkinv_scalar(FamilyKind kind, double eta) {
  switch (kind) {
    case FamilyKind::binomial_logit:
      return 1.0 / (1.0 + std::exp(-eta));
    case FamilyKind::binomial_probit:
      return 0.5 * std::erfc(-eta / std::sqrt(2.0));
    case FamilyKind::poisson_log:
      return std::exp(eta);
    case FamilyKind::gaussian_identity:
      return eta;
  }
  return eta;
}

Eigen::VectorXd linkinv(FamilyKind kind, const Eigen::VectorXd& eta) {
  Eigen::VectorXd mu(eta.size());
  switch (kind) {
    case FamilyKind::binomial_logit:
      mu = ((-eta.array()).exp() + 1.0).inverse().matrix();
      break;
    case FamilyKind::poisson_log:
      mu = eta.array().exp().matrix();
      break;
    case FamilyKind::gaussian_identity:
      mu = eta;
      break;
    case FamilyKind::binomial_probit:
      for (Eigen::Index i = 0; i < eta.size(); ++i) mu(i) = linkinv_scalar(kind, eta(i));
      break;
  }
  return mu;
}

void Dataset::validate() const {
  if (y.size() < 1) throw validation_error("dataset needs at least one observation");
  if (X.rows() != y.size()) throw validation_error("X and y disagree on n");
  if (offset.size() > 0 && offset.size() != y.size())
    throw validation_error("offset length must match y");
  if (!y.allFinite() || !X.allFinite()) throw validation_error("dataset contains non-finite values");
  if (offset.size() > 0 && !offset.allFinite())
    throw validation_error("offset contains non-finite values");
  for (int j = 0; j < p(); ++j) {
    const double span = X.col(j).maxCoeff() - X.col(j).minCoeff();
    if (span == 0.0) {
      const std::string name = j < static_cast<int>(column_names.size())
                                   ? column_names[j]
                                   : std::to_string(j);
      throw validation_error("column " + name +
                             " is constant; the intercept is handled separately");
    }
  }
}

double loglik_constant(const Family& family, const Dataset& data) {
  const int n = data.n();
  double c = 0.0;
  switch (family.kind) {
    case FamilyKind::binomial_logit:
    case FamilyKind::binomial_probit:
      for (int i = 0; i < n; ++i) {
        const double w = family.weight(i), y = data.y(i);
        c += std::lgamma(w + 1.0) - std::lgamma(y + 1.0) - std::lgamma(w - y + 1.0);
      }
      break;
    case FamilyKind::poisson_log:
      for (int i = 0; i < n; ++i)
        c -= family.weight(i) * std::lgamma(data.y(i) + 1.0);
      break;
    case FamilyKind::gaussian_identity: {
      const double phi = family.phi();
      for (int i = 0; i < n; ++i)
        c += 0.5 * std::log(family.weight(i) / (2.0 * kPi * phi));
      break;
    }
  }
  return c;
}

Eigen::VectorXd observed_info_eta(const Family& family, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& eta) {
  const Eigen::Index n = eta.size();
  Eigen::VectorXd d(n);
  switch (family.kind) {
    case FamilyKind::binomial_logit: {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double mu = 1.0 / (1.0 + std::exp(-eta(i)));
        d(i) = family.weight(i) * mu * (1.0 - mu);
      }
      break;
    }
    case FamilyKind::binomial_probit: {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double e = eta(i);
        const double r = inverse_mills(e);
        const double rm = inverse_mills(-e);
        const double w = family.weight(i);
        d(i) = y(i) * (r * (r + e)) + (w - y(i)) * (rm * (rm - e));
      }
      break;
    }
    case FamilyKind::poisson_log:
      for (Eigen::Index i = 0; i < n; ++i)
        d(i) = family.weight(i) * std::exp(eta(i));
      break;
    case FamilyKind::gaussian_identity: {
      const double phi = family.phi();
      for (Eigen::Index i = 0; i < n; ++i) d(i) = family.weight(i) / phi;
      break;
    }
  }
  return d;
}

Eigen::MatrixXd weighted_center(const Eigen::MatrixXd& X_M, const Eigen::VectorXd& d) {
  const double dsum = d.sum();
  if (!(dsum > 0.0))
    throw numeric_error("degenerate information: sum of d is zero");
  Eigen::RowVectorXd wmean = (d.transpose() * X_M) / dsum;
  return X_M.rowwise() - wmean;
}

int effective_rank(const Eigen::MatrixXd& Xc) {
  if (Xc.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
  qr.setThreshold(1e-10 * static_cast<double>(std::max(Xc.rows(), Xc.cols())));
  qr.compute(Xc);
  return static_cast<int>(qr.rank());
}

void FitWorkspace::ensure(int n, int p_total) {
  const int k = p_total + 1;
  if (Xm.rows() != n || Xm.cols() < k) {
    Xm.resize(n, k);
    scaled.resize(n, k);
    J.resize(k, k);
    lp.resize(n);
    eta.resize(n);
    mu.resize(n);
    score.resize(n);
    d.resize(n);
    lp_try.resize(n);
    eta_try.resize(n);
    mu_try.resize(n);
    score_try.resize(n);
    d_try.resize(n);
    theta.resize(k);
    theta_try.resize(k);
    grad.resize(k);
    delta.resize(k);
    warm_full.resize(k);
    warm_valid = false;
    loglik_const = std::numeric_limits<double>::quiet_NaN();
    sat_llvar = std::numeric_limits<double>::quiet_NaN();
  }
}

namespace {

// eta-dependent part of the log-likelihood; fills mu, score and d alongside
double eval_eta(const Family& fam, const Dataset& data, const Eigen::VectorXd& eta,
                Eigen::VectorXd& mu, Eigen::VectorXd& score, Eigen::VectorXd& d) {
  const auto y = data.y.array();
  const auto e = eta.array();
  switch (fam.kind) {
    case FamilyKind::binomial_logit: {
      // one exp pass: t = exp(-|eta|) serves both mu and the log-partition
      d.array() = (-e.abs()).exp();
      const auto t = d.array();
      double ll;
      if (fam.trials_or_weights.size() > 0)
        ll = (y * e - fam.trials_or_weights.array() * (e.max(0.0) + t.log1p())).sum();
      else
        ll = (y * e - (e.max(0.0) + t.log1p())).sum();
      mu.array() = (e >= 0.0).select(1.0, t) / (1.0 + t);
      const auto m = mu.array();
      if (fam.trials_or_weights.size() > 0) {
        const auto w = fam.trials_or_weights.array();
        score.array() = y - w * m;
        d.array() = w * m * (1.0 - m);
      } else {
        score.array() = y - m;
        d.array() = m * (1.0 - m);
      }
      return ll;
    }
    case FamilyKind::binomial_probit: {
      double ll = 0.0;
      for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double et = eta(i);
        const double w = fam.weight(i);
        const double yi = data.y(i);
        const double lphi = log_normal_cdf(et);
        const double r = inverse_mills(et);
        const double rm = inverse_mills(-et);
        ll += yi * lphi + (w - yi) * log_normal_cdf(-et);
        mu(i) = std::exp(lphi);
        score(i) = yi * r - (w - yi) * rm;
        d(i) = yi * (r * (r + et)) + (w - yi) * (rm * (rm - et));
      }
      return ll;
    }
    case FamilyKind::poisson_log: {
      mu.array() = e.exp();
      const auto m = mu.array();
      if (fam.trials_or_weights.size() > 0) {
        const auto w = fam.trials_or_weights.array();
        d.array() = w * m;
        score.array() = w * (y - m);
        return (w * (y * e - m)).sum();
      }
      d = mu;
      score.array() = y - m;
      return (y * e - m).sum();
    }
    case FamilyKind::gaussian_identity: {
      const double phi = fam.phi();
      mu = eta;
      if (fam.trials_or_weights.size() > 0) {
        const auto w = fam.trials_or_weights.array();
        d.array() = w / phi;
        score.array() = w * (y - e) / phi;
        return -0.5 * (w * (y - e).square()).sum() / phi;
      }
      d.setConstant(1.0 / phi);
      score.array() = (y - e) / phi;
      return -0.5 * (y - e).square().sum() / phi;
    }
  }
  return 0.0;
}

double saturated_loglik_varying(const Family& fam, const Dataset& data) {
  const Eigen::Index n = data.y.size();
  double ll = 0.0;
  switch (fam.kind) {
    case FamilyKind::binomial_logit:
    case FamilyKind::binomial_probit:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = fam.weight(i), y = data.y(i);
        if (y > 0.0) ll += y * std::log(y / w);
        if (w - y > 0.0) ll += (w - y) * std::log(1.0 - y / w);
      }
      return ll;
    case FamilyKind::poisson_log:
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = fam.weight(i), y = data.y(i);
        if (y > 0.0) ll += w * (y * std::log(y) - y);
      }
      return ll;
    case FamilyKind::gaussian_identity:
      return 0.0;
  }
  return ll;
}

struct NewtonResult {
  double llvar = 0.0;
  bool converged = false;
  bool used_generalized_inverse = false;
  int iterations = 0;
};

void form_information(FitWorkspace& ws, int k) {
  ws.scaled.leftCols(k) =
      (ws.Xm.leftCols(k).array().colwise() * ws.d.array().sqrt()).matrix();
  ws.J.topLeftCorner(k, k).setZero();
  ws.J.topLeftCorner(k, k)
      .selfadjointView<Eigen::Lower>()
      .rankUpdate(ws.scaled.leftCols(k).transpose());
}

// Damped Newton on theta = (alpha, beta_M); ws.lp/eta/mu/score/d hold the
// state of the accepted iterate on exit.  rel_tol = 0 disables the deviance
// stop (used by the separation probe).
NewtonResult run_newton(const Family& fam, const Dataset& data, int k, const FitOptions& opt,
                        FitWorkspace& ws, int max_iter, double rel_tol) {
  NewtonResult res;

  auto set_eta = [&](const Eigen::VectorXd& th, Eigen::VectorXd& lp_out,
                     Eigen::VectorXd& eta_out) {
    lp_out.noalias() = ws.Xm.leftCols(k) * th.head(k);
    if (data.has_offset())
      eta_out = lp_out + data.offset;
    else
      eta_out = lp_out;
  };

  set_eta(ws.theta, ws.lp, ws.eta);
  double llvar = eval_eta(fam, data, ws.eta, ws.mu, ws.score, ws.d);
  double dev = -2.0 * llvar;

  Eigen::LLT<Eigen::MatrixXd> llt;

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    form_information(ws, k);
    ws.grad.head(k).noalias() = ws.Xm.leftCols(k).transpose() * ws.score;

    llt.compute(ws.J.topLeftCorner(k, k).selfadjointView<Eigen::Lower>());
    if (llt.info() == Eigen::Success) {
      ws.delta.head(k) = llt.solve(ws.grad.head(k));
    } else {
      res.used_generalized_inverse = true;
      Eigen::MatrixXd Jfull = ws.J.topLeftCorner(k, k).selfadjointView<Eigen::Lower>();
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
      cod.setThreshold(1e-12 * k);
      cod.compute(Jfull);
      ws.delta.head(k) = cod.solve(ws.grad.head(k));
    }
    if (!ws.delta.head(k).allFinite()) break;

    double step = 1.0;
    bool accepted = false;
    double llvar_try = 0.0;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      ws.theta_try.head(k) = ws.theta.head(k) + step * ws.delta.head(k);
      set_eta(ws.theta_try, ws.lp_try, ws.eta_try);
      llvar_try = eval_eta(fam, data, ws.eta_try, ws.mu_try, ws.score_try, ws.d_try);
      const double dev_try = -2.0 * llvar_try;
      if (std::isfinite(dev_try) && dev_try <= dev + 1e-9 * (std::abs(dev) + 1.0)) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    ws.theta.head(k) = ws.theta_try.head(k);
    ws.lp.swap(ws.lp_try);
    ws.eta.swap(ws.eta_try);
    ws.mu.swap(ws.mu_try);
    ws.score.swap(ws.score_try);
    ws.d.swap(ws.d_try);
    const double dev_new = -2.0 * llvar_try;
    const double change = std::abs(dev - dev_new);
    dev = dev_new;
    llvar = llvar_try;

    if (change == 0.0 || change <= rel_tol * std::abs(dev)) {
      res.converged = true;
      break;
    }
    if ((step * ws.delta.head(k)).cwiseAbs().maxCoeff() <
        1e-13 * (1.0 + ws.theta.head(k).cwiseAbs().maxCoeff())) {
      res.converged = true;
      break;
    }
  }
  res.llvar = llvar;
  return res;
}

void cold_start(const Family& fam, const Dataset& data, int k, FitWorkspace& ws) {
  double wsum = 0.0, ysum = 0.0;
  for (int i = 0; i < data.n(); ++i) {
    wsum += fam.weight(i);
    ysum += data.y(i);
  }
  double alpha0 = 0.0;
  switch (fam.kind) {
    case FamilyKind::binomial_logit:
    case FamilyKind::binomial_probit: {
      const double pbar = std::clamp(ysum / wsum, 1e-6, 1.0 - 1e-6);
      alpha0 = logit(pbar);
      if (fam.kind == FamilyKind::binomial_probit) alpha0 /= 1.702;
      break;
    }
    case FamilyKind::poisson_log:
      alpha0 = std::log(std::max(ysum / wsum, 1e-8));
      break;
    case FamilyKind::gaussian_identity:
      alpha0 = ysum / static_cast<double>(data.n());
      break;
  }
  if (data.has_offset()) alpha0 -= data.offset.mean();
  ws.theta.head(k).setZero();
  ws.theta(0) = alpha0;
}

void gather_columns(const Dataset& data, const ModelId& model, FitWorkspace& ws) {
  ws.Xm.col(0).setOnes();
  int jj = 0;
  for (int j = 0; j < model.p; ++j)
    if (model.includes(j)) ws.Xm.col(1 + jj++) = data.X.col(j);
}

}  // namespace

Separation detect_separation(const Family& family, const Dataset& data, const ModelId& model,
                             const GlmFit& fit) {
  if (!family.is_binomial()) return Separation::none;
  const int n = data.n();
  const int k = fit.model.size() + 1;

  FitWorkspace ws;
  ws.ensure(n, model.p);
  gather_columns(data, model, ws);
  ws.theta.setZero();
  ws.theta(0) = fit.alpha_hat;
  if (fit.beta_hat.size() > 0) ws.theta.segment(1, k - 1) = fit.beta_hat;

  FitOptions probe_opt;
  auto classify = [&](const Eigen::VectorXd& eta, const Eigen::VectorXd& d) {
    int below = 0, below_diverged = 0;
    for (int i = 0; i < n; ++i) {
      const double w = family.weight(i);
      if (d(i) < kEpsSep * std::max(1.0, w)) {
        ++below;
        if (std::abs(eta(i)) > kEtaMax) ++below_diverged;
      }
    }
    if (below == n) return Separation::complete;
    if (below > 0 && below == below_diverged) return Separation::quasi;
    return Separation::none;
  };

  // continue Newton in rounds; divergent components grow about one unit of
  // eta per iteration while bounded ones go stationary
  Eigen::VectorXd eta_prev(n);
  for (int round = 0; round < 10; ++round) {
    eta_prev = ws.eta;
    run_newton(family, data, k, probe_opt, ws, 40, 0.0);
    const Separation s = classify(ws.eta, ws.d);
    if (s != Separation::none) return s;
    bool suspicious = false;
    for (int i = 0; i < n && !suspicious; ++i)
      if (ws.d(i) < 1e-6 * std::max(1.0, family.weight(i))) suspicious = true;
    if (!suspicious) return Separation::none;
    if (round > 0 && (ws.eta - eta_prev).cwiseAbs().maxCoeff() < 1e-9)
      return Separation::none;
  }
  return classify(ws.eta, ws.d);
}

GlmFit fit_mle(const Family& family, const Dataset& data, const ModelId& model,
               const FitOptions& options, FitWorkspace* ws_in) {
  const int n = data.n();
  const int pm = model.size();
  const int k = pm + 1;

  if (options.validate_inputs) {
    data.validate();
    if (model.p != data.p()) throw validation_error("model and dataset disagree on p");
    if (family.trials_or_weights.size() > 0 &&
        family.trials_or_weights.size() != data.y.size())
      throw validation_error("trials_or_weights length must match y");
    if (family.trials_or_weights.size() > 0 && family.trials_or_weights.minCoeff() <= 0.0)
      throw validation_error("trials_or_weights must be positive");
    if (family.dispersion && !(*family.dispersion > 0.0))
      throw validation_error("dispersion must be positive");
    for (int i = 0; i < n; ++i) {
      const double y = data.y(i);
      if (family.is_binomial()) {
        const double w = family.weight(i);
        if (y < 0.0 || y > w || std::abs(y - std::round(y)) > 1e-8)
          throw validation_error("binomial responses must be integer counts in [0, trials]");
      } else if (family.kind == FamilyKind::poisson_log) {
        if (y < 0.0 || std::abs(y - std::round(y)) > 1e-8)
          throw validation_error("poisson responses must be nonnegative integers");
      }
    }
  }

  FitWorkspace local_ws;
  FitWorkspace& ws = ws_in ? *ws_in : local_ws;
  ws.ensure(n, data.p());
  if (std::isnan(ws.loglik_const)) ws.loglik_const = loglik_constant(family, data);
  if (std::isnan(ws.sat_llvar)) ws.sat_llvar = saturated_loglik_varying(family, data);

  // null log-likelihood (eta-varying part), fitted here unless supplied
  double null_llvar = 0.0;
  if (options.null_loglik) {
    null_llvar = *options.null_loglik - ws.loglik_const;
  } else if (!model.is_null()) {
    FitOptions null_opt = options;
    null_opt.null_loglik.reset();
    null_opt.validate_inputs = false;
    null_opt.check_separation = false;
    const bool saved_warm = ws.warm_valid;
    ws.warm_valid = false;
    GlmFit nullfit = fit_mle(family, data, ModelId::null_model(data.p()), null_opt, &ws);
    ws.warm_valid = saved_warm;
    null_llvar = nullfit.loglik - ws.loglik_const;
    if (family.gaussian_unknown_variance()) null_llvar = -0.5 * nullfit.residual_deviance;
  }

  gather_columns(data, model, ws);

  if (ws.warm_valid) {
    ws.theta(0) = ws.warm_full(0);
    int jj = 0;
    for (int j = 0; j < model.p; ++j)
      if (model.includes(j)) ws.theta(1 + jj++) = ws.warm_full(1 + j);
  } else {
    cold_start(family, data, k, ws);
  }

  NewtonResult nr = run_newton(family, data, k, options, ws, options.max_iter, options.rel_tol);

  GlmFit fit;
  fit.model = model;
  fit.alpha_hat = ws.theta(0);
  fit.beta_hat = ws.theta.segment(1, pm);
  fit.eta_hat = ws.eta;
  fit.d = ws.d;
  fit.j_alpha = fit.d.sum();
  fit.converged = nr.converged;
  fit.used_generalized_inverse = nr.used_generalized_inverse;
  fit.loglik = nr.llvar + ws.loglik_const;
  if (model.is_null() && !options.null_loglik) null_llvar = nr.llvar;
  fit.deviance_z = 2.0 * (nr.llvar - null_llvar);
  fit.residual_deviance = 2.0 * (ws.sat_llvar - nr.llvar);

  // information at the accepted iterate (the loop's copy is one step stale)
  form_information(ws, k);

  if (pm > 0 && fit.j_alpha > 0.0) {
    // Schur complement of the intercept entry equals Xc' D Xc exactly
    Eigen::MatrixXd full = ws.J.topLeftCorner(k, k).selfadjointView<Eigen::Lower>();
    Eigen::VectorXd b = full.block(1, 0, pm, 1);
    fit.j_beta = full.block(1, 1, pm, pm) - (b * b.transpose()) / fit.j_alpha;
    // wald statistic through the centered linear predictor, immune to aliasing
    const double lpbar = ws.d.dot(ws.lp) / fit.j_alpha;
    fit.wald_q = (ws.d.array() * (ws.lp.array() - lpbar).square()).sum();
  } else {
    fit.j_beta.resize(pm, pm);
    fit.j_beta.setZero();
    fit.wald_q = 0.0;
  }

  if (fit.j_alpha > 0.0 && pm > 0) {
    // an LLT can slip through a singular J on roundoff alone, so the rank
    // must come from the final iterate's design, not the solver path taken
    const Eigen::VectorXd sd = ws.d.array().sqrt();
    Eigen::MatrixXd Xc = weighted_center(ws.Xm.middleCols(1, pm), ws.d);
    fit.rank = effective_rank(sd.asDiagonal() * Xc);
    if (fit.rank < pm) fit.used_generalized_inverse = true;
  } else {
    fit.rank = 0;
  }

  if (options.check_separation && family.is_binomial()) {
    bool suspicious = !nr.converged;
    for (int i = 0; i < n && !suspicious; ++i)
      if (ws.d(i) < 1e-6 * std::max(1.0, family.weight(i))) suspicious = true;
    if (suspicious) fit.separation = detect_separation(family, data, model, fit);
  }

  if (family.gaussian_unknown_variance()) {
    // profile out sigma^2; at phi = 1 the varying part is -RSS/2, and
    // 2 * (profile_M - profile_null) = n * log(RSS_null / RSS_M)
    const double rss = -2.0 * nr.llvar;
    double logw_sum = 0.0;
    if (family.trials_or_weights.size() > 0)
      logw_sum = family.trials_or_weights.array().log().sum();
    auto profile = [&](double r) {
      return -0.5 * n * (std::log(2.0 * kPi * r / n) + 1.0) + 0.5 * logw_sum;
    };
    fit.loglik = profile(rss);
    const double null_profile =
        options.null_loglik ? *options.null_loglik : profile(-2.0 * null_llvar);
    fit.deviance_z = 2.0 * (fit.loglik - null_profile);
    fit.residual_deviance = rss;
  }

  if (!nr.converged && fit.separation == Separation::none)
    throw numeric_error("IRLS did not converge after " + std::to_string(options.max_iter) +
                        " iterations (model " + model.bitstring() + ")");

  if (ws_in) {
    ws.warm_full.setZero();
    ws.warm_full(0) = fit.alpha_hat;
    int jj = 0;
    for (int j = 0; j < model.p; ++j)
      if (model.includes(j)) ws.warm_full(1 + j) = fit.beta_hat(jj++);
    ws.warm_valid = true;
  }
  return fit;
}

}  // namespace chicglm
