#include <cmath>

#include "doctest.h"

#include "chicglm/errors.hpp"
#include "chicglm/glm.hpp"
#include "fixtures.hpp"

using namespace chicglm;
using testfix::close_rel;

namespace {

// canonical links only: the score is X'(y - mu)
double max_score(const Family& fam, const Dataset& data, const GlmFit& fit) {
  const Eigen::VectorXd mu = linkinv(fam.kind, fit.eta_hat);
  const Eigen::VectorXd sc = data.y - mu;
  return std::max(std::abs(sc.sum()), (data.X.transpose() * sc).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("glm") {

TEST_CASE("logistic mle zeroes the score") {
  const Dataset data = testfix::logistic40();
  const Family fam = make_family(FamilyKind::binomial_logit);
  const GlmFit fit = fit_mle(fam, data, ModelId::full_model(2));
  CHECK(fit.converged);
  CHECK(fit.separation == Separation::none);
  CHECK(fit.rank == 2);
  CHECK(max_score(fam, data, fit) < 1e-8);
  CHECK(fit.deviance_z > 0.0);
  CHECK(fit.wald_q > 0.0);
}

TEST_CASE("probit converges on the same data") {
  const Dataset data = testfix::logistic40();
  const GlmFit fit = fit_mle(make_family(FamilyKind::binomial_probit), data,
                             ModelId::full_model(2));
  CHECK(fit.converged);
  CHECK(fit.deviance_z > 0.0);
  // probit slopes sit near logit slopes / 1.7 on mild data
  const GlmFit lfit = fit_mle(make_family(FamilyKind::binomial_logit), data,
                              ModelId::full_model(2));
  CHECK(std::abs(fit.beta_hat(0) - lfit.beta_hat(0) / 1.7) < 0.35 * std::abs(lfit.beta_hat(0)));
}

TEST_CASE("poisson mle zeroes the score") {
  const Dataset data = testfix::poisson40();
  const Family fam = make_family(FamilyKind::poisson_log);
  const GlmFit fit = fit_mle(fam, data, ModelId::full_model(2));
  CHECK(fit.converged);
  CHECK(max_score(fam, data, fit) < 1e-8);
  CHECK(fit.residual_deviance > 0.0);
}

TEST_CASE("gaussian fit is ordinary least squares") {
  const Dataset data = testfix::gaussian30();
  const int n = data.n();
  const GlmFit fit = fit_mle(make_family(FamilyKind::gaussian_identity), data,
                             ModelId::full_model(2));
  Eigen::MatrixXd Z(n, 3);
  Z.col(0).setOnes();
  Z.rightCols(2) = data.X;
  const Eigen::VectorXd ols = (Z.transpose() * Z).ldlt().solve(Z.transpose() * data.y);
  CHECK(close_rel(fit.alpha_hat, ols(0), 1e-10));
  CHECK(close_rel(fit.beta_hat(0), ols(1), 1e-10));
  CHECK(close_rel(fit.beta_hat(1), ols(2), 1e-10));
  const double rss = (data.y - Z * ols).squaredNorm();
  CHECK(close_rel(fit.residual_deviance, rss, 1e-10));
}

TEST_CASE("gaussian known variance reproduces weighted least squares") {
  Dataset data = testfix::gaussian30();
  Family fam = make_family(FamilyKind::gaussian_identity);
  fam.dispersion = 2.25;
  Eigen::VectorXd w(data.n());
  for (int i = 0; i < data.n(); ++i) w(i) = 1.0 + (i % 3);
  fam.trials_or_weights = w;
  const GlmFit fit = fit_mle(fam, data, ModelId::full_model(2));
  Eigen::MatrixXd Z(data.n(), 3);
  Z.col(0).setOnes();
  Z.rightCols(2) = data.X;
  const Eigen::MatrixXd Zw = w.asDiagonal() * Z;
  const Eigen::VectorXd wls =
      (Z.transpose() * Zw).ldlt().solve(Zw.transpose() * data.y);
  CHECK(close_rel(fit.alpha_hat, wls(0), 1e-10));
  CHECK(close_rel(fit.beta_hat(0), wls(1), 1e-10));
  CHECK(close_rel(fit.beta_hat(1), wls(2), 1e-10));
}

TEST_CASE("observed information ignores y for canonical links") {
  const Dataset data = testfix::logistic40();
  Eigen::VectorXd eta = 0.3 * data.X.col(0) - 0.1 * data.X.col(1);
  Eigen::VectorXd y2 = data.y;
  y2(0) = 1.0 - y2(0);
  y2(7) = 1.0 - y2(7);
  for (FamilyKind kind : {FamilyKind::binomial_logit, FamilyKind::poisson_log}) {
    const Family fam = make_family(kind);
    const Eigen::VectorXd d1 = observed_info_eta(fam, data.y, eta);
    const Eigen::VectorXd d2 = observed_info_eta(fam, y2, eta);
    CHECK((d1 - d2).cwiseAbs().maxCoeff() == 0.0);
  }
  // probit is non-canonical: flipping y must move the observed information
  const Family pf = make_family(FamilyKind::binomial_probit);
  const Eigen::VectorXd p1 = observed_info_eta(pf, data.y, eta);
  const Eigen::VectorXd p2 = observed_info_eta(pf, y2, eta);
  CHECK((p1 - p2).cwiseAbs().maxCoeff() > 1e-8);
}

TEST_CASE("j_beta equals the centered cross product") {
  const Dataset data = testfix::logistic40();
  const GlmFit fit = fit_mle(make_family(FamilyKind::binomial_logit), data,
                             ModelId::full_model(2));
  const Eigen::MatrixXd Xc = weighted_center(data.X, fit.d);
  const Eigen::MatrixXd direct = Xc.transpose() * fit.d.asDiagonal() * Xc;
  CHECK((fit.j_beta - direct).cwiseAbs().maxCoeff() < 1e-12 * direct.norm());
  CHECK(close_rel(fit.j_alpha, fit.d.sum(), 1e-14));
  // wald statistic recomputed from the parts
  const double q = fit.beta_hat.transpose() * fit.j_beta * fit.beta_hat;
  CHECK(close_rel(fit.wald_q, q, 1e-10));
}

TEST_CASE("rank equivalent designs agree") {
  const Dataset base = testfix::logistic40();
  Dataset dup;
  dup.y = base.y;
  dup.X.resize(base.n(), 2);
  dup.X.col(0) = base.X.col(0);
  dup.X.col(1) = 2.0 * base.X.col(0);
  const Family fam = make_family(FamilyKind::binomial_logit);
  const GlmFit both = fit_mle(fam, dup, ModelId::full_model(2));
  const GlmFit one = fit_mle(fam, dup, ModelId{1, 2});
  CHECK(both.rank == 1);
  CHECK(both.used_generalized_inverse);
  CHECK(close_rel(both.wald_q, one.wald_q, 1e-10));
  CHECK(close_rel(both.deviance_z, one.deviance_z, 1e-10));
  CHECK(close_rel(both.j_alpha, one.j_alpha, 1e-10));
  CHECK((both.eta_hat - one.eta_hat).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("separation detection") {
  const Family fam = make_family(FamilyKind::binomial_logit);
  Dataset comp;
  comp.y.resize(4);
  comp.y << 0, 0, 1, 1;
  comp.X.resize(4, 1);
  comp.X << -2, -1, 1, 2;
  CHECK(fit_mle(fam, comp, ModelId::full_model(1)).separation == Separation::complete);

  Dataset quasi;
  quasi.y.resize(3);
  quasi.y << 0, 1, 0;
  quasi.X.resize(3, 1);
  quasi.X << 1, 2, 2;
  CHECK(fit_mle(fam, quasi, ModelId::full_model(1)).separation == Separation::quasi);

  CHECK(fit_mle(fam, testfix::logistic40(), ModelId::full_model(2)).separation ==
        Separation::none);
}

TEST_CASE("binomial trials equal expanded bernoulli rows") {
  // y successes out of w trials versus the row-expanded 0/1 dataset
  Dataset trials;
  trials.y.resize(4);
  trials.y << 1, 3, 0, 2;
  trials.X.resize(4, 1);
  trials.X << -1.0, 0.2, 0.7, 1.5;
  Eigen::VectorXd w(4);
  w << 2, 4, 3, 2;
  Family tf = make_family(FamilyKind::binomial_logit);
  tf.trials_or_weights = w;

  Dataset rows;
  rows.y.resize(11);
  rows.X.resize(11, 1);
  int k = 0;
  for (int i = 0; i < 4; ++i)
    for (int t = 0; t < static_cast<int>(w(i)); ++t) {
      rows.y(k) = t < trials.y(i) ? 1.0 : 0.0;
      rows.X(k, 0) = trials.X(i, 0);
      ++k;
    }
  const Family bf = make_family(FamilyKind::binomial_logit);

  const GlmFit a = fit_mle(tf, trials, ModelId::full_model(1));
  const GlmFit b = fit_mle(bf, rows, ModelId::full_model(1));
  CHECK(close_rel(a.alpha_hat, b.alpha_hat, 1e-8));
  CHECK(close_rel(a.beta_hat(0), b.beta_hat(0), 1e-8));
  CHECK(close_rel(a.deviance_z, b.deviance_z, 1e-8));
  CHECK(close_rel(a.wald_q, b.wald_q, 1e-7));
}

TEST_CASE("offset shifts the linear predictor") {
  Dataset data = testfix::poisson40();
  Dataset off = data;
  off.offset = Eigen::VectorXd::Constant(data.n(), 0.7);
  const Family fam = make_family(FamilyKind::poisson_log);
  const GlmFit base = fit_mle(fam, data, ModelId::full_model(2));
  const GlmFit with = fit_mle(fam, off, ModelId::full_model(2));
  // exp(0.7) rescales every mean; the intercept absorbs it exactly
  CHECK(close_rel(with.alpha_hat, base.alpha_hat - 0.7, 1e-7));
  CHECK(close_rel(with.beta_hat(0), base.beta_hat(0), 1e-7));
  CHECK((with.eta_hat - base.eta_hat).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("deviance against null is nonnegative") {
  const Dataset data = testfix::logistic40();
  const Family fam = make_family(FamilyKind::binomial_logit);
  const GlmFit null_fit = fit_mle(fam, data, ModelId::null_model(2));
  FitOptions opt;
  opt.null_loglik = null_fit.loglik;
  for (std::uint64_t bits = 0; bits < 4; ++bits) {
    const GlmFit fit = fit_mle(fam, data, ModelId{bits, 2}, opt);
    CHECK(fit.converged);
    CHECK(fit.deviance_z >= 0.0);
  }
}

TEST_CASE("workspace reuse matches cold fits") {
  const Dataset data = testfix::logistic40();
  const Family fam = make_family(FamilyKind::binomial_logit);
  FitWorkspace ws;
  FitOptions opt;
  for (std::uint64_t bits : {1ull, 3ull, 2ull, 3ull, 0ull}) {
    const GlmFit warm = fit_mle(fam, data, ModelId{bits, 2}, opt, &ws);
    const GlmFit cold = fit_mle(fam, data, ModelId{bits, 2}, opt);
    // warm starts stop at a different iterate inside the same tolerance ball
    CHECK(close_rel(warm.loglik, cold.loglik, 1e-8));
    CHECK(close_rel(warm.wald_q, cold.wald_q, 1e-7));
    CHECK(close_rel(warm.deviance_z, cold.deviance_z, 1e-7));
  }
}

TEST_CASE("input validation") {
  const Family fam = make_family(FamilyKind::binomial_logit);
  Dataset bad;
  bad.y.resize(3);
  bad.y << 0, 1, 2;  // not 0/1 without trials
  bad.X = Eigen::MatrixXd::Random(3, 1);
  CHECK_THROWS_AS((void)fit_mle(fam, bad, ModelId::full_model(1)), validation_error);

  Dataset nan_x;
  nan_x.y.resize(3);
  nan_x.y << 0, 1, 0;
  nan_x.X.resize(3, 1);
  nan_x.X << 1.0, std::nan(""), 0.5;
  CHECK_THROWS_AS((void)fit_mle(fam, nan_x, ModelId::full_model(1)), validation_error);

  Dataset neg;
  neg.y.resize(3);
  neg.y << 1, -2, 0;
  neg.X = Eigen::MatrixXd::Random(3, 1);
  CHECK_THROWS_AS((void)fit_mle(make_family(FamilyKind::poisson_log), neg,
                                ModelId::full_model(1)),
                  validation_error);
}

TEST_CASE("probit tail helpers stay stable") {
  CHECK(close_rel(inverse_mills(0.0), std::sqrt(2.0 / M_PI), 1e-12));
  // far left tail: phi/Phi approaches -eta
  CHECK(close_rel(inverse_mills(-40.0), 40.0, 1e-2));
  CHECK(std::isfinite(log_normal_cdf(-300.0)));
  CHECK(close_rel(log_normal_cdf(-300.0), -45004.0, 1e-3));
  CHECK(std::abs(log_normal_cdf(8.0)) < 1e-14);
}

}  // TEST_SUITE
