#include "chicglm/oracles.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "chicglm/rng.hpp"

namespace chicglm::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogTwoPi = 1.8378770664093454836;

double lse2(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// integration runs in linear space on exp(log f - scale); an absolute
// tolerance there makes negligible brackets converge immediately, which a
// per-bracket log comparison never does on power-law edges
double eval_scaled(const std::function<double(double)>& lf, double x, double scale) {
  const double v = lf(x);
  if (std::isnan(v)) throw numeric_error("integrand is NaN at " + std::to_string(x));
  if (std::isinf(v) && v > 0.0)
    throw numeric_error("integrand is infinite at " + std::to_string(x));
  return std::exp(v - scale);
}

double adapt(const std::function<double(double)>& lf, double scale, double a, double b,
             double fa, double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double flm = eval_scaled(lf, 0.5 * (a + m), scale);
  const double frm = eval_scaled(lf, 0.5 * (m + b), scale);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double total = left + right;
  const double err = total - whole;
  if (std::abs(err) <= 15.0 * tol) {
    const double refined = total + err / 15.0;
    return refined > 0.0 ? refined : total;
  }
  if (depth <= 0) {
    std::ostringstream os;
    os << "adaptive Simpson failed to converge on [" << a << ", " << b << "]";
    throw numeric_error(os.str());
  }
  return adapt(lf, scale, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(lf, scale, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double log_adaptive_simpson(const std::function<double(double)>& log_f, double lo, double hi,
                            double abs_tol) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw validation_error("integration interval must be finite with lo < hi");
  constexpr int kProbe = 16;
  double lf_at[kProbe + 1];
  double scale = kNegInf;
  for (int i = 0; i <= kProbe; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / kProbe;
    const double v = log_f(x);
    if (std::isnan(v)) throw numeric_error("integrand is NaN at " + std::to_string(x));
    if (std::isinf(v) && v > 0.0)
      throw numeric_error("integrand is infinite at " + std::to_string(x));
    lf_at[i] = v;
    scale = std::max(scale, v);
  }
  if (scale == kNegInf) return kNegInf;

  double trap = 0.0;
  for (int i = 0; i < kProbe; ++i)
    trap += 0.5 * (std::exp(lf_at[i] - scale) + std::exp(lf_at[i + 1] - scale));
  trap *= (hi - lo) / kProbe;
  const double fa = std::exp(lf_at[0] - scale);
  const double fm = std::exp(lf_at[kProbe / 2] - scale);
  const double fb = std::exp(lf_at[kProbe] - scale);
  const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol_lin = abs_tol * std::max(trap, whole);
  const double total = adapt(log_f, scale, lo, hi, fa, fm, fb, whole, tol_lin, 48);
  return total <= 0.0 ? kNegInf : scale + std::log(total);
}

double log_edge_integral(double pa, double pb, double upper,
                         const std::function<double(double, double)>& h, double abs_tol) {
  if (!(pa > 0.0) || !(pb > 0.0) || !(upper > 0.0))
    throw validation_error("edge integral needs positive powers and upper limit");
  // substitute u = (upper/2) t^m so the edge power m*p - 1 lands on an exact
  // integer; fractional powers below 1 defeat Simpson refinement at the edge
  auto edge_power = [](double p) { return p >= 2.0 ? 1.0 : (p <= 1.0 ? 1.0 : 2.0) / p; };
  auto snap = [](double e) {
    const double r = std::round(e);
    return std::abs(e - r) < 1e-9 ? r : e;
  };
  const double ml = edge_power(pa);
  const double mr = edge_power(pb);
  const double half = 0.5 * upper;
  const double lhalf = std::log(half);

  const double exl = snap(ml * pa - 1.0);
  auto left = [&](double t) {
    const double logt = std::log(t);
    const double log_u = lhalf + ml * logt;
    const double u = std::exp(log_u);
    const double tail = exl == 0.0 ? 0.0 : exl * logt;
    return (pa - 1.0) * lhalf + std::log(ml * half) + tail +
           (pb - 1.0) * std::log(upper - u) + h(log_u, u);
  };
  const double exr = snap(mr * pb - 1.0);
  auto right = [&](double s) {
    const double logs = std::log(s);
    const double log_w = lhalf + mr * logs;
    const double w = std::exp(log_w);
    const double u = upper - w;
    const double tail = exr == 0.0 ? 0.0 : exr * logs;
    return (pb - 1.0) * lhalf + std::log(mr * half) + tail + (pa - 1.0) * std::log(u) +
           h(std::log(u), u);
  };
  return lse2(log_adaptive_simpson(left, 0.0, 1.0, abs_tol),
              log_adaptive_simpson(right, 0.0, 1.0, abs_tol));
}

PriorDensity tcch_prior_density(const TcchParams& prior) {
  validate_tcch(prior);
  PriorDensity d;
  d.a = prior.a;
  d.b = prior.b;
  d.upper = 1.0 / prior.v;
  const double logv = std::log(prior.v);
  d.log_smooth = [prior, logv](double u) {
    return (0.5 * prior.b - 1.0) * logv - 0.5 * prior.s * u -
           prior.r * std::log(prior.kappa + (1.0 - prior.kappa) * prior.v * u);
  };
  d.log_norm = log_edge_integral(
      0.5 * prior.a, 0.5 * prior.b, d.upper,
      [&](double, double u) { return d.log_smooth(u); }, 1e-12);
  return d;
}

double quad_bf_over_u(const FitStats& fit, const FitStats& null_fit,
                      const PriorDensity& prior) {
  if (fit.model.is_null()) return 0.0;
  const double lead = 0.5 * fit.z + 0.5 * (null_fit.log_j_alpha - fit.log_j_alpha);
  const double half_p = 0.5 * fit.rank;
  const double q = fit.q;
  auto h = [&](double log_u, double u) {
    return prior.log_smooth(u) + half_p * log_u - 0.5 * q * u;
  };
  return lead + log_edge_integral(0.5 * prior.a, 0.5 * prior.b, prior.upper, h) -
         prior.log_norm;
}

double quad_bf_gaussian_over_u(double r_squared, int n, int p_m, const PriorDensity& prior) {
  if (p_m == 0) return 0.0;
  const double half_p = 0.5 * p_m, half_nm1 = 0.5 * (n - 1.0);
  auto h = [&](double log_u, double u) {
    return prior.log_smooth(u) + half_p * log_u -
           half_nm1 * std::log1p(r_squared * (u - 1.0));
  };
  return log_edge_integral(0.5 * prior.a, 0.5 * prior.b, prior.upper, h) - prior.log_norm;
}

double quad_bf_overdispersed_over_u(const FitStats& fit, const FitStats& null_fit,
                                    const PriorDensity& prior) {
  if (fit.model.is_null()) return 0.0;
  const double half_nm1 = 0.5 * (fit.n - 1.0);
  const double lead = 0.5 * (null_fit.log_j_alpha - fit.log_j_alpha) +
                      half_nm1 * std::log(null_fit.residual_deviance);
  const double half_p = 0.5 * fit.rank;
  const double q = fit.q, dev = fit.residual_deviance;
  auto h = [&](double log_u, double u) {
    return prior.log_smooth(u) + half_p * log_u - half_nm1 * std::log(u * q + dev);
  };
  return lead + log_edge_integral(0.5 * prior.a, 0.5 * prior.b, prior.upper, h) -
         prior.log_norm;
}

namespace {

// ----- self-contained GLM pieces (textbook forms, no shared optimizer) -----

double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

double plain_llvar(const Family& fam, const Dataset& data, const Eigen::VectorXd& eta) {
  const Eigen::Index n = data.y.size();
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = data.y(i), e = eta(i), w = fam.weight(i);
    switch (fam.kind) {
      case FamilyKind::binomial_logit:
        ll += y * e - w * (std::max(e, 0.0) + std::log1p(std::exp(-std::abs(e))));
        break;
      case FamilyKind::binomial_probit: {
        const double ph = norm_cdf(e), ph2 = norm_cdf(-e);
        ll += y * std::log(ph) + (w - y) * std::log(ph2);
        break;
      }
      case FamilyKind::poisson_log:
        ll += w * (y * e - std::exp(e));
        break;
      case FamilyKind::gaussian_identity:
        ll += -0.5 * w * (y - e) * (y - e) / fam.phi();
        break;
    }
  }
  return ll;
}

// score and Fisher (expected-information) weights used for the IRLS steps
void plain_step_derivs(const Family& fam, const Dataset& data, const Eigen::VectorXd& eta,
                       Eigen::VectorXd& score, Eigen::VectorXd& w_irls) {
  const Eigen::Index n = data.y.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = data.y(i), e = eta(i), w = fam.weight(i);
    switch (fam.kind) {
      case FamilyKind::binomial_logit: {
        const double mu = 1.0 / (1.0 + std::exp(-e));
        score(i) = y - w * mu;
        w_irls(i) = std::max(w * mu * (1.0 - mu), 1e-300);
        break;
      }
      case FamilyKind::binomial_probit: {
        const double ph = norm_cdf(e), pdf = norm_pdf(e);
        const double var = std::max(ph * (1.0 - ph), 1e-300);
        score(i) = pdf * (y - w * ph) / var;
        w_irls(i) = std::max(w * pdf * pdf / var, 1e-300);
        break;
      }
      case FamilyKind::poisson_log: {
        const double mu = std::exp(e);
        score(i) = w * (y - mu);
        w_irls(i) = std::max(w * mu, 1e-300);
        break;
      }
      case FamilyKind::gaussian_identity:
        score(i) = w * (y - e) / fam.phi();
        w_irls(i) = w / fam.phi();
        break;
    }
  }
}

// observed information diagonal at the solution; this is the curvature the
// evidence formulas are defined through
void plain_observed_d(const Family& fam, const Dataset& data, const Eigen::VectorXd& eta,
                      Eigen::VectorXd& d) {
  const Eigen::Index n = data.y.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = data.y(i), e = eta(i), w = fam.weight(i);
    switch (fam.kind) {
      case FamilyKind::binomial_logit: {
        const double mu = 1.0 / (1.0 + std::exp(-e));
        d(i) = w * mu * (1.0 - mu);
        break;
      }
      case FamilyKind::binomial_probit: {
        const double r = norm_pdf(e) / std::max(norm_cdf(e), 1e-300);
        const double rm = norm_pdf(e) / std::max(norm_cdf(-e), 1e-300);
        d(i) = y * r * (r + e) + (w - y) * rm * (rm - e);
        break;
      }
      case FamilyKind::poisson_log:
        d(i) = w * std::exp(e);
        break;
      case FamilyKind::gaussian_identity:
        d(i) = w / fam.phi();
        break;
    }
  }
}

struct PlainFit {
  double alpha = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd eta;
  Eigen::VectorXd d;
  double llvar = 0.0;
  double j_alpha = 0.0;
  Eigen::MatrixXd j_beta;
  double q = 0.0;
  bool ok = false;
};

PlainFit plain_fit(const Family& fam, const Dataset& data, const ModelId& model,
                   int max_iter = 300, double tol = 1e-13) {
  const int n = data.n();
  const int pm = model.size();
  const int k = pm + 1;
  Eigen::MatrixXd Z(n, k);
  Z.col(0).setOnes();
  {
    int c = 1;
    for (int j = 0; j < data.p(); ++j)
      if (model.includes(j)) Z.col(c++) = data.X.col(j);
  }

  PlainFit pf;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(k);
  {
    double ybar = 0.0, wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      ybar += data.y(i);
      wsum += fam.weight(i);
    }
    const double pbar = std::min(std::max(ybar / wsum, 1e-3), 1.0 - 1e-3);
    switch (fam.kind) {
      case FamilyKind::binomial_logit:
        theta(0) = std::log(pbar / (1.0 - pbar));
        break;
      case FamilyKind::binomial_probit:
        theta(0) = std::log(pbar / (1.0 - pbar)) / 1.702;
        break;
      case FamilyKind::poisson_log:
        theta(0) = std::log(std::max(ybar / wsum, 1e-3));
        break;
      case FamilyKind::gaussian_identity:
        theta(0) = ybar / n;
        break;
    }
  }

  Eigen::VectorXd eta(n), score(n), w_irls(n), grad(k), delta(k);
  Eigen::MatrixXd H(k, k);
  auto eta_at = [&](const Eigen::VectorXd& th) {
    Eigen::VectorXd e = Z * th;
    if (data.has_offset()) e += data.offset;
    return e;
  };
  eta = eta_at(theta);
  double ll = plain_llvar(fam, data, eta);
  for (int it = 0; it < max_iter; ++it) {
    plain_step_derivs(fam, data, eta, score, w_irls);
    grad = Z.transpose() * score;
    H = Z.transpose() * w_irls.asDiagonal() * Z;
    delta = H.ldlt().solve(grad);
    if (!delta.allFinite()) return pf;
    double step = 1.0;
    Eigen::VectorXd theta_try;
    double ll_try = kNegInf;
    for (int halve = 0; halve < 40; ++halve) {
      theta_try = theta + step * delta;
      ll_try = plain_llvar(fam, data, eta_at(theta_try));
      if (ll_try >= ll - 1e-9 * (std::abs(ll) + 1.0)) break;
      step *= 0.5;
    }
    const double change = ll_try - ll;
    theta = theta_try;
    eta = eta_at(theta);
    ll = ll_try;
    if (std::abs(change) <= tol * (1.0 + std::abs(ll))) {
      pf.ok = true;
      break;
    }
  }
  if (!pf.ok) return pf;

  pf.alpha = theta(0);
  pf.beta = theta.tail(pm);
  pf.eta = eta;
  pf.llvar = ll;
  pf.d.resize(n);
  plain_observed_d(fam, data, eta, pf.d);
  pf.j_alpha = pf.d.sum();
  if (!(pf.j_alpha > 0.0)) {
    pf.ok = false;
    return pf;
  }
  Eigen::MatrixXd Xc = Z.rightCols(pm);
  if (pm > 0) {
    const Eigen::RowVectorXd mean = (pf.d.transpose() * Xc) / pf.j_alpha;
    Xc.rowwise() -= mean;
    pf.j_beta = Xc.transpose() * pf.d.asDiagonal() * Xc;
    pf.q = pf.beta.dot(pf.j_beta * pf.beta);
  } else {
    pf.j_beta.resize(0, 0);
    pf.q = 0.0;
  }
  return pf;
}

FitStats plain_stats(const Family& fam, const Dataset& data, const ModelId& model,
                     const PlainFit& pf, const PlainFit& null_pf) {
  FitStats s;
  s.model = model;
  s.n = data.n();
  s.p_m = model.size();
  s.rank = s.p_m;
  s.q = pf.q;
  s.log_j_alpha = std::log(pf.j_alpha);
  s.converged = pf.ok;
  if (fam.gaussian_unknown_variance()) {
    const double rss = -2.0 * pf.llvar;
    const double rss0 = -2.0 * null_pf.llvar;
    s.z = s.n * std::log(rss0 / rss);
    s.residual_deviance = rss;
    double logw = 0.0;
    if (fam.trials_or_weights.size() > 0)
      for (int i = 0; i < s.n; ++i) logw += std::log(fam.weight(i));
    s.loglik = -0.5 * s.n * (std::log(2.0 * M_PI * rss / s.n) + 1.0) + 0.5 * logw;
  } else {
    s.z = 2.0 * (pf.llvar - null_pf.llvar);
    s.loglik = pf.llvar;  // constants cancel in every evidence difference
    s.residual_deviance = 0.0;
  }
  return s;
}

// ----- Student-t proposals -----

double draw_gamma(CounterRng& rng, double shape) {
  if (shape < 1.0)
    return draw_gamma(rng, shape + 1.0) * std::pow(rng.uniform_pos(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = rng.normal();
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.uniform_pos();
    if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
  }
}

double draw_beta(CounterRng& rng, double a, double b) {
  const double x = draw_gamma(rng, a);
  const double y = draw_gamma(rng, b);
  return x / (x + y);
}

double draw_chi2_4(CounterRng& rng) {
  return -2.0 * (std::log(rng.uniform_pos()) + std::log(rng.uniform_pos()));
}

// multivariate t(4) with covariance factor scale2 * J^{-1}; draws and log
// density share the Cholesky of J
struct TProposal {
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::VectorXd loc;
  double scale2 = 1.0;
  double half_logdet_j = 0.0;
  int dim = 0;

  void init(const Eigen::MatrixXd& J, const Eigen::VectorXd& mu, double s2) {
    dim = static_cast<int>(mu.size());
    loc = mu;
    scale2 = s2;
    llt.compute(J);
    if (llt.info() != Eigen::Success)
      throw numeric_error("information matrix is not positive definite");
    half_logdet_j = 0.0;
    for (int i = 0; i < dim; ++i)
      half_logdet_j += std::log(llt.matrixLLT()(i, i));
  }

  Eigen::VectorXd draw(CounterRng& rng) const {
    Eigen::VectorXd z(dim);
    for (int i = 0; i < dim; ++i) z(i) = rng.normal();
    const double c = draw_chi2_4(rng);
    Eigen::VectorXd x = llt.matrixU().solve(z);
    return loc + std::sqrt(scale2 * 4.0 / c) * x;
  }

  double log_pdf(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd v = x - loc;
    const double quad = (llt.matrixU() * v).squaredNorm() / scale2;
    return std::lgamma(0.5 * (4.0 + dim)) - std::lgamma(2.0) -
           0.5 * dim * std::log(4.0 * M_PI) + half_logdet_j -
           0.5 * dim * std::log(scale2) - 0.5 * (4.0 + dim) * std::log1p(quad / 4.0);
  }
};

struct StreamSummary {
  double log_mean = 0.0;
  double se_log = 0.0;
  double ess = 0.0;
};

StreamSummary summarize(const std::vector<double>& logw) {
  double mx = kNegInf;
  for (double w : logw) mx = std::max(mx, w);
  double s1 = 0.0, s2 = 0.0;
  for (double w : logw) {
    const double a = std::exp(w - mx);
    s1 += a;
    s2 += a * a;
  }
  const double nS = static_cast<double>(logw.size());
  const double mean = s1 / nS;
  double var = 0.0;
  for (double w : logw) {
    const double a = std::exp(w - mx) - mean;
    var += a * a;
  }
  var /= (nS - 1.0);
  StreamSummary out;
  out.log_mean = mx + std::log(mean);
  out.se_log = std::sqrt(var / nS) / mean;
  out.ess = s1 * s1 / s2;
  return out;
}

Eigen::VectorXd model_eta(const Dataset& data, const ModelId& model, double alpha,
                          const Eigen::VectorXd& beta) {
  Eigen::VectorXd eta = Eigen::VectorXd::Constant(data.n(), alpha);
  int c = 0;
  for (int j = 0; j < data.p(); ++j)
    if (model.includes(j)) eta += beta(c++) * data.X.col(j);
  if (data.has_offset()) eta += data.offset;
  return eta;
}

}  // namespace

ISEstimate importance_sampling_bf(const Family& family, const Dataset& data,
                                  const ModelId& model, double g, std::uint64_t samples,
                                  std::uint64_t seed) {
  if (samples < 1000) throw validation_error("importance sampling needs >= 1000 samples");
  if (!(g > 0.0)) throw validation_error("importance sampling needs g > 0");
  if (family.gaussian_unknown_variance())
    throw validation_error("importance sampling needs a known dispersion");
  data.validate();
  if (model.is_null()) return {0.0, 0.0, samples, seed};

  const PlainFit pf = plain_fit(family, data, model);
  const PlainFit nf = plain_fit(family, data, ModelId::null_model(data.p()));
  if (!pf.ok || !nf.ok) throw numeric_error("proposal centering fit did not converge");

  const int pm = model.size();
  const double shrink = g / (1.0 + g);
  TProposal q_alpha, q_beta, q_alpha0;
  q_alpha.init(Eigen::MatrixXd::Constant(1, 1, pf.j_alpha),
               Eigen::VectorXd::Constant(1, pf.alpha), 1.0);
  q_beta.init(pf.j_beta, shrink * pf.beta, shrink);
  q_alpha0.init(Eigen::MatrixXd::Constant(1, 1, nf.j_alpha),
                Eigen::VectorXd::Constant(1, nf.alpha), 1.0);

  // log N(beta; 0, g J^{-1}) up to the quadratic form
  const double prior_const =
      -0.5 * pm * (std::log(g) + kLogTwoPi) + q_beta.half_logdet_j;

  CounterRng base(seed);
  CounterRng rng_m = base.split(1), rng_0 = base.split(2);
  std::vector<double> wm(samples), w0(samples);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Eigen::VectorXd av = q_alpha.draw(rng_m);
    const Eigen::VectorXd bv = q_beta.draw(rng_m);
    const double lp = plain_llvar(family, data, model_eta(data, model, av(0), bv));
    const double lprior =
        prior_const - 0.5 * (q_beta.llt.matrixU() * bv).squaredNorm() / g;
    wm[s] = lp + lprior - q_alpha.log_pdf(av) - q_beta.log_pdf(bv);

    const Eigen::VectorXd a0 = q_alpha0.draw(rng_0);
    const double lp0 = plain_llvar(
        family, data, model_eta(data, ModelId::null_model(data.p()), a0(0), {}));
    w0[s] = lp0 - q_alpha0.log_pdf(a0);
  }
  const StreamSummary sm = summarize(wm), s0 = summarize(w0);
  if (sm.ess < 50.0 || s0.ess < 50.0)
    throw numeric_error("importance sampling is unstable: effective sample size below 50");
  ISEstimate out;
  out.log_value = sm.log_mean - s0.log_mean;
  out.mc_standard_error = std::sqrt(sm.se_log * sm.se_log + s0.se_log * s0.se_log);
  out.samples = samples;
  out.seed = seed;
  return out;
}

IsCoefficients is_coefficient_mean(const Family& family, const Dataset& data,
                                   const ModelId& model, const TcchParams& prior,
                                   std::uint64_t samples, std::uint64_t seed) {
  if (samples < 1000) throw validation_error("importance sampling needs >= 1000 samples");
  if (family.gaussian_unknown_variance())
    throw validation_error("importance sampling needs a known dispersion");
  validate_tcch(prior);
  data.validate();
  if (model.is_null()) throw validation_error("coefficient sampler needs a non-null model");

  const PlainFit pf = plain_fit(family, data, model);
  if (!pf.ok) throw numeric_error("proposal centering fit did not converge");
  const int pm = model.size();

  TProposal q_alpha, q_beta;
  q_alpha.init(Eigen::MatrixXd::Constant(1, 1, pf.j_alpha),
               Eigen::VectorXd::Constant(1, pf.alpha), 1.0);
  q_beta.init(pf.j_beta, pf.beta, 1.0);

  CounterRng rng(seed);
  std::vector<double> logw(samples);
  Eigen::MatrixXd draws(pm + 1, samples);
  const double ta = 0.5 * prior.a, tb = 0.5 * prior.b;
  for (std::uint64_t s = 0; s < samples; ++s) {
    double u = draw_beta(rng, ta, tb) / prior.v;
    u = std::min(u, 1.0 / prior.v - 1e-14);
    const double g = (1.0 - u) / u;
    const double shrink = 1.0 - u;
    const double extra = -0.5 * prior.s * u -
                         prior.r * std::log(prior.kappa + (1.0 - prior.kappa) * prior.v * u);

    const Eigen::VectorXd av = q_alpha.draw(rng);
    q_beta.loc = shrink * pf.beta;
    q_beta.scale2 = shrink;
    const Eigen::VectorXd bv = q_beta.draw(rng);

    const double lp = plain_llvar(family, data, model_eta(data, model, av(0), bv));
    const double lprior = -0.5 * pm * (std::log(g) + kLogTwoPi) + q_beta.half_logdet_j -
                          0.5 * (q_beta.llt.matrixU() * bv).squaredNorm() / g;
    logw[s] = lp + lprior + extra - q_alpha.log_pdf(av) - q_beta.log_pdf(bv);
    draws(0, s) = av(0);
    draws.col(s).tail(pm) = bv;
  }

  double mx = kNegInf;
  for (double w : logw) mx = std::max(mx, w);
  Eigen::VectorXd omega(samples);
  for (std::uint64_t s = 0; s < samples; ++s) omega(s) = std::exp(logw[s] - mx);
  const double total = omega.sum();
  omega /= total;

  IsCoefficients out;
  out.mean = draws * omega;
  out.mc_se.resize(pm + 1);
  for (int i = 0; i <= pm; ++i) {
    double acc = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
      const double dcent = draws(i, s) - out.mean(i);
      acc += omega(s) * omega(s) * dcent * dcent;
    }
    out.mc_se(i) = std::sqrt(acc);
  }
  out.ess = 1.0 / omega.squaredNorm();
  out.samples = samples;
  out.seed = seed;
  if (out.ess < 50.0)
    throw numeric_error("importance sampling is unstable: effective sample size below 50");
  return out;
}

ModelPosterior brute_force_posterior(const Family& family, const Dataset& data,
                                     const HyperRule& rule, const ModelPrior& prior) {
  data.validate();
  const int p = data.p();
  if (p > 12) throw validation_error("brute-force enumeration is capped at p <= 12");
  if (rule.kind == RuleKind::jeffreys)
    throw validation_error("jeffreys evidence is indeterminate against the null model");

  const PlainFit null_pf = plain_fit(family, data, ModelId::null_model(p));
  if (!null_pf.ok) throw numeric_error("null model fit did not converge");
  const FitStats null_stats =
      plain_stats(family, data, ModelId::null_model(p), null_pf, null_pf);

  ModelPosterior post;
  post.coverage = ModelPosterior::Coverage::exact_enumeration;
  post.p = p;
  const std::uint64_t count = std::uint64_t{1} << p;
  for (std::uint64_t bits = 0; bits < count; ++bits) {
    const ModelId model(bits, p);
    ModelEntry e;
    e.model = model;
    try {
      const PlainFit pf = bits == 0 ? null_pf : plain_fit(family, data, model);
      if (!pf.ok) throw numeric_error("fit did not converge");
      const FitStats stats = plain_stats(family, data, model, pf, null_pf);
      const Evidence ev = evidence_for(rule, family, stats, null_stats, p);
      if (!ev.valid) throw numeric_error("invalid evidence");
      e.log_evidence = ev.log_bf_vs_null;
    } catch (const numeric_error&) {
      post.excluded.push_back(model);
      continue;
    }
    e.log_prior = model_log_prior(model, prior, p);
    post.entries.push_back(std::move(e));
  }
  if (post.entries.empty()) throw numeric_error("every model was excluded");

  double mx = kNegInf;
  for (const auto& e : post.entries) mx = std::max(mx, e.log_evidence + e.log_prior);
  double total = 0.0;
  for (const auto& e : post.entries) total += std::exp(e.log_evidence + e.log_prior - mx);
  for (auto& e : post.entries) e.prob = std::exp(e.log_evidence + e.log_prior - mx) / total;
  return post;
}

}  // namespace chicglm::oracle
