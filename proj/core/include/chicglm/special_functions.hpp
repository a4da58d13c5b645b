#pragma once

#include <cmath>
#include <functional>
#include <limits>

namespace chicglm::sf {

// sign * exp(log_magnitude); zero is encoded as {-inf, +1}
struct LogValue {
  double log_magnitude = -std::numeric_limits<double>::infinity();
  int sign = 1;

  static LogValue from_log(double lm, int s = 1) { return {lm, s}; }
  static LogValue from_value(double v) {
    if (v == 0.0) return {-std::numeric_limits<double>::infinity(), 1};
    return {std::log(std::abs(v)), v > 0 ? 1 : -1};
  }
  double value() const { return sign * std::exp(log_magnitude); }
  bool is_zero() const { return std::isinf(log_magnitude) && log_magnitude < 0; }
};

struct EvalStrategy {
  enum class Backend { auto_select, series, quadrature };
  Backend backend = Backend::auto_select;
  double rel_tol = 1e-10;
  int max_terms = 1000000;

  static EvalStrategy series(double tol = 1e-10) { return {Backend::series, tol, 1000000}; }
  static EvalStrategy quadrature(double tol = 1e-10) { return {Backend::quadrature, tol, 1000000}; }
};

double lbeta(double a, double b);

// log(exp(a) + exp(b)) and log(exp(a) - exp(b)), a >= b for the difference
double log_add_exp(double a, double b);
double log_sub_exp(double a, double b);

// Kummer confluent hypergeometric 1F1(a, b, x).  Negative x is routed through
// the 13.2.27 transform so series terms stay positive whenever b > a.
LogValue log_kummer_1f1(double a, double b, double x, const EvalStrategy& strategy = {});

// Gauss hypergeometric in the paper's argument order: 2F1(beta, alpha; gamma; x)
// with the Euler integral running over u^(alpha-1).  Requires gamma > alpha > 0, x < 1.
LogValue log_gauss_2f1(double beta, double alpha, double gamma, double x,
                       const EvalStrategy& strategy = {});

// Humbert Phi1(alpha, beta, gamma, x, y) in Gordy's convention:
// int_0^1 u^(alpha-1) (1-u)^(gamma-alpha-1) (1-y u)^(-beta) e^(x u) du / B(gamma-alpha, alpha).
// Requires gamma > alpha > 0, y < 1.
LogValue log_humbert_phi1(double alpha, double beta, double gamma, double x, double y,
                          const EvalStrategy& strategy = {});

// Appell F1(alpha; beta, beta2; gamma; x, y); gamma > alpha > 0, x < 1, y < 1.
LogValue log_appell_f1(double alpha, double beta, double beta2, double gamma, double x, double y,
                       const EvalStrategy& strategy = {});

// Lower incomplete gamma(a, s), a > 0, s >= 0.
LogValue log_lower_incomplete_gamma(double a, double s);

// Adaptive log-space quadrature of
//   int_0^1 u^(pow0 - 1) (1-u)^(pow1 - 1) exp(h(u)) du
// where h is supplied through (log_u, log_1mu) so endpoints never evaluate
// log(0) of the smooth part.  Endpoint singularities (pow0 < 1 or pow1 < 1)
// are flattened by power substitutions before subdivision.  The integrand must
// be positive; result is the log of the integral.
using BetaSmoothLog = std::function<double(double log_u, double log_1mu)>;
double log_integrate_beta_kernel(double pow0, double pow1, const BetaSmoothLog& h,
                                 double rel_tol = 1e-12);

}  // namespace chicglm::sf
