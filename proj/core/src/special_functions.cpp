#include "chicglm/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "chicglm/errors.hpp"

namespace chicglm::sf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_strategy(const EvalStrategy& s) {
  if (!(s.rel_tol > 0.0 && s.rel_tol <= 1e-4))
    throw validation_error("EvalStrategy.rel_tol must lie in (0, 1e-4]");
  if (s.max_terms < 100) throw validation_error("EvalStrategy.max_terms must be >= 100");
}

// ---------------------------------------------------------------------------
// adaptive Gauss-Kronrod 7-15 in log space, positive integrands only

constexpr int kGkPoints = 15;
// K15 abscissae/weights on [-1,1]; wg is zero at pure Kronrod nodes
const double kGkNode[kGkPoints] = {
    -0.9914553711208126, -0.9491079123427585, -0.8648644233597691, -0.7415311855993944,
    -0.5860872354676911, -0.4058451513773972, -0.2077849550078985, 0.0,
    0.2077849550078985,  0.4058451513773972,  0.5860872354676911,  0.7415311855993944,
    0.8648644233597691,  0.9491079123427585,  0.9914553711208126};
const double kGkWeightK[kGkPoints] = {
    0.0229353220105292, 0.0630920926299785, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278,
    0.2044329400752989, 0.1903505780647854, 0.1690047266392679, 0.1406532597155259,
    0.1047900103222502, 0.0630920926299785, 0.0229353220105292};
const double kGkWeightG[kGkPoints] = {
    0.0, 0.1294849661688697, 0.0, 0.2797053914892767, 0.0, 0.3818300505051189, 0.0,
    0.4179591836734694, 0.0, 0.3818300505051189, 0.0, 0.2797053914892767, 0.0,
    0.1294849661688697, 0.0};

struct GkInterval {
  double lo, hi;
  double log_integral;
  double log_error;
};

GkInterval evaluate_gk(const std::function<double(double)>& logf, double lo, double hi) {
  const double c = 0.5 * (lo + hi);
  const double h = 0.5 * (hi - lo);
  double logs[kGkPoints];
  double m = kNegInf;
  for (int i = 0; i < kGkPoints; ++i) {
    logs[i] = logf(c + h * kGkNode[i]);
    if (logs[i] > m) m = logs[i];
  }
  GkInterval res{lo, hi, kNegInf, kNegInf};
  if (m == kNegInf) return res;
  double sk = 0.0, sg = 0.0;
  for (int i = 0; i < kGkPoints; ++i) {
    const double e = std::exp(logs[i] - m);
    sk += kGkWeightK[i] * e;
    sg += kGkWeightG[i] * e;
  }
  if (sk > 0.0) res.log_integral = m + std::log(h * sk);
  const double diff = h * std::abs(sk - sg);
  res.log_error = diff > 0.0 ? m + std::log(diff) : kNegInf;
  return res;
}

double log_adapt_gk(const std::function<double(double)>& logf, double lo, double hi,
                    double rel_tol) {
  std::vector<GkInterval> heap;
  heap.reserve(64);
  heap.push_back(evaluate_gk(logf, lo, hi));
  auto worse = [](const GkInterval& a, const GkInterval& b) { return a.log_error < b.log_error; };

  // running totals tracked in a shifted linear scale so splits are O(1)
  double shift_i = heap[0].log_integral, shift_e = heap[0].log_error;
  if (std::isinf(shift_i)) shift_i = 0.0;
  if (std::isinf(shift_e)) shift_e = 0.0;
  double tot_i = std::exp(heap[0].log_integral - shift_i);
  double tot_e = std::exp(heap[0].log_error - shift_e);

  const std::size_t max_intervals = 4096;
  const double min_width = 1e-14;

  while (heap.size() < max_intervals) {
    const double log_tot_i = tot_i > 0 ? shift_i + std::log(tot_i) : kNegInf;
    const double log_tot_e = tot_e > 0 ? shift_e + std::log(tot_e) : kNegInf;
    if (log_tot_e <= std::log(rel_tol) + log_tot_i || log_tot_e == kNegInf) break;

    std::pop_heap(heap.begin(), heap.end(), worse);
    GkInterval top = heap.back();
    heap.pop_back();
    if (top.hi - top.lo < min_width) {
      // cannot refine further; freeze this interval's error out of the budget
      top.log_error = kNegInf;
      heap.push_back(top);
      std::push_heap(heap.begin(), heap.end(), worse);
      break;
    }
    const double mid = 0.5 * (top.lo + top.hi);
    GkInterval left = evaluate_gk(logf, top.lo, mid);
    GkInterval right = evaluate_gk(logf, mid, top.hi);

    tot_i += std::exp(left.log_integral - shift_i) + std::exp(right.log_integral - shift_i) -
             std::exp(top.log_integral - shift_i);
    tot_e += std::exp(left.log_error - shift_e) + std::exp(right.log_error - shift_e) -
             std::exp(top.log_error - shift_e);
    tot_i = std::max(tot_i, 0.0);
    tot_e = std::max(tot_e, 0.0);
    // re-anchor the shifts if a child dwarfs the current scale
    const double big = std::max(left.log_integral, right.log_integral);
    if (big > shift_i + 250.0) {
      tot_i *= std::exp(shift_i - big);
      shift_i = big;
      tot_i += 0.0;
    }
    const double bige = std::max(left.log_error, right.log_error);
    if (bige > shift_e + 250.0) {
      tot_e *= std::exp(shift_e - bige);
      shift_e = bige;
    }

    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
  }

  // final assembly from scratch for full precision
  double m = kNegInf;
  for (const auto& iv : heap) m = std::max(m, iv.log_integral);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (const auto& iv : heap) s += std::exp(iv.log_integral - m);
  return m + std::log(s);
}

// ---------------------------------------------------------------------------
// series with positive terms, t0 = 1, caller provides t_{m+1}/t_m

template <typename RatioFn>
double log_series_positive(RatioFn ratio, double rel_tol, int max_terms, int consec_required = 6) {
  double sum = 1.0, term = 1.0, log_scale = 0.0;
  int consec = 0;
  for (int m = 0; m < max_terms; ++m) {
    const double r = ratio(m);
    term *= r;
    if (term == 0.0) break;
    sum += term;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += std::log(1e280);
    }
    if (term < rel_tol * sum && r < 1.0) {
      if (++consec >= consec_required) break;
    } else {
      consec = 0;
    }
    if (m == max_terms - 1)
      throw numeric_error("hypergeometric series failed to converge within max_terms");
  }
  return std::log(sum) + log_scale;
}

// signed variant: ratio may be negative; pos/neg partial sums kept separately
template <typename RatioFn>
LogValue log_series_signed(RatioFn ratio, double rel_tol, int max_terms, int consec_required = 6) {
  double pos = 1.0, neg = 0.0, term = 1.0, log_scale = 0.0;
  int consec = 0;
  for (int m = 0; m < max_terms; ++m) {
    const double r = ratio(m);
    term *= r;
    if (term == 0.0) break;
    (term > 0 ? pos : neg) += std::abs(term);
    const double mag = std::max(pos, neg);
    if (mag > 1e280) {
      pos *= 1e-280;
      neg *= 1e-280;
      term *= 1e-280;
      log_scale += std::log(1e280);
    }
    if (std::abs(term) < rel_tol * std::max(std::abs(pos - neg), rel_tol * mag) &&
        std::abs(r) < 1.0) {
      if (++consec >= consec_required) break;
    } else {
      consec = 0;
    }
    if (m == max_terms - 1)
      throw numeric_error("hypergeometric series failed to converge within max_terms");
  }
  const double diff = pos - neg;
  if (diff == 0.0) return LogValue{};
  return {std::log(std::abs(diff)) + log_scale, diff > 0 ? 1 : -1};
}

// 1F1 core for x >= 0 (callers normalize the sign of x first)
double log_1f1_nonneg(double a, double b, double x, const EvalStrategy& strategy) {
  if (x == 0.0) return 0.0;
  const bool quad_ok = b > a && a > 0;
  auto backend = strategy.backend;
  if (backend == EvalStrategy::Backend::auto_select)
    backend = (quad_ok && x > 3000.0) ? EvalStrategy::Backend::quadrature
                                      : EvalStrategy::Backend::series;
  if (backend == EvalStrategy::Backend::quadrature) {
    if (!quad_ok) throw numeric_error("1F1 quadrature needs b > a > 0");
    const double li = log_integrate_beta_kernel(
        a, b - a, [x](double log_u, double) { return x * std::exp(log_u); },
        std::max(strategy.rel_tol * 1e-2, 1e-14));
    return li - lbeta(b - a, a);
  }
  if (a > 0)
    return log_series_positive([a, b, x](int m) { return (a + m) * x / ((b + m) * (m + 1)); },
                               strategy.rel_tol, strategy.max_terms);
  const LogValue lv = log_series_signed(
      [a, b, x](int m) { return (a + m) * x / ((b + m) * (m + 1)); }, strategy.rel_tol,
      strategy.max_terms);
  if (lv.sign <= 0) throw numeric_error("1F1 series lost positivity");
  return lv.log_magnitude;
}

}  // namespace

double lbeta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double log_sub_exp(double a, double b) {
  if (b == kNegInf) return a;
  if (b >= a) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

double log_integrate_beta_kernel(double pow0, double pow1, const BetaSmoothLog& h,
                                 double rel_tol) {
  if (!(pow0 > 0.0) || !(pow1 > 0.0))
    throw numeric_error("beta kernel powers must be positive for an integrable endpoint");
  const double log_half = std::log(0.5);
  const double pL = pow0 < 1.0 ? 1.0 / pow0 : 1.0;
  const double pR = pow1 < 1.0 ? 1.0 / pow1 : 1.0;

  // u in (0, 1/2]: u = (1/2) t^pL kills the u^(pow0-1) singularity exactly
  auto left = [&](double t) {
    const double log_t = std::log(t);
    const double log_u = log_half + pL * log_t;
    const double u = std::exp(log_u);
    const double log_1mu = std::log1p(-u);
    return (pow0 - 1.0) * log_u + (pow1 - 1.0) * log_1mu + h(log_u, log_1mu) + log_half +
           std::log(pL) + (pL - 1.0) * log_t;
  };
  // u in [1/2, 1): 1-u = (1/2) s^pR
  auto right = [&](double s) {
    const double log_s = std::log(s);
    const double log_1mu = log_half + pR * log_s;
    const double omu = std::exp(log_1mu);
    const double log_u = std::log1p(-omu);
    return (pow0 - 1.0) * log_u + (pow1 - 1.0) * log_1mu + h(log_u, log_1mu) + log_half +
           std::log(pR) + (pR - 1.0) * log_s;
  };
  const double li = log_adapt_gk(left, 0.0, 1.0, rel_tol);
  const double ri = log_adapt_gk(right, 0.0, 1.0, rel_tol);
  return log_add_exp(li, ri);
}

LogValue log_kummer_1f1(double a, double b, double x, const EvalStrategy& strategy) {
  check_strategy(strategy);
  if (!(b > 0.0)) throw numeric_error("1F1 requires b > 0");
  if (x < 0.0) {
    // 13.2.27: 1F1(a,b,x) = e^x 1F1(b-a, b, -x); keeps series terms positive
    return {x + log_1f1_nonneg(b - a, b, -x, strategy), 1};
  }
  return {log_1f1_nonneg(a, b, x, strategy), 1};
}

LogValue log_gauss_2f1(double beta, double alpha, double gamma, double x,
                       const EvalStrategy& strategy) {
  check_strategy(strategy);
  if (x >= 1.0) throw numeric_error("2F1 requires x < 1");
  if (!(gamma > alpha && alpha > 0.0)) throw numeric_error("2F1 requires gamma > alpha > 0");
  if (beta == 0.0 || x == 0.0) return {0.0, 1};

  auto backend = strategy.backend;
  if (backend == EvalStrategy::Backend::auto_select) backend = EvalStrategy::Backend::quadrature;

  if (backend == EvalStrategy::Backend::quadrature) {
    const double li = log_integrate_beta_kernel(
        alpha, gamma - alpha,
        [beta, x](double log_u, double) { return -beta * std::log1p(-x * std::exp(log_u)); },
        std::max(strategy.rel_tol * 1e-2, 1e-14));
    return {li - lbeta(gamma - alpha, alpha), 1};
  }

  if (x > 0.0) {
    // term ratio tends to x < 1, so the direct series always converges here
    LogValue lv = log_series_signed(
        [beta, alpha, gamma, x](int m) {
          return (beta + m) * (alpha + m) * x / ((gamma + m) * (m + 1));
        },
        strategy.rel_tol, strategy.max_terms);
    return lv;
  }
  // x < 0: 15.3.4 maps to x/(x-1) inside (0,1)
  const double z = x / (x - 1.0);
  LogValue inner = log_series_signed(
      [beta, alpha, gamma, z](int m) {
        return (beta + m) * (gamma - alpha + m) * z / ((gamma + m) * (m + 1));
      },
      strategy.rel_tol, strategy.max_terms);
  inner.log_magnitude += -beta * std::log1p(-x);
  return inner;
}

LogValue log_humbert_phi1(double alpha, double beta, double gamma, double x, double y,
                          const EvalStrategy& strategy) {
  check_strategy(strategy);
  if (y >= 1.0) throw numeric_error("Phi1 requires y < 1");
  if (!(gamma > alpha && alpha > 0.0)) throw numeric_error("Phi1 requires gamma > alpha > 0");
  // degenerate slices collapse to one-argument series
  if (y == 0.0 || beta == 0.0) return log_kummer_1f1(alpha, gamma, x, strategy);
  if (x == 0.0) return log_gauss_2f1(beta, alpha, gamma, y, strategy);

  auto backend = strategy.backend;
  if (backend == EvalStrategy::Backend::auto_select) backend = EvalStrategy::Backend::quadrature;

  if (backend == EvalStrategy::Backend::quadrature) {
    const double li = log_integrate_beta_kernel(
        alpha, gamma - alpha,
        [beta, x, y](double log_u, double) {
          const double u = std::exp(log_u);
          return x * u - beta * std::log1p(-y * u);
        },
        std::max(strategy.rel_tol * 1e-2, 1e-14));
    return {li - lbeta(gamma - alpha, alpha), 1};
  }

  // sum over the y-powers; each slice collapses to a 1F1 in x
  //   Phi1 = sum_n (alpha)_n (beta)_n / ((gamma)_n n!) y^n 1F1(alpha+n, gamma+n, x)
  double log_coef = 0.0;
  int coef_sign = 1;
  double log_pos = kNegInf, log_neg = kNegInf;
  int consec = 0;
  for (int n = 0; n < strategy.max_terms; ++n) {
    const double inner = log_kummer_1f1(alpha + n, gamma + n, x, EvalStrategy::series(strategy.rel_tol))
                             .log_magnitude;
    const double log_term = log_coef + inner;
    if (coef_sign > 0)
      log_pos = log_add_exp(log_pos, log_term);
    else
      log_neg = log_add_exp(log_neg, log_term);

    const double log_total_mag = std::max(log_pos, log_neg);
    if (log_term < std::log(strategy.rel_tol) + log_total_mag) {
      if (++consec >= 50) break;
    } else {
      consec = 0;
    }

    const double factor = (alpha + n) * (beta + n) * y / ((gamma + n) * (n + 1));
    if (factor == 0.0) break;
    log_coef += std::log(std::abs(factor));
    if (factor < 0) coef_sign = -coef_sign;
    if (n == strategy.max_terms - 1)
      throw numeric_error("Phi1 series failed to converge within max_terms");
  }
  if (log_neg == kNegInf) return {log_pos, 1};
  if (log_pos > log_neg) return {log_sub_exp(log_pos, log_neg), 1};
  return {log_sub_exp(log_neg, log_pos), -1};
}

LogValue log_appell_f1(double alpha, double beta, double beta2, double gamma, double x, double y,
                       const EvalStrategy& strategy) {
  check_strategy(strategy);
  if (x >= 1.0 || y >= 1.0) throw numeric_error("F1 requires x < 1 and y < 1");
  if (!(gamma > alpha && alpha > 0.0)) throw numeric_error("F1 requires gamma > alpha > 0");

  auto backend = strategy.backend;
  if (backend == EvalStrategy::Backend::auto_select) backend = EvalStrategy::Backend::quadrature;

  if (backend == EvalStrategy::Backend::quadrature) {
    const double li = log_integrate_beta_kernel(
        alpha, gamma - alpha,
        [beta, beta2, x, y](double log_u, double) {
          const double u = std::exp(log_u);
          return -beta * std::log1p(-x * u) - beta2 * std::log1p(-y * u);
        },
        std::max(strategy.rel_tol * 1e-2, 1e-14));
    return {li - lbeta(gamma - alpha, alpha), 1};
  }

  // x-power slices, each a 2F1 in y
  double log_coef = 0.0;
  int coef_sign = 1;
  double log_pos = kNegInf, log_neg = kNegInf;
  int consec = 0;
  for (int m = 0; m < strategy.max_terms; ++m) {
    const LogValue inner =
        log_gauss_2f1(beta2, alpha + m, gamma + m, y, EvalStrategy::series(strategy.rel_tol));
    const double log_term = log_coef + inner.log_magnitude;
    if (coef_sign * inner.sign > 0)
      log_pos = log_add_exp(log_pos, log_term);
    else
      log_neg = log_add_exp(log_neg, log_term);

    const double log_total_mag = std::max(log_pos, log_neg);
    if (log_term < std::log(strategy.rel_tol) + log_total_mag) {
      if (++consec >= 50) break;
    } else {
      consec = 0;
    }

    const double factor = (alpha + m) * (beta + m) * x / ((gamma + m) * (m + 1));
    if (factor == 0.0) break;
    log_coef += std::log(std::abs(factor));
    if (factor < 0) coef_sign = -coef_sign;
    if (m == strategy.max_terms - 1)
      throw numeric_error("F1 series failed to converge within max_terms");
  }
  if (log_neg == kNegInf) return {log_pos, 1};
  if (log_pos > log_neg) return {log_sub_exp(log_pos, log_neg), 1};
  return {log_sub_exp(log_neg, log_pos), -1};
}

LogValue log_lower_incomplete_gamma(double a, double s) {
  if (!(a > 0.0)) throw numeric_error("incomplete gamma requires a > 0");
  if (s < 0.0) throw numeric_error("incomplete gamma requires s >= 0");
  if (s == 0.0) return LogValue{};

  if (s < a + 1.0) {
    // gamma(a,s) = s^a e^{-s} sum_n s^n / (a (a+1) ... (a+n))
    double sum = 1.0 / a, term = 1.0 / a;
    for (int n = 0; n < 10000; ++n) {
      term *= s / (a + 1.0 + n);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return {a * std::log(s) - s + std::log(sum), 1};
  }

  // continued fraction for the upper tail Q(a,s), then gamma = Gamma(a)(1 - Q)
  const double tiny = 1e-300;
  double b = s + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double hcf = d;
  for (int i = 1; i <= 10000; ++i) {
    const double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    hcf *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  const double gln = std::lgamma(a);
  const double log_q = -s + a * std::log(s) - gln + std::log(hcf);
  return {gln + std::log1p(-std::exp(log_q)), 1};
}

}  // namespace chicglm::sf
