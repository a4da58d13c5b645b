#pragma once

#include <cmath>
#include <cstdint>

#include "chicglm/family.hpp"

// Seeded fixtures shared across suites.  The generator is a bare LCG so every
// dataset is reproducible from constants in this file alone, independent of
// the library RNG.  Downstream fixtures continue one stream; the skip counts
// keep each builder callable on its own.
namespace testfix {

struct Lcg {
  std::uint64_t st;
  explicit Lcg(std::uint64_t seed) : st(seed) {}
  double next() {
    st = st * 6364136223846793005ULL + 1442695040888963407ULL;
    return static_cast<double>((st >> 11) % 1000000) / 1000000.0;
  }
  void skip(int k) {
    for (int i = 0; i < k; ++i) next();
  }
};

// n = 40, p = 2 logistic, eta = -0.3 + 1.2 x1 - 0.8 x2, stream offset 0
inline chicglm::Dataset logistic40() {
  Lcg g(12345);
  const int n = 40;
  chicglm::Dataset d;
  d.y.resize(n);
  d.X.resize(n, 2);
  d.column_names = {"x1", "x2"};
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = 2.0 * g.next() - 1.0;
    d.X(i, 1) = 2.0 * g.next() - 1.0;
    const double eta = -0.3 + 1.2 * d.X(i, 0) - 0.8 * d.X(i, 1);
    d.y(i) = g.next() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return d;
}

// n = 30, p = 2 gaussian with triangular-ish noise, stream offset 120
inline chicglm::Dataset gaussian30() {
  Lcg g(12345);
  g.skip(120);
  const int n = 30;
  chicglm::Dataset d;
  d.y.resize(n);
  d.X.resize(n, 2);
  d.column_names = {"x1", "x2"};
  for (int i = 0; i < n; ++i) {
    d.X(i, 0) = 2.0 * g.next() - 1.0;
    d.X(i, 1) = 2.0 * g.next() - 1.0;
    d.y(i) = 0.5 + 1.0 * d.X(i, 0) - 0.5 * d.X(i, 1) +
             (g.next() + g.next() + g.next() - 1.5);
  }
  return d;
}

// n = 40 poisson counts on the logistic40 design, stream offset 270
inline chicglm::Dataset poisson40() {
  chicglm::Dataset d = logistic40();
  Lcg g(12345);
  g.skip(270);
  for (int i = 0; i < d.n(); ++i) {
    const double mu = std::exp(0.2 + 0.5 * d.X(i, 0));
    double acc = std::exp(-mu), p = acc;
    const double u = g.next();
    int k = 0;
    while (u > acc && k < 50) {
      ++k;
      p *= mu / k;
      acc += p;
    }
    d.y(i) = k;
  }
  return d;
}

// n = 60, p = 3 logistic with one strong predictor, its own stream
inline chicglm::Dataset logistic60p3() {
  Lcg g(777);
  const int n = 60, p = 3;
  chicglm::Dataset d;
  d.y.resize(n);
  d.X.resize(n, p);
  d.column_names = {"x1", "x2", "x3"};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) d.X(i, j) = 2.0 * g.next() - 1.0;
    const double eta = -0.2 + 2.0 * d.X(i, 0);
    d.y(i) = g.next() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return d;
}

// diff <= tol * max(1, |want|); the floor keeps near-zero targets meaningful
inline bool close_rel(double got, double want, double tol) {
  return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

}  // namespace testfix
