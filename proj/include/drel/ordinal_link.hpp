#pragma once

// Per-observation terms of the cumulative logit likelihood
//   l = log(F(theta_y - eta) - F(theta_{y-1} - eta)),  F logistic,
// with theta_0 = -inf and theta_K = +inf. Shared by the serial and OpenMP
// kernels and by the mixed-model code so every path evaluates the same
// floating-point expressions.

#include <cmath>
#include <limits>
#include <span>

namespace drel::ordinal::link {

inline double logistic(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Derivatives of log p with respect to the upper bound a = theta_y - eta and
// the lower bound b = theta_{y-1} - eta.
struct ObsTerms {
  double loglik = 0.0;
  double la = 0.0, lb = 0.0;                // first derivatives
  double laa = 0.0, lbb = 0.0, lab = 0.0;   // second derivatives
  bool has_upper = false, has_lower = false;

  double d_eta() const { return -(la + lb); }
  double d2_eta() const { return laa + 2.0 * lab + lbb; }
};

// `thresholds` has K-1 entries; y is 1-based in [1, K].
inline ObsTerms obs_terms(std::span<const double> thresholds, int y, double eta) {
  const int K = static_cast<int>(thresholds.size()) + 1;
  ObsTerms t;
  t.has_upper = y < K;
  t.has_lower = y > 1;
  const double a = t.has_upper ? thresholds[y - 1] - eta : std::numeric_limits<double>::infinity();
  const double b = t.has_lower ? thresholds[y - 2] - eta : -std::numeric_limits<double>::infinity();

  const double Fa = t.has_upper ? logistic(a) : 1.0;
  const double Fb = t.has_lower ? logistic(b) : 0.0;
  const double Sa = t.has_upper ? logistic(-a) : 0.0;  // 1 - F(a)
  const double Sb = t.has_lower ? logistic(-b) : 1.0;
  // Subtract on the side where the two terms are smaller.
  double p = (b > 0) ? Sb - Sa : Fa - Fb;
  if (!(p > 1e-300)) p = 1e-300;

  const double fa = Fa * Sa, fb = Fb * Sb;
  const double ga = fa * (Sa - Fa), gb = fb * (Sb - Fb);
  t.loglik = std::log(p);
  t.la = fa / p;
  t.lb = -fb / p;
  t.laa = ga / p - t.la * t.la;
  t.lbb = -gb / p - t.lb * t.lb;
  t.lab = -t.la * t.lb;
  return t;
}

}  // namespace drel::ordinal::link
