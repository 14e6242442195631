#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "drel/error.hpp"
#include "drel/linalg.hpp"
#include "drel/ordinal.hpp"

namespace drel::ordinal {

double gamma_q(double s, double x) {
  if (!(s > 0)) throw Error("ordinal", "gamma_q needs s > 0");
  if (x < 0 || std::isnan(x)) throw Error("ordinal", "gamma_q needs x >= 0");
  if (x == 0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double log_prefix = -x + s * std::log(x) - std::lgamma(s);
  constexpr double eps = 1e-17;
  if (x < s + 1.0) {
    // Series for the lower function P, then Q = 1 - P.
    double term = 1.0 / s;
    double sum = term;
    for (int n = 1; n < 10000; ++n) {
      term *= x / (s + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * eps) break;
    }
    return std::clamp(1.0 - sum * std::exp(log_prefix), 0.0, 1.0);
  }
  // Continued fraction for Q (modified Lentz).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < eps) break;
  }
  return std::clamp(std::exp(log_prefix) * h, 0.0, 1.0);
}

double chisq_sf(double x, int df) {
  if (df < 1) throw Error("ordinal", "chi-square needs df >= 1");
  if (x < 0 || std::isnan(x)) throw Error("ordinal", "chi-square statistic must be non-negative");
  return gamma_q(0.5 * df, 0.5 * x);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

void gauss_hermite(int q, std::vector<double>& nodes, std::vector<double>& weights) {
  if (q < 1) throw Error("ordinal", "Gauss-Hermite rule needs at least one node");
  // Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix.
  linalg::Matrix jac = linalg::Matrix::Zero(q, q);
  for (int i = 1; i < q; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(i / 2.0);
  const auto eig = linalg::symmetric_eigen(jac);
  nodes.resize(static_cast<std::size_t>(q));
  weights.resize(static_cast<std::size_t>(q));
  // Ascending nodes.
  for (int k = 0; k < q; ++k) {
    const int src = q - 1 - k;
    nodes[static_cast<std::size_t>(k)] = eig.values[src];
    const double v0 = eig.vectors(0, src);
    weights[static_cast<std::size_t>(k)] = std::sqrt(M_PI) * v0 * v0;
  }
}

LrtResult lrt(const OrdinalFit& null_fit, const OrdinalFit& full_fit) {
  if (null_fit.n_obs != full_fit.n_obs || null_fit.data_fingerprint != full_fit.data_fingerprint ||
      null_fit.K != full_fit.K) {
    throw Error("ordinal", "fits were not made on the same data");
  }
  if (null_fit.n_params > full_fit.n_params) {
    throw Error("ordinal", "fits are not nested: null has " + std::to_string(null_fit.n_params) +
                               " parameters, full has " + std::to_string(full_fit.n_params));
  }
  for (const auto& name : null_fit.fixed_names) {
    if (std::find(full_fit.fixed_names.begin(), full_fit.fixed_names.end(), name) ==
        full_fit.fixed_names.end()) {
      throw Error("ordinal", "fits are not nested: fixed effect '" + name + "' missing from full model");
    }
  }
  for (const auto& g : null_fit.random_groups) {
    if (std::find(full_fit.random_groups.begin(), full_fit.random_groups.end(), g) ==
        full_fit.random_groups.end()) {
      throw Error("ordinal", "fits are not nested: random term for '" + g + "' missing from full model");
    }
  }
  LrtResult r;
  r.statistic = std::max(0.0, 2.0 * (full_fit.loglik - null_fit.loglik));
  r.df = full_fit.n_params - null_fit.n_params;
  r.p_value = r.df == 0 ? 1.0 : chisq_sf(r.statistic, r.df);
  return r;
}

std::string format_lrt(const LrtResult& r) {
  std::string p = r.p_value < 0.001 ? "p < 0.001" : fmt::format("p = {:.3f}", r.p_value);
  return fmt::format("χ²({}) = {:.2f}, {}", r.df, r.statistic, p);
}

std::string fit_report(const OrdinalFit& fit) {
  std::ostringstream out;
  out << (fit.varcomp.empty() ? "Cumulative link model" : "Cumulative link mixed model")
      << " (logit link), method " << to_string(fit.method);
  if (fit.method == Method::Aghq) out << " (" << fit.quadrature_nodes << " nodes)";
  out << '\n';
  if (!fit.formula.empty()) out << "formula: " << fit.formula << '\n';
  out << fmt::format("n = {}, log-likelihood = {:.4f}, parameters = {}, converged = {}\n", fit.n_obs,
                     fit.loglik, fit.n_params, fit.converged ? "yes" : "no");
  if (!fit.message.empty()) out << "note: " << fit.message << '\n';

  out << "\nThresholds:\n";
  for (Eigen::Index j = 0; j < fit.thresholds.size(); ++j) {
    out << fmt::format("  {}|{}  {:>10.4f}  (SE {:.4f})\n", j + 1, j + 2, fit.thresholds[j],
                       fit.threshold_se.size() > j ? fit.threshold_se[j] : NAN);
  }
  if (fit.beta.size() > 0) {
    out << "\nFixed effects:\n";
    for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
      const double se = fit.beta_se.size() > j ? fit.beta_se[j] : NAN;
      const double z = fit.beta[j] / se;
      const double p = normal_two_sided_p(z);
      const std::string pstr = std::isnan(p) ? "NA" : p < 0.001 ? "p < 0.001" : fmt::format("p = {:.3f}", p);
      out << fmt::format("  {:<24} β = {:.2f}, SE = {:.3f}, z = {:.2f}, {}\n", fit.fixed_names[j],
                         fit.beta[j], se, z, pstr);
    }
  }
  if (!fit.varcomp.empty()) {
    out << "\nRandom effects:\n";
    for (const auto& vc : fit.varcomp) {
      for (std::size_t r = 0; r < vc.effects.size(); ++r) {
        const auto rr = static_cast<Eigen::Index>(r);
        out << fmt::format("  {:<12} {:<24} variance = {:.4f}, sd = {:.4f}{}\n", vc.group, vc.effects[r],
                           vc.covariance(rr, rr), std::sqrt(vc.covariance(rr, rr)),
                           vc.boundary ? " (boundary)" : "");
      }
    }
  }
  return out.str();
}

}  // namespace drel::ordinal
