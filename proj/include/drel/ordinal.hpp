#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "drel/data.hpp"
#include "drel/linalg.hpp"

namespace drel::ordinal {

using linalg::Matrix;
using linalg::Vector;

// A grouping factor with random effects. `slopes` holds the per-observation
// covariates that receive random slopes (n x s, s = 0 for intercept only);
// the term's effects are (intercept, slope_1, ..., slope_s) per level.
struct RandomTerm {
  std::string group;
  std::vector<std::size_t> level;  // level index per observation
  std::size_t n_levels = 0;
  std::vector<std::string> level_names;
  Matrix slopes;
  std::vector<std::string> slope_names;
  bool correlated = false;

  std::size_t effects_per_level() const { return 1 + static_cast<std::size_t>(slopes.cols()); }
  std::size_t n_variance_params() const {
    const auto q = effects_per_level();
    return correlated ? q * (q + 1) / 2 : q;
  }
};

// Responses, fixed-effect design (no intercept column: thresholds play that
// role) and random terms.
struct OrdinalProblem {
  int K = 5;
  std::vector<int> y;  // 1..K
  Matrix x;            // n x p
  std::vector<std::string> fixed_names;
  std::vector<RandomTerm> random;
  std::string formula;

  std::size_t n_obs() const { return y.size(); }
  /// FNV-1a over K and the response vector; nested fits compared by an LRT
  /// must share it.
  std::uint64_t fingerprint() const;
};

enum class Method { Exact, Aghq, Laplace };
std::string_view to_string(Method m);

struct VarianceComponent {
  std::string group;
  std::vector<std::string> effects;  // "(Intercept)", slope names
  Matrix covariance;                 // q x q
  bool boundary = false;             // estimate on the zero boundary
};

struct OrdinalFit {
  Vector thresholds;  // strictly increasing, K - 1 entries
  Vector beta;
  std::vector<std::string> fixed_names;
  Vector threshold_se;
  Vector beta_se;
  std::vector<VarianceComponent> varcomp;
  double loglik = 0.0;
  int n_params = 0;
  bool converged = false;
  Method method = Method::Exact;
  int quadrature_nodes = 0;
  int iterations = 0;
  std::string message;
  std::size_t n_obs = 0;
  int K = 0;
  std::uint64_t data_fingerprint = 0;
  std::string formula;
  std::vector<std::string> random_groups;
};

struct ClmOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-8;
  bool parallel = true;
};

struct ClmmOptions {
  int quadrature_nodes = 7;
  int max_iterations = 300;
  double gradient_tolerance = 1e-4;
  bool fix_zero_variance = false;  // fit with every random effect held at 0
  bool parallel = true;
  bool compute_standard_errors = true;
};

/// Maps unconstrained parameters (theta_1, log gaps..., beta) to thresholds.
Vector thresholds_from_params(const Vector& params, int K);
/// Inverse of thresholds_from_params for the threshold block.
Vector params_from_thresholds(const Vector& thresholds);

struct ClmDerivatives {
  double loglik = 0.0;
  Vector gradient;  // w.r.t. unconstrained params (theta_1, log gaps, beta)
  Matrix hessian;
};

/// Log-likelihood and analytic derivatives of the fixed-effects model at
/// unconstrained parameters.
ClmDerivatives clm_derivatives(const OrdinalProblem& data, const Vector& params, bool parallel = true);

/// Maximum-likelihood cumulative logit fit by Newton's method. Random terms
/// in `data` are ignored.
OrdinalFit clm_fit(const OrdinalProblem& data, const ClmOptions& opts = {});

/// Marginal log-likelihood of the mixed model at unconstrained parameters
/// (theta_1, log gaps, beta, variance params). Variance params per term are
/// the log diagonal of its Cholesky factor, followed (correlated terms) by
/// the strictly lower entries in row-major order.
double clmm_loglik(const OrdinalProblem& data, Method method, const Vector& params,
                   int quadrature_nodes = 7);

/// Mixed-model fit. Aghq requires exactly one intercept-only random term.
OrdinalFit clmm_fit(const OrdinalProblem& data, Method method, const ClmmOptions& opts = {});

struct LrtResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Likelihood-ratio test of nested fits on the same data.
LrtResult lrt(const OrdinalFit& null_fit, const OrdinalFit& full_fit);

/// "χ²(7) = 126.64, p < 0.001".
std::string format_lrt(const LrtResult& r);

/// Upper tail of the chi-square distribution, Q(df / 2, x / 2).
double chisq_sf(double x, int df);
/// Regularized upper incomplete gamma Q(s, x).
double gamma_q(double s, double x);
/// Two-sided normal p-value for a z statistic.
double normal_two_sided_p(double z);

/// Gauss-Hermite nodes and weights for weight function exp(-x^2).
void gauss_hermite(int q, std::vector<double>& nodes, std::vector<double>& weights);

// --- formulas -------------------------------------------------------------

/// Builds a problem from a formula such as
///   "confidence ~ kind + (kind | annotator) + (1 | du_pair)".
/// Fixed terms: "1", "0", "kind" (dummy coded, reference single_turn).
/// Random terms: "(1 | g)", "(kind | g)", "(1 + kind | g)" with
/// g in {annotator, du_pair, team, conversation}; "||" forces
/// uncorrelated effects, "|" uses `correlated`.
OrdinalProblem problem_from_formula(const Dataset& ds, const std::string& formula,
                                    bool correlated = false);

std::string fit_report(const OrdinalFit& fit);

}  // namespace drel::ordinal
