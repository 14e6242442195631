#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference and an OpenMP version. The OpenMP versions return results that
// do not depend on the thread count:
//   - integer accumulations are exact;
//   - elementwise kernels evaluate the same expression per element;
//   - floating-point reductions sum fixed-size chunks and then combine the
//     chunk partials in chunk order.
// Serial and OpenMP floating-point reductions therefore agree to rounding,
// not bitwise; integer and elementwise kernels agree bitwise.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace drel::kernels {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kReductionChunk = 256;

// Log-likelihood, gradient and Hessian of a cumulative logit model with
// respect to (thresholds, beta), in that order.
struct ClmAccumulation {
  double loglik = 0.0;
  Vector gradient;
  Matrix hessian;
};

// Elementwise per-observation link terms: log-likelihood, dl/deta and
// -d2l/deta2 (the non-negative working weight).
struct LinkTerms {
  Vector loglik;
  Vector score;
  Vector weight;
};

// One group's contribution to an adaptive Gauss-Hermite marginal likelihood
// with a scalar random intercept u ~ N(0, sd^2).
struct AghqProblem {
  std::span<const double> eta;                 // fixed-effect predictor, all obs
  std::span<const int> y;                      // responses, all obs
  std::span<const double> thresholds;
  std::span<const std::vector<std::size_t>> groups;  // observation indices per group
  std::span<const double> nodes;               // Gauss-Hermite nodes (weight exp(-x^2))
  std::span<const double> log_weights;         // log of matching weights
  double sd = 0.0;
};

namespace serial {

/// O = A^T A.
IntMatrix cooccurrence(const IntMatrix& a);
/// Euclidean distances between rows.
Matrix pairwise_distances(const Matrix& points);
ClmAccumulation clm_accumulate(const Matrix& x, std::span<const int> y, const Vector& thresholds,
                               const Vector& beta);
LinkTerms link_terms(const Vector& eta, std::span<const int> y, const Vector& thresholds);
/// Per-group log integrals; returns false in `ok` for groups whose mode search failed.
std::vector<double> aghq_group_logliks(const AghqProblem& p, std::vector<char>& ok);

}  // namespace serial

namespace omp {

IntMatrix cooccurrence(const IntMatrix& a);
Matrix pairwise_distances(const Matrix& points);
ClmAccumulation clm_accumulate(const Matrix& x, std::span<const int> y, const Vector& thresholds,
                               const Vector& beta);
LinkTerms link_terms(const Vector& eta, std::span<const int> y, const Vector& thresholds);
std::vector<double> aghq_group_logliks(const AghqProblem& p, std::vector<char>& ok);

}  // namespace omp

// Shared building blocks (used by both variants).
namespace detail {

void clm_add_observation(const double* xrow, Eigen::Index p, int y, const Vector& thresholds,
                         double eta, ClmAccumulation& acc);
double aghq_one_group(const AghqProblem& p, std::size_t g, bool& ok);
ClmAccumulation zero_accumulation(Eigen::Index n_thresholds, Eigen::Index p);

}  // namespace detail

}  // namespace drel::kernels
