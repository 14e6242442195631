#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "drel/linalg.hpp"

namespace drel::manifold {

using linalg::Matrix;

enum class Init { Spectral, Random };

struct UmapConfig {
  int n_neighbors = 5;  // clamped to n - 1 (with a warning)
  double min_dist = 0.1;
  double spread = 1.0;
  int epochs = 500;
  std::uint64_t seed = 0;
  int negative_samples = 5;
  Init init = Init::Spectral;
};

struct SmoothKnn {
  double rho = 0.0;
  double sigma = 0.0;
  bool clamped = false;  // no root inside the bracket; sigma sits on a bound
};

/// Solves sum_j exp(-max(0, d_j - rho) / sigma) = target with rho = dists[0],
/// bisecting sigma inside [1e-3, 1e3] * mean(dists).
SmoothKnn smooth_knn_scale(std::span<const double> dists, double target);

/// Symmetric fuzzy k-NN membership graph (zero diagonal, weights in [0, 1]).
/// `n_neighbors` is clamped to n - 1; the clamp is reported in `warnings`.
Matrix fuzzy_graph(const Matrix& points, const UmapConfig& cfg,
                   std::vector<std::string>* warnings = nullptr);

struct CurveParams {
  double a = 0.0;
  double b = 0.0;
};

/// Least-squares fit of 1 / (1 + a x^{2b}) to the min_dist/spread target curve.
CurveParams fit_curve(double min_dist, double spread);

struct Projection {
  Matrix coords;  // n x 2
  std::vector<std::string> names;
  UmapConfig config;
  int n_neighbors_used = 0;
  bool spectral_init_used = false;
  std::vector<std::string> warnings;
};

Projection project(const Matrix& points, const UmapConfig& cfg, std::vector<std::string> names = {});

/// Trustworthiness of a low-dimensional layout with respect to the original
/// points (1 = every low-dimensional neighbour is a true neighbour).
double trustworthiness(const Matrix& high, const Matrix& low, int k);

}  // namespace drel::manifold
