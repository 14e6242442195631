#include "drel/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drel/error.hpp"
#include "drel/kernels.hpp"
#include "drel/rng.hpp"

namespace drel::manifold {

namespace {

void check_points(const Matrix& points) {
  if (points.rows() < 3) {
    throw Error("manifold", "need at least 3 points, got " + std::to_string(points.rows()));
  }
  if (!points.allFinite()) throw Error("manifold", "input has non-finite entries");
}

int clamp_neighbors(int requested, Eigen::Index n, std::vector<std::string>* warnings) {
  if (requested < 2) throw Error("manifold", "n_neighbors must be at least 2");
  const int limit = static_cast<int>(n - 1);
  if (requested > limit) {
    if (warnings) {
      warnings->push_back("n_neighbors " + std::to_string(requested) + " clamped to " +
                          std::to_string(limit) + " (n = " + std::to_string(n) + ")");
    }
    return limit;
  }
  return requested;
}

// Indices of the k nearest other points of i, ordered by (distance, index).
std::vector<Eigen::Index> nearest(const Matrix& dist, Eigen::Index i, int k) {
  std::vector<Eigen::Index> idx;
  idx.reserve(dist.rows() - 1);
  for (Eigen::Index j = 0; j < dist.rows(); ++j) {
    if (j != i) idx.push_back(j);
  }
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return dist(i, a) < dist(i, b); });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

std::size_t count_components(const Matrix& w) {
  const Eigen::Index n = w.rows();
  std::vector<int> comp(n, -1);
  std::size_t count = 0;
  for (Eigen::Index s = 0; s < n; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<Eigen::Index> stack{s};
    comp[s] = static_cast<int>(count);
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      for (Eigen::Index v = 0; v < n; ++v) {
        if (w(u, v) > 0 && comp[v] < 0) {
          comp[v] = static_cast<int>(count);
          stack.push_back(v);
        }
      }
    }
    ++count;
  }
  return count;
}

// Eigenvectors 2 and 3 of the symmetric normalised Laplacian.
Matrix spectral_layout(const Matrix& w) {
  const Eigen::Index n = w.rows();
  linalg::Vector dinv(n);
  for (Eigen::Index i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(w.row(i).sum());
  Matrix lap = -(dinv.asDiagonal() * w * dinv.asDiagonal());
  lap.diagonal().array() += 1.0;
  const auto eig = linalg::symmetric_eigen(lap);
  // Eigenvalues are descending; the trivial eigenvector is the last column.
  Matrix out(n, 2);
  out.col(0) = eig.vectors.col(n - 2);
  out.col(1) = eig.vectors.col(n - 3);
  return out;
}

void rescale_to_box(Matrix& y) {
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    const double lo = y.col(c).minCoeff();
    const double hi = y.col(c).maxCoeff();
    const double range = hi - lo;
    if (range > 0) {
      y.col(c) = (y.col(c).array() - lo) * (10.0 / range);
    } else {
      y.col(c).setZero();
    }
  }
}

double clip(double v) { return std::clamp(v, -4.0, 4.0); }

}  // namespace

SmoothKnn smooth_knn_scale(std::span<const double> dists, double target) {
  if (dists.size() < 2) throw Error("manifold", "smooth_knn_scale needs at least 2 distances");
  SmoothKnn out;
  out.rho = dists[0];
  const double mean = std::accumulate(dists.begin(), dists.end(), 0.0) / static_cast<double>(dists.size());
  auto mass = [&](double sigma) {
    double s = 0.0;
    for (double d : dists) s += std::exp(-std::max(0.0, d - out.rho) / sigma);
    return s;
  };
  if (!(mean > 0)) {
    // All distances zero: every weight is 1 whatever sigma is.
    out.sigma = 1e-3;
    out.clamped = true;
    return out;
  }
  double lo = 1e-3 * mean;
  double hi = 1e3 * mean;
  if (mass(lo) >= target) {
    out.sigma = lo;
    out.clamped = true;
    return out;
  }
  if (mass(hi) <= target) {
    out.sigma = hi;
    out.clamped = true;
    return out;
  }
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) > target) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (mid == lo && mid == hi) break;
  }
  out.sigma = 0.5 * (lo + hi);
  return out;
}

Matrix fuzzy_graph(const Matrix& points, const UmapConfig& cfg, std::vector<std::string>* warnings) {
  check_points(points);
  const Eigen::Index n = points.rows();
  const int k = clamp_neighbors(cfg.n_neighbors, n, warnings);
  const Matrix dist = kernels::omp::pairwise_distances(points);
  const double target = std::log2(static_cast<double>(k));

  Matrix directed = Matrix::Zero(n, n);
  std::vector<double> d(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto nn = nearest(dist, i, k);
    for (int j = 0; j < k; ++j) d[j] = dist(i, nn[j]);
    const auto scale = smooth_knn_scale(d, target);
    for (int j = 0; j < k; ++j) {
      directed(i, nn[j]) = std::exp(-std::max(0.0, d[j] - scale.rho) / scale.sigma);
    }
  }
  Matrix w = directed + directed.transpose() - directed.cwiseProduct(directed.transpose());
  w.diagonal().setZero();
  return w;
}

CurveParams fit_curve(double min_dist, double spread) {
  if (!(spread > 0)) throw Error("manifold", "spread must be positive");
  if (min_dist < 0 || !(min_dist < 10.0 * spread)) {
    throw Error("manifold", "min_dist must lie in [0, 10 * spread)");
  }
  constexpr int kSamples = 300;
  std::vector<double> xs(kSamples), ys(kSamples);
  for (int i = 0; i < kSamples; ++i) {
    xs[i] = 3.0 * spread * i / (kSamples - 1);
    ys[i] = xs[i] <= min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
  }

  // Levenberg-Marquardt on (a, b).
  auto residuals = [&](double a, double b, Eigen::Matrix<double, kSamples, 1>& r,
                       Eigen::Matrix<double, kSamples, 2>* jac) {
    for (int i = 0; i < kSamples; ++i) {
      const double x = xs[i];
      const double u = x > 0 ? std::pow(x, 2.0 * b) : 0.0;
      const double den = 1.0 + a * u;
      r[i] = 1.0 / den - ys[i];
      if (jac) {
        (*jac)(i, 0) = -u / (den * den);
        (*jac)(i, 1) = x > 0 ? -a * u * 2.0 * std::log(x) / (den * den) : 0.0;
      }
    }
    return r.squaredNorm();
  };

  double a = 1.0, b = 1.0, lambda = 1e-3;
  Eigen::Matrix<double, kSamples, 1> r;
  Eigen::Matrix<double, kSamples, 2> jac;
  double cost = residuals(a, b, r, &jac);
  bool done = false;
  for (int it = 0; it < 500 && !done; ++it) {
    const Eigen::Matrix2d jtj = jac.transpose() * jac;
    const Eigen::Vector2d g = jac.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) break;
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::Matrix2d lhs = jtj;
      lhs.diagonal() *= (1.0 + lambda);
      const Eigen::Vector2d step = -lhs.ldlt().solve(g);
      const double na = a + step[0], nb = b + step[1];
      Eigen::Matrix<double, kSamples, 1> nr;
      if (na > 0 && nb > 0) {
        const double ncost = residuals(na, nb, nr, nullptr);
        if (ncost < cost) {
          const double rel = (cost - ncost) / std::max(cost, 1e-300);
          a = na;
          b = nb;
          cost = residuals(a, b, r, &jac);
          lambda = std::max(lambda * 0.3, 1e-12);
          improved = true;
          done = rel < 1e-15;
        }
      }
      if (!improved) lambda *= 10.0;
    }
    if (!improved) break;
  }
  return {a, b};
}

Projection project(const Matrix& points, const UmapConfig& cfg, std::vector<std::string> names) {
  check_points(points);
  if (cfg.epochs < 1) throw Error("manifold", "epochs must be positive");
  if (cfg.negative_samples < 0) throw Error("manifold", "negative_samples must be non-negative");
  const Eigen::Index n = points.rows();
  Projection out;
  out.config = cfg;
  out.names = std::move(names);
  if (out.names.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) out.names.push_back(std::to_string(i));
  }
  if (static_cast<Eigen::Index>(out.names.size()) != n) {
    throw Error("manifold", "names length does not match point count");
  }
  out.n_neighbors_used = clamp_neighbors(cfg.n_neighbors, n, &out.warnings);
  const Matrix w = fuzzy_graph(points, cfg);
  const auto curve = fit_curve(cfg.min_dist, cfg.spread);

  CounterRng rng(cfg.seed, 1);
  Matrix y(n, 2);
  if (cfg.init == Init::Spectral) {
    if (count_components(w) == 1) {
      y = spectral_layout(w);
      out.spectral_init_used = true;
    } else {
      out.warnings.push_back("graph is disconnected; spectral init replaced by random init");
    }
  }
  if (!out.spectral_init_used) {
    CounterRng init_rng(cfg.seed, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) y(i, c) = 20.0 * init_rng.uniform() - 10.0;
    }
  }
  rescale_to_box(y);

  // Directed edge list (both orientations), weights below max / epochs dropped.
  struct Edge {
    Eigen::Index head, tail;
    double epochs_per_sample;
  };
  std::vector<Edge> edges;
  const double wmax = w.maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (w(i, j) > 0 && w(i, j) >= wmax / cfg.epochs) edges.push_back({i, j, wmax / w(i, j)});
    }
  }

  const double a = curve.a, b = curve.b;
  const int neg = cfg.negative_samples;
  std::vector<double> next_sample(edges.size());
  std::vector<double> neg_per_sample(edges.size());
  std::vector<double> next_neg(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    next_sample[e] = edges[e].epochs_per_sample;
    neg_per_sample[e] = neg > 0 ? edges[e].epochs_per_sample / neg : 0.0;
    next_neg[e] = neg_per_sample[e];
  }

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double alpha = 1.0 - static_cast<double>(epoch) / cfg.epochs;
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (next_sample[e] > epoch) continue;
      const auto i = edges[e].head;
      const auto j = edges[e].tail;
      double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
      double d2 = dx * dx + dy * dy;
      if (d2 > 0) {
        const double coeff = (-2.0 * a * b * std::pow(d2, b - 1.0)) / (a * std::pow(d2, b) + 1.0);
        const double gx = clip(coeff * dx) * alpha, gy = clip(coeff * dy) * alpha;
        y(i, 0) += gx;
        y(i, 1) += gy;
        y(j, 0) -= gx;
        y(j, 1) -= gy;
      }
      next_sample[e] += edges[e].epochs_per_sample;

      if (neg > 0) {
        const auto n_neg = static_cast<int>((epoch - next_neg[e]) / neg_per_sample[e]);
        for (int p = 0; p < n_neg; ++p) {
          const auto k = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
          if (k == i) continue;
          dx = y(i, 0) - y(k, 0);
          dy = y(i, 1) - y(k, 1);
          d2 = dx * dx + dy * dy;
          double gx = 4.0, gy = 4.0;
          if (d2 > 0) {
            const double coeff = (2.0 * b) / ((0.001 + d2) * (a * std::pow(d2, b) + 1.0));
            gx = clip(coeff * dx);
            gy = clip(coeff * dy);
          }
          y(i, 0) += gx * alpha;
          y(i, 1) += gy * alpha;
        }
        next_neg[e] += n_neg * neg_per_sample[e];
      }
    }
  }
  if (!y.allFinite()) throw Error("manifold", "layout diverged to non-finite coordinates");
  out.coords = std::move(y);
  return out;
}

double trustworthiness(const Matrix& high, const Matrix& low, int k) {
  const Eigen::Index n = high.rows();
  if (low.rows() != n) throw Error("manifold", "trustworthiness: row count mismatch");
  if (k < 1 || 2 * n - 3 * k - 1 <= 0) throw Error("manifold", "trustworthiness: k too large for n");
  const Matrix dh = kernels::serial::pairwise_distances(high);
  const Matrix dl = kernels::serial::pairwise_distances(low);
  double penalty = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto order_high = nearest(dh, i, static_cast<int>(n - 1));
    std::vector<Eigen::Index> rank(n, 0);
    for (std::size_t r = 0; r < order_high.size(); ++r) rank[order_high[r]] = static_cast<Eigen::Index>(r + 1);
    const auto low_nn = nearest(dl, i, k);
    for (auto j : low_nn) {
      if (rank[j] > k) penalty += static_cast<double>(rank[j] - k);
    }
  }
  const double nn = static_cast<double>(n), kk = static_cast<double>(k);
  return 1.0 - 2.0 / (nn * kk * (2.0 * nn - 3.0 * kk - 1.0)) * penalty;
}

}  // namespace drel::manifold
