#include <omp.h>

#include <cmath>

#include "drel/kernels.hpp"
#include "drel/ordinal_link.hpp"

namespace drel::kernels::omp {

IntMatrix cooccurrence(const IntMatrix& a) {
  const Eigen::Index m = a.cols();
  const Eigen::Index n = a.rows();
  IntMatrix o = IntMatrix::Zero(m, m);
#pragma omp parallel
  {
    IntMatrix local = IntMatrix::Zero(m, m);
#pragma omp for schedule(static) nowait
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index i = 0; i < m; ++i) {
        const std::int64_t ai = a(r, i);
        if (ai == 0) continue;
        for (Eigen::Index j = 0; j < m; ++j) local(i, j) += ai * a(r, j);
      }
    }
    // Integer sums are exact, so the merge order does not matter.
#pragma omp critical
    o += local;
  }
  return o;
}

Matrix pairwise_distances(const Matrix& points) {
  const Eigen::Index n = points.rows();
  Matrix d = Matrix::Zero(n, n);
#pragma omp parallel for schedule(dynamic, 8)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < points.cols(); ++k) {
        const double diff = points(i, k) - points(j, k);
        s += diff * diff;
      }
      d(i, j) = d(j, i) = std::sqrt(s);
    }
  }
  return d;
}

ClmAccumulation clm_accumulate(const Matrix& x, std::span<const int> y, const Vector& thresholds,
                               const Vector& beta) {
  const Eigen::Index p = beta.size();
  const Eigen::Index n = x.rows();
  const Eigen::Index chunk = static_cast<Eigen::Index>(kReductionChunk);
  const Eigen::Index n_chunks = (n + chunk - 1) / chunk;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  std::vector<ClmAccumulation> partial(static_cast<std::size_t>(n_chunks));
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < n_chunks; ++c) {
    auto acc = detail::zero_accumulation(thresholds.size(), p);
    const Eigen::Index end = std::min(n, (c + 1) * chunk);
    for (Eigen::Index i = c * chunk; i < end; ++i) {
      const double eta = p > 0 ? x.row(i).dot(beta) : 0.0;
      detail::clm_add_observation(xr.row(i).data(), p, y[i], thresholds, eta, acc);
    }
    partial[static_cast<std::size_t>(c)] = std::move(acc);
  }
  auto total = detail::zero_accumulation(thresholds.size(), p);
  for (const auto& acc : partial) {
    total.loglik += acc.loglik;
    total.gradient += acc.gradient;
    total.hessian += acc.hessian;
  }
  return total;
}

LinkTerms link_terms(const Vector& eta, std::span<const int> y, const Vector& thresholds) {
  const Eigen::Index n = eta.size();
  LinkTerms out{Vector(n), Vector(n), Vector(n)};
  std::span<const double> th(thresholds.data(), static_cast<std::size_t>(thresholds.size()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto t = ordinal::link::obs_terms(th, y[i], eta[i]);
    out.loglik[i] = t.loglik;
    out.score[i] = t.d_eta();
    out.weight[i] = -t.d2_eta();
  }
  return out;
}

std::vector<double> aghq_group_logliks(const AghqProblem& p, std::vector<char>& ok) {
  const auto n_groups = static_cast<std::ptrdiff_t>(p.groups.size());
  std::vector<double> out(p.groups.size());
  ok.assign(p.groups.size(), 1);
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t g = 0; g < n_groups; ++g) {
    bool good = true;
    out[static_cast<std::size_t>(g)] = detail::aghq_one_group(p, static_cast<std::size_t>(g), good);
    ok[static_cast<std::size_t>(g)] = good;
  }
  return out;
}

}  // namespace drel::kernels::omp
