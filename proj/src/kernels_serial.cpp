#include <cmath>

#include "drel/error.hpp"
#include "drel/kernels.hpp"
#include "drel/ordinal_link.hpp"

namespace drel::kernels {

namespace detail {

ClmAccumulation zero_accumulation(Eigen::Index n_thresholds, Eigen::Index p) {
  ClmAccumulation acc;
  acc.gradient = Vector::Zero(n_thresholds + p);
  acc.hessian = Matrix::Zero(n_thresholds + p, n_thresholds + p);
  return acc;
}

void clm_add_observation(const double* xrow, Eigen::Index p, int y, const Vector& thresholds,
                         double eta, ClmAccumulation& acc) {
  const auto t = ordinal::link::obs_terms({thresholds.data(), static_cast<std::size_t>(thresholds.size())},
                                          y, eta);
  const Eigen::Index nt = thresholds.size();
  const Eigen::Index up = y - 1;  // index of theta_y
  const Eigen::Index lo = y - 2;  // index of theta_{y-1}
  acc.loglik += t.loglik;
  if (t.has_upper) {
    acc.gradient[up] += t.la;
    acc.hessian(up, up) += t.laa;
  }
  if (t.has_lower) {
    acc.gradient[lo] += t.lb;
    acc.hessian(lo, lo) += t.lbb;
  }
  if (t.has_upper && t.has_lower) {
    acc.hessian(up, lo) += t.lab;
    acc.hessian(lo, up) += t.lab;
  }
  const double d_eta = t.d_eta();
  const double d2_eta = t.d2_eta();
  const double up_eta = -(t.laa + t.lab);  // d2l / dtheta_y deta
  const double lo_eta = -(t.lab + t.lbb);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double xj = xrow[j];
    if (xj == 0.0) continue;
    acc.gradient[nt + j] += d_eta * xj;
    if (t.has_upper) {
      acc.hessian(up, nt + j) += up_eta * xj;
      acc.hessian(nt + j, up) += up_eta * xj;
    }
    if (t.has_lower) {
      acc.hessian(lo, nt + j) += lo_eta * xj;
      acc.hessian(nt + j, lo) += lo_eta * xj;
    }
    for (Eigen::Index k = 0; k < p; ++k) acc.hessian(nt + j, nt + k) += d2_eta * xj * xrow[k];
  }
}

double aghq_one_group(const AghqProblem& p, std::size_t g, bool& ok) {
  const auto& members = p.groups[g];
  auto h = [&](double b, double* d1, double* d2) {
    double val = -0.5 * b * b;
    double s = 0.0, w = 0.0;
    for (std::size_t i : members) {
      const auto t = ordinal::link::obs_terms(p.thresholds, p.y[i], p.eta[i] + p.sd * b);
      val += t.loglik;
      s += t.d_eta();
      w -= t.d2_eta();
    }
    if (d1) *d1 = p.sd * s - b;
    if (d2) *d2 = -(p.sd * p.sd * w) - 1.0;
    return val;
  };

  ok = true;
  double b = 0.0;
  double d1 = 0.0, d2 = -1.0;
  double cur = h(b, &d1, &d2);
  if (p.sd > 0.0) {
    int it = 0;
    for (; it < 100 && std::abs(d1) > 1e-11; ++it) {
      double step = -d1 / d2;
      double next = 0.0;
      int halvings = 0;
      double nd1 = 0.0, nd2 = 0.0;
      while (true) {
        next = h(b + step, &nd1, &nd2);
        if (next >= cur - 1e-14 * std::abs(cur) || halvings >= 40) break;
        step *= 0.5;
        ++halvings;
      }
      b += step;
      cur = next;
      d1 = nd1;
      d2 = nd2;
    }
    if (std::abs(d1) > 1e-6) ok = false;
  }

  const double tau = 1.0 / std::sqrt(-d2);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(p.nodes.size());
  for (std::size_t k = 0; k < p.nodes.size(); ++k) {
    const double x = p.nodes[k];
    terms[k] = p.log_weights[k] + x * x + h(b + std::sqrt(2.0) * tau * x, nullptr, nullptr);
    best = std::max(best, terms[k]);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - best);
  return best + std::log(acc) + std::log(tau) - 0.5 * std::log(M_PI);
}

}  // namespace detail

namespace serial {

IntMatrix cooccurrence(const IntMatrix& a) {
  const Eigen::Index m = a.cols();
  IntMatrix o = IntMatrix::Zero(m, m);
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const std::int64_t ai = a(r, i);
      if (ai == 0) continue;
      for (Eigen::Index j = 0; j < m; ++j) o(i, j) += ai * a(r, j);
    }
  }
  return o;
}

Matrix pairwise_distances(const Matrix& points) {
  const Eigen::Index n = points.rows();
  Matrix d = Matrix::Zero(n, n);
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
  auto acc = detail::zero_accumulation(thresholds.size(), p);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> xr = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double eta = p > 0 ? x.row(i).dot(beta) : 0.0;
    detail::clm_add_observation(xr.row(i).data(), p, y[i], thresholds, eta, acc);
  }
  return acc;
}

LinkTerms link_terms(const Vector& eta, std::span<const int> y, const Vector& thresholds) {
  const Eigen::Index n = eta.size();
  LinkTerms out{Vector(n), Vector(n), Vector(n)};
  std::span<const double> th(thresholds.data(), static_cast<std::size_t>(thresholds.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto t = ordinal::link::obs_terms(th, y[i], eta[i]);
    out.loglik[i] = t.loglik;
    out.score[i] = t.d_eta();
    out.weight[i] = -t.d2_eta();
  }
  return out;
}

std::vector<double> aghq_group_logliks(const AghqProblem& p, std::vector<char>& ok) {
  std::vector<double> out(p.groups.size());
  ok.assign(p.groups.size(), 1);
  for (std::size_t g = 0; g < p.groups.size(); ++g) {
    bool good = true;
    out[g] = detail::aghq_one_group(p, g, good);
    ok[g] = good;
  }
  return out;
}

}  // namespace serial

}  // namespace drel::kernels
