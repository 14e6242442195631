#include <algorithm>
#include <cmath>

#include "drel/error.hpp"
#include "drel/kernels.hpp"
#include "drel/ordinal.hpp"
#include "ordinal_internal.hpp"

namespace drel::ordinal {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Exact:
      return "exact";
    case Method::Aghq:
      return "aghq";
    case Method::Laplace:
      return "laplace";
  }
  return "exact";
}

std::uint64_t OrdinalProblem::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix_bytes = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  mix_bytes(&K, sizeof K);
  mix_bytes(y.data(), y.size() * sizeof(int));
  return h;
}

Vector thresholds_from_params(const Vector& params, int K) {
  Vector th(K - 1);
  th[0] = params[0];
  for (int j = 1; j < K - 1; ++j) th[j] = th[j - 1] + std::exp(params[j]);
  return th;
}

Vector params_from_thresholds(const Vector& thresholds) {
  Vector p(thresholds.size());
  p[0] = thresholds[0];
  for (Eigen::Index j = 1; j < thresholds.size(); ++j) {
    p[j] = std::log(thresholds[j] - thresholds[j - 1]);
  }
  return p;
}

namespace detail {

void check_problem(const OrdinalProblem& data) {
  if (data.K < 2) throw Error("ordinal", "need at least 2 response levels");
  if (data.y.empty()) throw Error("ordinal", "no observations");
  if (static_cast<std::size_t>(data.x.rows()) != data.y.size()) {
    throw Error("ordinal", "design rows do not match response count");
  }
  for (int v : data.y) {
    if (v < 1 || v > data.K) {
      throw Error("ordinal", "response " + std::to_string(v) + " outside [1, " +
                                 std::to_string(data.K) + "]");
    }
  }
  if (!data.x.allFinite()) throw Error("ordinal", "design has non-finite entries");
  for (const auto& t : data.random) {
    if (t.level.size() != data.y.size()) {
      throw Error("ordinal", "random term '" + t.group + "' has wrong length");
    }
    if (t.slopes.cols() > 0 && static_cast<std::size_t>(t.slopes.rows()) != data.y.size()) {
      throw Error("ordinal", "random slopes for '" + t.group + "' have wrong length");
    }
    for (auto l : t.level) {
      if (l >= t.n_levels) throw Error("ordinal", "level index out of range in '" + t.group + "'");
    }
  }
}

void check_full_rank(const OrdinalProblem& data) {
  const Eigen::Index n = data.x.rows(), p = data.x.cols();
  if (p == 0) return;
  Matrix aug(n, p + 1);
  aug.col(0).setOnes();
  aug.rightCols(p) = data.x;
  Eigen::ColPivHouseholderQR<Matrix> qr(aug);
  qr.setThreshold(1e-10);
  if (qr.rank() < p + 1) {
    throw Error("ordinal", "fixed-effect design is rank deficient (rank " +
                               std::to_string(qr.rank()) + " < " + std::to_string(p + 1) +
                               " including the threshold intercept)");
  }
}

Matrix threshold_jacobian(const Vector& params, int K) {
  const int m = K - 1;
  Matrix j = Matrix::Zero(m, m);
  for (int r = 0; r < m; ++r) {
    j(r, 0) = 1.0;
    for (int l = 1; l <= r; ++l) j(r, l) = std::exp(params[l]);
  }
  return j;
}

Vector initial_threshold_params(const OrdinalProblem& data) {
  std::vector<double> counts(static_cast<std::size_t>(data.K), 0.5);
  for (int v : data.y) counts[static_cast<std::size_t>(v - 1)] += 1.0;
  double total = 0.0;
  for (double c : counts) total += c;
  Vector th(data.K - 1);
  double cum = 0.0;
  for (int j = 0; j < data.K - 1; ++j) {
    cum += counts[static_cast<std::size_t>(j)];
    const double p = cum / total;
    th[j] = std::log(p / (1.0 - p));
  }
  return params_from_thresholds(th);
}

bool all_levels_present(const OrdinalProblem& data) {
  std::vector<char> seen(static_cast<std::size_t>(data.K), 0);
  for (int v : data.y) seen[static_cast<std::size_t>(v - 1)] = 1;
  return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
}

}  // namespace detail

ClmDerivatives clm_derivatives(const OrdinalProblem& data, const Vector& params, bool parallel) {
  const int m = data.K - 1;
  const Eigen::Index p = data.x.cols();
  if (params.size() != m + p) throw Error("ordinal", "parameter vector has the wrong length");
  const Vector th = thresholds_from_params(params, data.K);
  const Vector beta = params.tail(p);
  const auto acc = parallel ? kernels::omp::clm_accumulate(data.x, data.y, th, beta)
                            : kernels::serial::clm_accumulate(data.x, data.y, th, beta);

  // Chain rule from (theta, beta) to (theta_1, log gaps, beta).
  const Matrix jt = detail::threshold_jacobian(params, data.K);
  Matrix jac = Matrix::Identity(m + p, m + p);
  jac.topLeftCorner(m, m) = jt;

  ClmDerivatives out;
  out.loglik = acc.loglik;
  out.gradient = jac.transpose() * acc.gradient;
  out.hessian = jac.transpose() * acc.hessian * jac;
  for (int l = 1; l < m; ++l) {
    double tail = 0.0;
    for (int j = l; j < m; ++j) tail += acc.gradient[j];
    out.hessian(l, l) += std::exp(params[l]) * tail;
  }
  return out;
}

OrdinalFit clm_fit(const OrdinalProblem& data, const ClmOptions& opts) {
  detail::check_problem(data);
  detail::check_full_rank(data);
  const int m = data.K - 1;
  const Eigen::Index p = data.x.cols();

  Vector params(m + p);
  params.head(m) = detail::initial_threshold_params(data);
  params.tail(p).setZero();

  auto cur = clm_derivatives(data, params, opts.parallel);
  OrdinalFit fit;
  fit.method = Method::Exact;
  bool converged = false;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (cur.gradient.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) {
      converged = true;
      break;
    }
    // Newton direction on the negative Hessian, ridged until it is positive definite.
    Matrix neg = -cur.hessian;
    Vector step;
    double ridge = 0.0;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Matrix reg = neg;
      reg.diagonal().array() += ridge;
      Eigen::LDLT<Matrix> ldlt(reg);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0).all()) {
        step = ldlt.solve(cur.gradient);
        break;
      }
      ridge = ridge == 0.0 ? 1e-8 * std::max(1.0, neg.diagonal().cwiseAbs().maxCoeff()) : ridge * 10;
    }
    if (step.size() == 0) step = cur.gradient * 1e-3;

    double scale = 1.0;
    bool accepted = false;
    for (int h = 0; h < 50; ++h) {
      const Vector trial = params + scale * step;
      auto next = clm_derivatives(data, trial, opts.parallel);
      if (std::isfinite(next.loglik) && next.loglik >= cur.loglik - 1e-12 * std::abs(cur.loglik)) {
        params = trial;
        cur = std::move(next);
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;
  }
  if (!converged && cur.gradient.lpNorm<Eigen::Infinity>() < opts.gradient_tolerance) converged = true;

  fit.iterations = it;
  fit.K = data.K;
  fit.n_obs = data.n_obs();
  fit.thresholds = thresholds_from_params(params, data.K);
  fit.beta = params.tail(p);
  fit.fixed_names = data.fixed_names;
  fit.loglik = cur.loglik;
  fit.n_params = m + static_cast<int>(p);
  fit.data_fingerprint = data.fingerprint();
  fit.formula = data.formula;
  fit.converged = converged;

  if (!detail::all_levels_present(data)) {
    fit.converged = false;
    fit.message = "a response level is never observed; its threshold is not identified";
  } else if (!converged) {
    fit.message = "Newton iterations did not reach the gradient tolerance";
  }

  // Observed information in (theta, beta) coordinates.
  const Vector th = fit.thresholds;
  const auto acc = kernels::serial::clm_accumulate(data.x, data.y, th, fit.beta);
  Matrix info = -acc.hessian;
  Eigen::LDLT<Matrix> ldlt(info);
  fit.threshold_se = Vector::Constant(m, std::numeric_limits<double>::quiet_NaN());
  fit.beta_se = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
    const Matrix cov = ldlt.solve(Matrix::Identity(m + p, m + p));
    for (int j = 0; j < m; ++j) fit.threshold_se[j] = std::sqrt(std::max(0.0, cov(j, j)));
    for (Eigen::Index j = 0; j < p; ++j) fit.beta_se[j] = std::sqrt(std::max(0.0, cov(m + j, m + j)));
  }
  return fit;
}

}  // namespace drel::ordinal
