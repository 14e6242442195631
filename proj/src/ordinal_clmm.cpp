#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "drel/error.hpp"
#include "drel/kernels.hpp"
#include "drel/ordinal.hpp"
#include "ordinal_internal.hpp"

namespace drel::ordinal {

namespace detail {

Vector fd_gradient(const Objective& f, const Vector& x) {
  Vector g(x.size());
  Vector probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[j]));
    probe[j] = x[j] + h;
    const double up = f(probe);
    probe[j] = x[j] - h;
    const double down = f(probe);
    probe[j] = x[j];
    g[j] = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const Objective& f, const Vector& x) {
  const Eigen::Index n = x.size();
  Matrix h(n, n);
  Vector step(n);
  for (Eigen::Index j = 0; j < n; ++j) step[j] = 1e-4 * std::max(1.0, std::abs(x[j]));
  const double f0 = f(x);
  Vector probe = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    probe[j] = x[j] + step[j];
    const double up = f(probe);
    probe[j] = x[j] - step[j];
    const double down = f(probe);
    probe[j] = x[j];
    h(j, j) = (up - 2.0 * f0 + down) / (step[j] * step[j]);
    for (Eigen::Index k = 0; k < j; ++k) {
      double acc = 0.0;
      for (int sj : {1, -1}) {
        for (int sk : {1, -1}) {
          probe[j] = x[j] + sj * step[j];
          probe[k] = x[k] + sk * step[k];
          acc += sj * sk * f(probe);
        }
      }
      probe[j] = x[j];
      probe[k] = x[k];
      h(j, k) = h(k, j) = acc / (4.0 * step[j] * step[k]);
    }
  }
  return h;
}

BfgsResult bfgs_maximize(const Objective& f, Vector x0, int max_iterations, double gtol) {
  BfgsResult res;
  const Eigen::Index n = x0.size();
  res.x = std::move(x0);
  res.value = f(res.x);
  if (!std::isfinite(res.value)) throw Error("ordinal", "objective is not finite at the starting point");
  if (n == 0) {
    res.converged = true;
    return res;
  }
  Vector g = fd_gradient(f, res.x);
  Matrix hinv = Matrix::Identity(n, n);
  bool first = true;
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    res.gradient_norm = g.lpNorm<Eigen::Infinity>();
    if (res.gradient_norm < gtol) {
      res.converged = true;
      break;
    }
    Vector dir = hinv * g;
    if (g.dot(dir) <= 0) {
      hinv.setIdentity();
      dir = g;
    }
    if (first) dir /= std::max(1.0, dir.lpNorm<Eigen::Infinity>());

    double t = 1.0;
    double next_value = -std::numeric_limits<double>::infinity();
    Vector next;
    bool ok = false;
    for (int ls = 0; ls < 50; ++ls) {
      next = res.x + t * dir;
      next_value = f(next);
      if (std::isfinite(next_value) && next_value >= res.value + 1e-4 * t * g.dot(dir)) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) {
      if (!first && hinv != Matrix::Identity(n, n)) {
        hinv.setIdentity();
        first = true;
        continue;
      }
      break;
    }
    const Vector s = next - res.x;
    const Vector g_next = fd_gradient(f, next);
    const Vector yv = g - g_next;  // gradient change of the minimised -f
    const double sy = s.dot(yv);
    const double change = next_value - res.value;
    res.x = next;
    res.value = next_value;
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      if (first) hinv *= sy / yv.squaredNorm();
      const double rho = 1.0 / sy;
      const Matrix left = Matrix::Identity(n, n) - rho * s * yv.transpose();
      hinv = left * hinv * left.transpose() + rho * s * s.transpose();
    }
    first = false;
    g = g_next;
    if (change < 1e-12 * (1.0 + std::abs(res.value)) && s.lpNorm<Eigen::Infinity>() < 1e-9) {
      res.gradient_norm = g.lpNorm<Eigen::Infinity>();
      res.converged = res.gradient_norm < gtol;
      break;
    }
  }
  res.gradient_norm = g.lpNorm<Eigen::Infinity>();
  if (res.gradient_norm < gtol) res.converged = true;
  return res;
}

}  // namespace detail

namespace {

// Lower-triangular Cholesky factors of the random-effect covariances.
std::vector<Matrix> unpack_factors(const OrdinalProblem& data, const Vector& var_params,
                                   const std::vector<char>& zeroed) {
  std::vector<Matrix> out;
  Eigen::Index pos = 0;
  for (std::size_t t = 0; t < data.random.size(); ++t) {
    const auto& term = data.random[t];
    const auto q = static_cast<Eigen::Index>(term.effects_per_level());
    Matrix l = Matrix::Zero(q, q);
    for (Eigen::Index r = 0; r < q; ++r) l(r, r) = std::exp(var_params[pos + r]);
    pos += q;
    if (term.correlated) {
      for (Eigen::Index r = 1; r < q; ++r) {
        for (Eigen::Index c = 0; c < r; ++c) l(r, c) = var_params[pos++];
      }
    }
    if (!zeroed.empty() && zeroed[t]) l.setZero();
    out.push_back(std::move(l));
  }
  return out;
}

std::size_t count_variance_params(const OrdinalProblem& data) {
  std::size_t n = 0;
  for (const auto& t : data.random) n += t.n_variance_params();
  return n;
}

// Laplace approximation with spherical random effects b ~ N(0, I) and
// u = L b per level; the joint mode is found by Newton's method with a
// sparse LDL^T factorisation of I + M^T W M.
class LaplaceEvaluator {
 public:
  LaplaceEvaluator(const OrdinalProblem& data, bool parallel) : data_(data), parallel_(parallel) {
    std::size_t offset = 0;
    for (const auto& t : data.random) {
      offsets_.push_back(offset);
      offset += t.n_levels * t.effects_per_level();
      width_ += t.effects_per_level();
    }
    dim_ = offset;
    b_ = Vector::Zero(static_cast<Eigen::Index>(dim_));
    const std::size_t n = data.n_obs();
    cols_.resize(n * width_);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = 0;
      for (std::size_t t = 0; t < data.random.size(); ++t) {
        const auto& term = data.random[t];
        const std::size_t q = term.effects_per_level();
        for (std::size_t r = 0; r < q; ++r) cols_[i * width_ + k++] = offsets_[t] + term.level[i] * q + r;
      }
    }
  }

  std::size_t dim() const { return dim_; }

  double operator()(const Vector& thresholds, const Vector& beta, const std::vector<Matrix>& factors) {
    const std::size_t n = data_.n_obs();
    const Vector eta_fixed = data_.x.cols() > 0 ? Vector(data_.x * beta) : Vector::Zero(static_cast<Eigen::Index>(n));

    // m_i = stacked L_t^T z_it.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(n, width_);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t k = 0;
      for (std::size_t t = 0; t < data_.random.size(); ++t) {
        const auto& term = data_.random[t];
        const auto q = static_cast<Eigen::Index>(term.effects_per_level());
        Vector z(q);
        z[0] = 1.0;
        for (Eigen::Index r = 1; r < q; ++r) z[r] = term.slopes(static_cast<Eigen::Index>(i), r - 1);
        const Vector mz = factors[t].transpose() * z;
        for (Eigen::Index r = 0; r < q; ++r) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k++)) = mz[r];
      }
    }

    auto objective = [&](const Vector& b, kernels::LinkTerms& terms) {
      Vector eta = eta_fixed;
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < width_; ++k) s += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) * b[static_cast<Eigen::Index>(cols_[i * width_ + k])];
        eta[static_cast<Eigen::Index>(i)] += s;
      }
      terms = parallel_ ? kernels::omp::link_terms(eta, data_.y, thresholds)
                        : kernels::serial::link_terms(eta, data_.y, thresholds);
      double ll = 0.0;
      for (Eigen::Index i = 0; i < terms.loglik.size(); ++i) ll += terms.loglik[i];
      return ll - 0.5 * b.squaredNorm();
    };

    Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * width_ * width_ + dim_);
    auto build = [&](const kernels::LinkTerms& terms, Vector& grad) {
      trip.clear();
      grad = -b_;
      for (std::size_t i = 0; i < n; ++i) {
        const double w = terms.weight[static_cast<Eigen::Index>(i)];
        const double s = terms.score[static_cast<Eigen::Index>(i)];
        for (std::size_t k = 0; k < width_; ++k) {
          const auto ck = static_cast<Eigen::Index>(cols_[i * width_ + k]);
          const double mk = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
          grad[ck] += s * mk;
          for (std::size_t l = 0; l < width_; ++l) {
            const auto cl = static_cast<Eigen::Index>(cols_[i * width_ + l]);
            trip.emplace_back(static_cast<int>(ck), static_cast<int>(cl), w * mk * m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)));
          }
        }
      }
      for (std::size_t d = 0; d < dim_; ++d) trip.emplace_back(static_cast<int>(d), static_cast<int>(d), 1.0);
      h.setFromTriplets(trip.begin(), trip.end());
    };

    kernels::LinkTerms terms;
    double cur = objective(b_, terms);
    if (!std::isfinite(cur)) {
      b_.setZero();
      cur = objective(b_, terms);
    }
    Vector grad;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      build(terms, grad);
      if (!analyzed_) {
        llt_.analyzePattern(h);
        analyzed_ = true;
      }
      llt_.factorize(h);
      if (llt_.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
      if (grad.lpNorm<Eigen::Infinity>() < 1e-10) {
        converged = true;
        break;
      }
      Vector step = llt_.solve(grad);
      double scale = 1.0;
      bool moved = false;
      kernels::LinkTerms trial_terms;
      for (int halving = 0; halving < 40; ++halving) {
        const Vector trial = b_ + scale * step;
        const double val = objective(trial, trial_terms);
        if (std::isfinite(val) && val >= cur - 1e-13 * std::abs(cur)) {
          b_ = trial;
          cur = val;
          terms = std::move(trial_terms);
          moved = true;
          break;
        }
        scale *= 0.5;
      }
      if (!moved || (scale * step).lpNorm<Eigen::Infinity>() < 1e-12) {
        build(terms, grad);
        llt_.factorize(h);
        converged = llt_.info() == Eigen::Success && grad.lpNorm<Eigen::Infinity>() < 1e-6;
        break;
      }
    }
    if (!converged) {
      ++inner_failures_;
      return -std::numeric_limits<double>::infinity();
    }
    double logdet = 0.0;
    const Vector& diag = llt_.vectorD();
    for (Eigen::Index i = 0; i < diag.size(); ++i) logdet += std::log(diag[i]);
    return cur - 0.5 * logdet;
  }

  const Vector& mode() const { return b_; }
  int inner_failures() const { return inner_failures_; }

 private:
  const OrdinalProblem& data_;
  bool parallel_;
  std::vector<std::size_t> offsets_;
  std::size_t width_ = 0;
  std::size_t dim_ = 0;
  std::vector<std::size_t> cols_;
  Vector b_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> llt_;
  bool analyzed_ = false;
  int inner_failures_ = 0;
};

class AghqEvaluator {
 public:
  AghqEvaluator(const OrdinalProblem& data, int q, bool parallel) : data_(data), parallel_(parallel) {
    if (data.random.size() != 1 || data.random[0].slopes.cols() != 0) {
      throw Error("ordinal", "aghq supports exactly one intercept-only random term; use laplace");
    }
    if (q < 1) throw Error("ordinal", "quadrature needs at least one node");
    std::vector<double> w;
    gauss_hermite(q, nodes_, w);
    for (double v : w) log_weights_.push_back(std::log(v));
    const auto& term = data.random[0];
    groups_.resize(term.n_levels);
    for (std::size_t i = 0; i < term.level.size(); ++i) groups_[term.level[i]].push_back(i);
  }

  double operator()(const Vector& thresholds, const Vector& beta, double sd) const {
    const Vector eta = data_.x.cols() > 0 ? Vector(data_.x * beta) : Vector::Zero(static_cast<Eigen::Index>(data_.n_obs()));
    kernels::AghqProblem p;
    p.eta = {eta.data(), static_cast<std::size_t>(eta.size())};
    p.y = data_.y;
    p.thresholds = {thresholds.data(), static_cast<std::size_t>(thresholds.size())};
    p.groups = groups_;
    p.nodes = nodes_;
    p.log_weights = log_weights_;
    p.sd = sd;
    std::vector<char> ok;
    const auto per_group = parallel_ ? kernels::omp::aghq_group_logliks(p, ok)
                                     : kernels::serial::aghq_group_logliks(p, ok);
    double total = 0.0;
    for (std::size_t g = 0; g < per_group.size(); ++g) {
      if (!ok[g]) return -std::numeric_limits<double>::infinity();
      total += per_group[g];
    }
    return total;
  }

 private:
  const OrdinalProblem& data_;
  bool parallel_;
  std::vector<double> nodes_;
  std::vector<double> log_weights_;
  std::vector<std::vector<std::size_t>> groups_;
};

// Unified marginal log-likelihood over the packed parameter vector.
class Marginal {
 public:
  Marginal(const OrdinalProblem& data, Method method, int q, bool parallel)
      : data_(data), method_(method) {
    if (method == Method::Aghq) {
      aghq_.emplace(data, q, parallel);
    } else if (method == Method::Laplace) {
      laplace_.emplace(data, parallel);
    } else {
      throw Error("ordinal", "mixed models need method aghq or laplace");
    }
  }

  double operator()(const Vector& params, const std::vector<char>& zeroed) {
    const int m = data_.K - 1;
    const Eigen::Index p = data_.x.cols();
    const Vector var = params.tail(params.size() - m - p);
    for (Eigen::Index r = 0; r < var.size(); ++r) {
      if (!std::isfinite(var[r])) return -std::numeric_limits<double>::infinity();
    }
    // Log-sd above e^6 is far outside any plausible confidence scale.
    {
      Eigen::Index pos = 0;
      for (const auto& t : data_.random) {
        const auto q = static_cast<Eigen::Index>(t.effects_per_level());
        for (Eigen::Index r = 0; r < q; ++r) {
          if (var[pos + r] > 6.0) return -std::numeric_limits<double>::infinity();
        }
        pos += static_cast<Eigen::Index>(t.n_variance_params());
      }
    }
    const Vector th = thresholds_from_params(params.head(m), data_.K);
    if (!th.allFinite()) return -std::numeric_limits<double>::infinity();
    const Vector beta = params.segment(m, p);
    const auto factors = unpack_factors(data_, var, zeroed);
    if (aghq_) return (*aghq_)(th, beta, factors[0](0, 0));
    return (*laplace_)(th, beta, factors);
  }

 private:
  const OrdinalProblem& data_;
  Method method_;
  std::optional<AghqEvaluator> aghq_;
  std::optional<LaplaceEvaluator> laplace_;
};

}  // namespace

double clmm_loglik(const OrdinalProblem& data, Method method, const Vector& params, int quadrature_nodes) {
  detail::check_problem(data);
  const auto expected = static_cast<Eigen::Index>(data.K - 1 + data.x.cols()) +
                        static_cast<Eigen::Index>(count_variance_params(data));
  if (params.size() != expected) throw Error("ordinal", "parameter vector has the wrong length");
  Marginal marginal(data, method, quadrature_nodes, true);
  return marginal(params, {});
}

OrdinalFit clmm_fit(const OrdinalProblem& data, Method method, const ClmmOptions& opts) {
  detail::check_problem(data);
  detail::check_full_rank(data);
  if (data.random.empty()) throw Error("ordinal", "mixed model needs at least one random term");
  for (const auto& t : data.random) {
    if (t.n_levels < 2) throw Error("ordinal", "grouping factor '" + t.group + "' has fewer than 2 levels");
  }
  const int m = data.K - 1;
  const Eigen::Index p = data.x.cols();
  const auto nv = static_cast<Eigen::Index>(count_variance_params(data));

  ClmOptions clm_opts;
  clm_opts.parallel = opts.parallel;
  const OrdinalFit start = clm_fit(data, clm_opts);

  Vector params(m + p + nv);
  params.head(m) = params_from_thresholds(start.thresholds);
  params.segment(m, p) = start.beta;
  params.tail(nv).setZero();
  {
    Eigen::Index pos = m + p;
    for (const auto& t : data.random) {
      const auto q = static_cast<Eigen::Index>(t.effects_per_level());
      params.segment(pos, q).setConstant(std::log(0.5));
      pos += static_cast<Eigen::Index>(t.n_variance_params());
    }
  }

  Marginal marginal(data, method, opts.quadrature_nodes, opts.parallel);
  std::vector<char> zeroed(data.random.size(), opts.fix_zero_variance ? 1 : 0);

  // With every variance fixed at zero only (thresholds, beta) are free.
  const Eigen::Index n_free = opts.fix_zero_variance ? m + p : m + p + nv;
  auto objective = [&](const Vector& free) {
    Vector full = params;
    full.head(n_free) = free;
    return marginal(full, zeroed);
  };
  auto res = detail::bfgs_maximize(objective, params.head(n_free), opts.max_iterations,
                                   opts.gradient_tolerance);
  params.head(n_free) = res.x;
  double loglik = res.value;

  // Zero-boundary check per term: compare against the same fit with the term removed.
  if (!opts.fix_zero_variance) {
    Eigen::Index pos = m + p;
    for (std::size_t t = 0; t < data.random.size(); ++t) {
      const auto q = static_cast<Eigen::Index>(data.random[t].effects_per_level());
      const double max_log_sd = params.segment(pos, q).maxCoeff();
      pos += static_cast<Eigen::Index>(data.random[t].n_variance_params());
      if (max_log_sd > std::log(0.05)) continue;
      auto trial = zeroed;
      trial[t] = 1;
      const double at_zero = marginal(params, trial);
      if (at_zero >= loglik - 1e-6) {
        zeroed[t] = 1;
        loglik = std::max(loglik, at_zero);
      }
    }
  }

  OrdinalFit fit;
  fit.method = method;
  fit.quadrature_nodes = method == Method::Aghq ? opts.quadrature_nodes : 0;
  fit.K = data.K;
  fit.n_obs = data.n_obs();
  fit.thresholds = thresholds_from_params(params.head(m), data.K);
  fit.beta = params.segment(m, p);
  fit.fixed_names = data.fixed_names;
  fit.loglik = loglik;
  fit.iterations = res.iterations;
  fit.converged = res.converged;
  fit.data_fingerprint = data.fingerprint();
  fit.formula = data.formula;
  fit.n_params = m + static_cast<int>(p) + static_cast<int>(opts.fix_zero_variance ? 0 : nv);
  if (!res.converged) {
    fit.message = "quasi-Newton stopped with gradient norm " + std::to_string(res.gradient_norm);
  }
  if (!detail::all_levels_present(data)) {
    fit.converged = false;
    fit.message = "a response level is never observed; its threshold is not identified";
  }

  const auto factors = unpack_factors(data, params.tail(nv), zeroed);
  for (std::size_t t = 0; t < data.random.size(); ++t) {
    const auto& term = data.random[t];
    VarianceComponent vc;
    vc.group = term.group;
    vc.effects.push_back("(Intercept)");
    for (const auto& s : term.slope_names) vc.effects.push_back(s);
    vc.covariance = factors[t] * factors[t].transpose();
    vc.boundary = zeroed[t] != 0;
    fit.varcomp.push_back(std::move(vc));
    fit.random_groups.push_back(term.group);
  }

  fit.threshold_se = Vector::Constant(m, std::numeric_limits<double>::quiet_NaN());
  fit.beta_se = Vector::Constant(p, std::numeric_limits<double>::quiet_NaN());
  if (opts.compute_standard_errors) {
    // Observed information over the parameters not fixed at the boundary.
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index j = 0; j < m + p; ++j) free_idx.push_back(j);
    if (!opts.fix_zero_variance) {
      Eigen::Index pos = m + p;
      for (std::size_t t = 0; t < data.random.size(); ++t) {
        const auto cnt = static_cast<Eigen::Index>(data.random[t].n_variance_params());
        if (!zeroed[t]) {
          for (Eigen::Index j = 0; j < cnt; ++j) free_idx.push_back(pos + j);
        }
        pos += cnt;
      }
    }
    Vector x0(static_cast<Eigen::Index>(free_idx.size()));
    for (std::size_t j = 0; j < free_idx.size(); ++j) x0[static_cast<Eigen::Index>(j)] = params[free_idx[j]];
    auto sub = [&](const Vector& x) {
      Vector full = params;
      for (std::size_t j = 0; j < free_idx.size(); ++j) full[free_idx[j]] = x[static_cast<Eigen::Index>(j)];
      return marginal(full, zeroed);
    };
    const Matrix hess = detail::fd_hessian(sub, x0);
    Eigen::LDLT<Matrix> ldlt(-hess);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
      const Matrix cov = ldlt.solve(Matrix::Identity(hess.rows(), hess.cols()));
      const Matrix jt = detail::threshold_jacobian(params.head(m), data.K);
      const Matrix cov_th = jt * cov.topLeftCorner(m, m) * jt.transpose();
      for (int j = 0; j < m; ++j) fit.threshold_se[j] = std::sqrt(std::max(0.0, cov_th(j, j)));
      for (Eigen::Index j = 0; j < p; ++j) fit.beta_se[j] = std::sqrt(std::max(0.0, cov(m + j, m + j)));
    }
  }
  return fit;
}

}  // namespace drel::ordinal
