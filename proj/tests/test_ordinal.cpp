#include <gtest/gtest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "drel/error.hpp"
#include "drel/ordinal.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace drel;
using namespace drel::ordinal;

namespace {

OrdinalProblem uniform_intercept_only(int per_level) {
  OrdinalProblem p;
  p.K = 5;
  for (int k = 1; k <= 5; ++k) {
    for (int i = 0; i < per_level; ++i) p.y.push_back(k);
  }
  p.x.resize(static_cast<Eigen::Index>(p.y.size()), 0);
  return p;
}

OrdinalProblem two_covariates(std::uint64_t seed, int n) {
  CounterRng rng(seed, 21);
  OrdinalProblem p;
  p.x.resize(n, 2);
  p.fixed_names = {"a", "b"};
  for (int i = 0; i < n; ++i) {
    p.x(i, 0) = rng.normal();
    p.x(i, 1) = rng.uniform() < 0.4 ? 1.0 : 0.0;
    const double latent = 0.5 * p.x(i, 0) - 0.8 * p.x(i, 1) + rng.logistic();
    int y = 1;
    for (double v : {-1.5, -0.2, 0.7, 2.1}) y += latent > v;
    p.y.push_back(y);
  }
  return p;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

TEST(Clm, UniformThresholdsClosedForm) {
  const auto fit = clm_fit(uniform_intercept_only(40));
  ASSERT_TRUE(fit.converged);
  const double expected[] = {std::log(0.25), std::log(0.4 / 0.6), std::log(0.6 / 0.4), std::log(4.0)};
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(fit.thresholds[j], expected[j], 1e-6);
  EXPECT_NEAR(fit.thresholds[0], -1.3863, 1e-4);
  EXPECT_NEAR(fit.thresholds[1], -0.4055, 1e-4);
  EXPECT_NEAR(fit.loglik, 200 * std::log(0.2), 1e-8);
  EXPECT_EQ(fit.n_params, 4);
}

TEST(Clm, RecoversSyntheticEffect) {
  CounterRng rng(4, 22);
  OrdinalProblem p;
  p.x.resize(5000, 1);
  p.fixed_names = {"x"};
  for (int i = 0; i < 5000; ++i) {
    p.x(i, 0) = rng.uniform() < 0.5 ? 1.0 : 0.0;
    const double latent = 0.63 * p.x(i, 0) + rng.logistic();
    int y = 1;
    for (double v : {-2.0, -0.7, 0.5, 1.8}) y += latent > v;
    p.y.push_back(y);
  }
  const auto fit = clm_fit(p);
  ASSERT_TRUE(fit.converged);
  EXPECT_LT(std::abs(fit.beta[0] - 0.63), 3 * fit.beta_se[0]);
}

TEST(Clm, SerialAndParallelAgree) {
  const auto p = two_covariates(2, 3000);
  ClmOptions serial;
  serial.parallel = false;
  const auto a = clm_fit(p, serial);
  const auto b = clm_fit(p);
  EXPECT_NEAR(a.loglik, b.loglik, 1e-9);
  EXPECT_LT((a.beta - b.beta).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Clm, AnalyticDerivativesMatchFiniteDifferences) {
  const auto p = two_covariates(1, 400);
  CounterRng rng(5, 23);
  const double h = 1e-6;
  for (int rep = 0; rep < 20; ++rep) {
    Vector params(6);
    params << rng.normal() - 1.0, 0.5 * rng.normal(), 0.5 * rng.normal(), 0.5 * rng.normal(), rng.normal(),
        rng.normal();
    const auto d = clm_derivatives(p, params);
    for (Eigen::Index k = 0; k < params.size(); ++k) {
      Vector up = params, dn = params;
      up[k] += h;
      dn[k] -= h;
      const double fd = (clm_derivatives(p, up).loglik - clm_derivatives(p, dn).loglik) / (2 * h);
      EXPECT_LT(rel_err(d.gradient[k], fd), 1e-5) << "component " << k;
      const Vector fd_row = (clm_derivatives(p, up).gradient - clm_derivatives(p, dn).gradient) / (2 * h);
      for (Eigen::Index j = 0; j < params.size(); ++j) EXPECT_LT(rel_err(d.hessian(k, j), fd_row[j]), 1e-4);
    }
  }
}

TEST(Clm, ParameterMapsInvert) {
  Vector th(4);
  th << -1.0, -0.2, 0.3, 2.0;
  const Vector params = params_from_thresholds(th);
  EXPECT_LT((thresholds_from_params(params, 5) - th).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Clm, MissingLevelFlagsNonConvergence) {
  auto p = uniform_intercept_only(10);
  std::erase(p.y, 5);
  p.x.resize(static_cast<Eigen::Index>(p.y.size()), 0);
  const auto fit = clm_fit(p);
  EXPECT_FALSE(fit.converged);
}

TEST(Clm, Errors) {
  auto p = two_covariates(3, 50);
  p.x.col(1) = p.x.col(0);
  EXPECT_THROW(clm_fit(p), Error);
  auto q = two_covariates(3, 50);
  q.y[0] = 6;
  EXPECT_THROW(clm_fit(q), Error);
}

TEST(Clmm, ZeroVarianceEqualsClm) {
  const auto p = synth::random_intercept_problem(1, 20, 20);
  ClmmOptions opts;
  opts.fix_zero_variance = true;
  const auto fixed = clmm_fit(p, Method::Laplace, opts);
  EXPECT_NEAR(fixed.loglik, clm_fit(p).loglik, 1e-6);

  const auto clm = clm_fit(p);
  Vector params(clm.thresholds.size() + clm.beta.size() + 1);
  params << params_from_thresholds(clm.thresholds), clm.beta, -30.0;
  EXPECT_NEAR(clmm_loglik(p, Method::Laplace, params), clm.loglik, 1e-6);
  EXPECT_NEAR(clmm_loglik(p, Method::Aghq, params), clm.loglik, 1e-6);
}

TEST(Clmm, OneNodeQuadratureEqualsLaplace) {
  const auto p = synth::random_intercept_problem(2, 15, 10);
  Vector params(6);
  params << -1.8, std::log(1.2), std::log(1.1), std::log(1.3), 0.5, std::log(0.9);
  EXPECT_NEAR(clmm_loglik(p, Method::Aghq, params, 1), clmm_loglik(p, Method::Laplace, params), 1e-6);
}

TEST(Clmm, RecoversRandomInterceptSd) {
  const auto p = synth::random_intercept_problem(3);
  const auto lap = clmm_fit(p, Method::Laplace);
  ASSERT_TRUE(lap.converged);
  const double sd = std::sqrt(lap.varcomp[0].covariance(0, 0));
  EXPECT_GE(sd, 0.7);
  EXPECT_LE(sd, 1.3);
  EXPECT_LT(std::abs(lap.beta[0] - 0.63), 3 * lap.beta_se[0]);

  const auto gh = clmm_fit(p, Method::Aghq);
  ASSERT_TRUE(gh.converged);
  EXPECT_LT(std::abs(gh.loglik - lap.loglik), 0.5);
  EXPECT_EQ(gh.quadrature_nodes, 7);
}

TEST(Problem, FingerprintTracksResponses) {
  OrdinalProblem base = synth::random_intercept_problem(5, 10, 10);
  EXPECT_EQ(base.fingerprint(), synth::random_intercept_problem(5, 10, 10).fingerprint());
  auto other = base;
  other.y[0] = other.y[0] == 1 ? 2 : 1;
  EXPECT_NE(base.fingerprint(), other.fingerprint());
}

TEST(Clmm, Errors) {
  auto p = synth::random_intercept_problem(6, 10, 5);
  EXPECT_THROW(clmm_fit(p, Method::Exact), Error);
  auto none = p;
  none.random.clear();
  EXPECT_THROW(clmm_fit(none, Method::Laplace), Error);
  auto slopes = p;
  slopes.random[0].slopes = p.x;
  slopes.random[0].slope_names = {"x"};
  EXPECT_THROW(clmm_fit(slopes, Method::Aghq), Error);
}

TEST(Lrt, IdenticalFitsGiveZero) {
  const auto fit = clm_fit(two_covariates(4, 200));
  const auto r = lrt(fit, fit);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.df, 0);
  EXPECT_EQ(r.p_value, 1.0);
}

TEST(Lrt, NestedFitsAndErrors) {
  const auto full_p = two_covariates(5, 300);
  auto null_p = full_p;
  null_p.x = full_p.x.leftCols(1);
  null_p.fixed_names = {"a"};
  const auto full = clm_fit(full_p);
  const auto null = clm_fit(null_p);
  const auto r = lrt(null, full);
  EXPECT_EQ(r.df, 1);
  EXPECT_NEAR(r.statistic, 2 * (full.loglik - null.loglik), 1e-12);
  EXPECT_NEAR(r.p_value, chisq_sf(r.statistic, 1), 1e-15);
  EXPECT_THROW(lrt(full, null), Error);

  const auto unrelated = clm_fit(two_covariates(6, 300));
  EXPECT_THROW(lrt(null, unrelated), Error);
}

TEST(Lrt, NullPValuesRoughlyUniform) {
  std::vector<double> ps;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto p = synth::null_problem(seed);
    ps.push_back(lrt(clm_fit(synth::drop_fixed(p)), clm_fit(p)).p_value);
  }
  // 1% critical value of the one-sample KS statistic.
  EXPECT_LT(oracle::ks_uniform(ps), 1.63 / std::sqrt(200.0));
}

TEST(Lrt, Format) {
  LrtResult r{126.64, 7, chisq_sf(126.64, 7)};
  EXPECT_EQ(format_lrt(r), "χ²(7) = 126.64, p < 0.001");
  LrtResult s{3.0, 1, chisq_sf(3.0, 1)};
  EXPECT_EQ(format_lrt(s), "χ²(1) = 3.00, p = 0.083");
}

TEST(ChiSquare, KnownValues) {
  EXPECT_EQ(chisq_sf(0.0, 3), 1.0);
  EXPECT_NEAR(chisq_sf(2 * std::log(2.0), 2), 0.5, 1e-15);
  EXPECT_NEAR(chisq_sf(3.841, 1), 0.05, 1e-3);
  EXPECT_NEAR(chisq_sf(3.841, 1), oracle::chisq_tail_by_quadrature(3.841, 1, 200.0, 2000000), 1e-6);
  EXPECT_NEAR(chisq_sf(10.0, 4), oracle::chisq_tail_by_quadrature(10.0, 4), 1e-9);
  EXPECT_LT(chisq_sf(126.64, 7), 1e-20);
  EXPECT_GT(chisq_sf(126.64, 7), 0.0);
  EXPECT_THROW(chisq_sf(-1.0, 1), Error);
  EXPECT_THROW(chisq_sf(1.0, 0), Error);
}

TEST(ChiSquare, MatchesBoostIncompleteGamma) {
  for (int df : {1, 2, 3, 5, 7, 10, 30, 100}) {
    for (double x : {0.01, 0.5, 1.0, 3.841, 10.0, 50.0, 150.0, 500.0, 2000.0, 10000.0}) {
      const double ref = boost::math::gamma_q(df / 2.0, x / 2.0);
      EXPECT_NEAR(chisq_sf(x, df), ref, 1e-10) << "df " << df << " x " << x;
      if (ref > 1e-300) EXPECT_LT(std::abs(chisq_sf(x, df) - ref) / ref, 1e-8) << "df " << df << " x " << x;
    }
  }
}

TEST(Normal, TwoSided) {
  EXPECT_NEAR(normal_two_sided_p(1.959963984540054), 0.05, 1e-12);
  EXPECT_DOUBLE_EQ(normal_two_sided_p(0.0), 1.0);
}

TEST(GaussHermite, IntegratesPolynomialsExactly) {
  for (int q : {1, 3, 7, 12}) {
    std::vector<double> x, w;
    gauss_hermite(q, x, w);
    ASSERT_EQ(x.size(), static_cast<std::size_t>(q));
    for (int k = 0; k < 2 * q; ++k) {
      double s = 0.0, scale = 0.0;
      for (int i = 0; i < q; ++i) {
        const double term = w[static_cast<std::size_t>(i)] * std::pow(x[static_cast<std::size_t>(i)], k);
        s += term;
        scale += std::abs(term);
      }
      // Integral of x^k exp(-x^2) is Gamma((k+1)/2) for even k, 0 for odd k.
      const double exact = k % 2 ? 0.0 : std::tgamma((k + 1) / 2.0);
      EXPECT_NEAR(s, exact, 1e-12 * std::max(1.0, scale)) << "q " << q << " k " << k;
    }
  }
  std::vector<double> x, w;
  EXPECT_THROW(gauss_hermite(0, x, w), Error);
}

TEST(Formula, BuildsDesignAndRandomTerms) {
  const auto ds = oracle::random_dataset(7, 60);
  const auto p = problem_from_formula(ds, "confidence ~ kind + (kind | annotator) + (1 | du_pair)", true);
  EXPECT_EQ(p.x.cols(), 2);
  EXPECT_EQ(p.fixed_names[1], "kind[cross_speaker]");
  ASSERT_EQ(p.random.size(), 2u);
  EXPECT_EQ(p.random[0].effects_per_level(), 3u);
  EXPECT_TRUE(p.random[0].correlated);
  EXPECT_EQ(p.random[0].n_variance_params(), 6u);
  EXPECT_EQ(p.random[1].effects_per_level(), 1u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(p.y[i], ds[i].confidence);
    EXPECT_EQ(p.x(static_cast<Eigen::Index>(i), 1), ds[i].context == ContextKind::CrossSpeaker ? 1.0 : 0.0);
  }
  EXPECT_FALSE(problem_from_formula(ds, "confidence ~ kind + (kind || annotator)", true).random[0].correlated);
  EXPECT_EQ(problem_from_formula(ds, "confidence ~ 1").x.cols(), 0);

  EXPECT_THROW(problem_from_formula(ds, "rating ~ kind"), Error);
  EXPECT_THROW(problem_from_formula(ds, "confidence ~ kind + (1 | speaker)"), Error);
  EXPECT_THROW(problem_from_formula(ds, "confidence ~ kind + (1 | annotator"), Error);
  EXPECT_THROW(problem_from_formula(ds, "confidence ~ age"), Error);
  EXPECT_THROW(problem_from_formula(ds, "confidence kind"), Error);
}

TEST(Report, MentionsEstimates) {
  const auto p = two_covariates(8, 300);
  const auto text = fit_report(clm_fit(p));
  EXPECT_NE(text.find("Cumulative link model"), std::string::npos);
  EXPECT_NE(text.find("Thresholds:"), std::string::npos);
  EXPECT_NE(text.find("a "), std::string::npos);
}
