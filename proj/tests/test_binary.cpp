#include <gtest/gtest.h>

#include "oracles.hpp"
#include "upg/baselines.hpp"
#include "upg/binary.hpp"
#include "upg/fit.hpp"

using namespace upg;

namespace {

BinaryDataset balanced_data(int N, int d, std::uint64_t seed) {
  Scenario sc;
  sc.N = N;
  sc.d = d;
  sc.slopes = Vector::Constant(d - 1, 0.5);
  RngStream rng(seed);
  return simulate_dataset(sc, rng).binary();
}

}  // namespace

TEST(Utility, LogitHandValues) {
  EXPECT_NEAR(logit_utility(0.0, 1, 0.5), std::log(3.0), 1e-14);
  EXPECT_NEAR(logit_utility(0.0, 0, 0.5), -std::log(3.0), 1e-14);
}

TEST(Utility, SignConsistentAtExtremes) {
  RngStream rng(1);
  for (double eta : {-700.0, -40.0, 0.0, 40.0, 700.0}) {
    for (int i = 0; i < 200; ++i) {
      for (Link l : {Link::Logit, Link::Probit}) {
        ASSERT_GT(sample_utility(eta, 1, l, rng), 0.0) << eta;
        ASSERT_LT(sample_utility(eta, 0, l, rng), 0.0) << eta;
      }
    }
  }
}

TEST(Utility, ProbitIsHalfNormal) {
  RngStream rng(2);
  std::vector<double> x(20000);
  for (auto& v : x) v = sample_utility(0.0, 1, Link::Probit, rng);
  EXPECT_GT(ks_test(x, [](double t) { return 2 * norm_cdf(t) - 1; }), 0.01);
}

TEST(Utility, LogitIsTruncatedLogistic) {
  RngStream rng(3);
  const double eta = -1.3;
  std::vector<double> x(20000);
  for (auto& v : x) v = sample_utility(eta, 1, Link::Logit, rng);
  const double F0 = 1 / (1 + std::exp(eta));
  EXPECT_GT(ks_test(x, [&](double t) { return (1 / (1 + std::exp(-(t - eta))) - F0) / (1 - F0); }), 0.01);
}

TEST(Omega, UntiltedAndTiltedMeans) {
  RngStream rng(4);
  double s0 = 0, s10 = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) {
    s0 += sample_omega(1.2, 1.2, rng);
    s10 += sample_omega(10.0, 0.0, rng);
  }
  EXPECT_NEAR(s0 / n, 0.5, 0.01);
  EXPECT_NEAR(s10 / n, 0.0999, 0.002);
}

TEST(WorkingStar, ThresholdPriorHandCase) {
  Vector beta(1);
  beta << 2.0;
  const ThresholdPrior t = threshold_prior(beta, Matrix::Identity(1, 1), 1.0);
  EXPECT_NEAR(t.g1, -1.0, 1e-15);
  EXPECT_NEAR(t.G1, 0.5, 1e-15);
  const ThresholdPrior big = threshold_prior(beta, Matrix::Identity(1, 1), 1e12);
  EXPECT_NEAR(big.g1, -2.0, 1e-9);
  EXPECT_NEAR(big.G1, 1.0, 1e-9);
}

TEST(WorkingStar, ZeroInterceptCentred) {
  RngStream rng(5);
  const PriorConfig prior = PriorConfig::defaults(1);
  double s = 0;
  const int n = 40000;
  for (int i = 0; i < n; ++i) s += sample_working_star(Vector::Zero(1), Matrix::Identity(1, 1) / 100.0, prior, Boost::Full, rng).gamma;
  EXPECT_NEAR(s / n, 0.0, 0.2);
  const WorkingPair none = sample_working_star(Vector::Zero(1), Matrix::Identity(1, 1), prior, Boost::None, rng);
  EXPECT_EQ(none.gamma, 0.0);
  EXPECT_EQ(none.delta, 1.0);
}

TEST(GammaBounds, Conventions) {
  Vector z(2);
  z << -1, 2;
  IVector y(2);
  y << 0, 1;
  auto [lo, hi] = gamma_bounds(z, y);
  EXPECT_EQ(lo, -1);
  EXPECT_EQ(hi, 2);
  EXPECT_EQ(gamma_bounds(z, IVector::Ones(2)).first, -kInf);
  EXPECT_EQ(gamma_bounds(z, IVector::Zero(2)).second, kInf);
  y << 1, 0;
  EXPECT_THROW(gamma_bounds(z, y), ConstraintError);
}

TEST(Threshold, PriorTVariant) {
  PriorConfig prior = PriorConfig::defaults(1);
  RngStream rng(6);
  for (int i = 0; i < 100; ++i) {
    const double g = sample_threshold(-0.3, 0.2, prior, GammaStep::PriorT, 10, 5, rng);
    ASSERT_TRUE(g > -0.3 && g < 0.2);
  }
  // t(2 d0) with scale sqrt(G0*) = 10 on (0, inf) at U = 0.5
  EXPECT_NEAR(trunc_student_quantile(2 * prior.d0, std::sqrt(prior.G0_star()), 0, kInf, 0.5), 7.267, 1e-3);
}

TEST(Delta, ConditionalParams) {
  const PriorConfig prior = PriorConfig::defaults(1);
  const IgParams empty = binary_delta_params(0.0, 0, 0.0, prior);
  EXPECT_EQ(empty.shape, prior.d0 + 0.5);
  EXPECT_EQ(empty.scale, prior.D0);
  EXPECT_EQ(binary_delta_params(0.0, 7, 0.0, prior).shape, prior.d0 + 0.5 + 3.5);

  // A0 = 1, x = 1, omega = 2, z = 3: b = 2 and D = D0 + 3
  const Matrix X = Matrix::Ones(1, 1);
  const Vector z = Vector::Constant(1, 3.0), w = Vector::Constant(1, 2.0);
  const PosteriorMoments m = posterior_moments(X, z, w, Matrix::Identity(1, 1), Vector::Zero(1));
  PriorConfig p = prior;
  p.G0 = 1.0;
  const IgParams q = binary_delta_params(0.0, 1, residual_form(X, z, w, Matrix::Identity(1, 1), m), p);
  EXPECT_NEAR(m.b[0], 2.0, 1e-14);
  EXPECT_NEAR(q.scale, p.D0 + 3.0, 1e-12);
}

TEST(Sweep, SignConsistencyAndStateShapes) {
  const BinaryDataset data = balanced_data(100, 3, 7);
  const PriorConfig prior = PriorConfig::defaults(3);
  for (Link link : {Link::Logit, Link::Probit}) {
    McmcConfig cfg;
    cfg.link = link;
    RngStream rng(8);
    BinaryState s = binary_init(data, link, rng);
    for (int it = 0; it < 200; ++it) {
      upg_binary_sweep(s, data, prior, cfg, rng);
      for (Eigen::Index i = 0; i < data.N(); ++i) ASSERT_EQ(s.z[i] > 0, data.y[i] == 1);
      ASSERT_GT(s.delta, 0.0);
      ASSERT_TRUE(s.beta.allFinite());
    }
  }
}

TEST(Sweep, ScaleOnlyKeepsThresholdAtZero) {
  const BinaryDataset data = balanced_data(50, 2, 9);
  McmcConfig cfg;
  cfg.boost = Boost::ScaleOnly;
  RngStream rng(10);
  BinaryState s = binary_init(data, cfg.link, rng);
  for (int it = 0; it < 50; ++it) {
    upg_binary_sweep(s, data, PriorConfig::defaults(2), cfg, rng);
    ASSERT_EQ(s.gamma, 0.0);
  }
}

TEST(Sweep, NoneIsAlbertChib) {
  const BinaryDataset data = balanced_data(60, 2, 11);
  const PriorConfig prior = PriorConfig::defaults(2);
  McmcConfig cfg;
  cfg.boost = Boost::None;
  cfg.link = Link::Probit;
  RngStream r1(12), r2(12);
  BinaryState a = binary_init(data, Link::Probit, r1), b = binary_init(data, Link::Probit, r2);
  for (int it = 0; it < 20; ++it) {
    upg_binary_sweep(a, data, prior, cfg, r1);
    albert_chib_sweep(b, data, prior, r2);
    ASSERT_EQ(a.beta, b.beta);
    ASSERT_EQ(a.delta, 1.0);
  }
}

TEST(Sweep, BackTransformRoundTrip) {
  Vector beta(3);
  beta << 0.3, -1.2, 0.7;
  const double delta = 2.7, gamma = -0.4;
  Vector bt = std::sqrt(delta) * beta;
  bt[2] += gamma;
  Vector back = bt;
  back[2] -= gamma;
  back /= std::sqrt(delta);
  EXPECT_LT((back - beta).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(RunChain, Reproducible) {
  const BinaryDataset data = balanced_data(40, 2, 13);
  McmcConfig cfg;
  cfg.draws = 10;
  cfg.burnin = 0;
  cfg.seed = 99;
  const DrawsStore a = run_binary(data, PriorConfig::defaults(2), cfg);
  const DrawsStore b = run_binary(data, PriorConfig::defaults(2), cfg);
  EXPECT_EQ(a.beta.rows(), 10);
  EXPECT_EQ(a.beta, b.beta);
  EXPECT_EQ(a.names.back(), "intercept");
}

TEST(RunChain, InterceptOnlyMatchesQuadrature) {
  Scenario sc;
  sc.N = 50;
  sc.intercept = -1.0;
  RngStream rng(14);
  const BinaryDataset data = simulate_dataset(sc, rng).binary();
  const PriorConfig prior = PriorConfig::defaults(1);
  McmcConfig cfg;
  cfg.draws = 20000;
  cfg.burnin = 1000;
  const DrawsStore d = run_binary(data, prior, cfg);
  const oracle::Moments ref = oracle::intercept_logit_posterior(data.y.sum(), 50, prior.marginal_cov()(0, 0));
  const Vector chain = d.beta.col(0);
  EXPECT_NEAR(chain.mean(), ref.mean, 3 * oracle::mc_se(chain));
  EXPECT_NEAR(inefficiency(chain).sd, ref.sd, 0.05 * ref.sd);
}

TEST(RunChain, BoostModesAgree) {
  const BinaryDataset data = balanced_data(200, 2, 15);
  const PriorConfig prior = PriorConfig::defaults(2);
  McmcConfig cfg;
  cfg.draws = 8000;
  cfg.burnin = 500;
  std::vector<Vector> means;
  std::vector<Vector> ses;
  for (Boost b : {Boost::Full, Boost::ScaleOnly, Boost::None}) {
    cfg.boost = b;
    const DrawsStore d = run_binary(data, prior, cfg);
    Vector m(2), se(2);
    for (int j = 0; j < 2; ++j) {
      m[j] = d.beta.col(j).mean();
      se[j] = oracle::mc_se(d.beta.col(j));
    }
    means.push_back(m);
    ses.push_back(se);
  }
  for (int k = 1; k < 3; ++k) {
    for (int j = 0; j < 2; ++j) {
      EXPECT_LT(std::fabs(means[k][j] - means[0][j]), 3.5 * std::hypot(ses[k][j], ses[0][j])) << k << " " << j;
    }
  }
}
