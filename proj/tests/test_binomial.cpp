#include <gtest/gtest.h>

#include "oracles.hpp"
#include "upg/binomial.hpp"
#include "upg/fit.hpp"

using namespace upg;

TEST(Utilities, SignsByConstruction) {
  RngStream rng(1);
  for (double eta : {-30.0, -2.0, 0.0, 2.0, 30.0}) {
    for (int i = 0; i < 500; ++i) {
      ASSERT_GT(sample_w(eta, 3, rng), 0.0);
      ASSERT_LT(sample_v(eta, 3, 8, rng), 0.0);
    }
  }
  EXPECT_THROW(sample_w(0.0, 0, rng), ParameterError);
  EXPECT_THROW(sample_v(0.0, 4, 4, rng), ParameterError);
}

// with one trial the latent is a logistic(eta) utility truncated to its sign
TEST(Utilities, SingleTrialIsTruncatedLogistic) {
  RngStream rng(2);
  const double eta = 0.7;
  const double F0 = 1 / (1 + std::exp(eta));
  std::vector<double> w(20000), v(20000);
  for (auto& x : w) x = sample_w(eta, 1, rng);
  for (auto& x : v) x = sample_v(eta, 0, 1, rng);
  auto F = [&](double t) { return 1 / (1 + std::exp(-(t - eta))); };
  EXPECT_GT(ks_test(w, [&](double t) { return (F(t) - F0) / (1 - F0); }), 0.01);
  EXPECT_GT(ks_test(v, [&](double t) { return F(t) / F0; }), 0.01);
}

// with y = n, w is the smallest of y logistic(eta) utilities that are all positive
TEST(Utilities, AllSuccessesIsMinimum) {
  RngStream rng(3);
  const double eta = -0.4;
  const int y = 4;
  std::vector<double> w(20000);
  for (auto& x : w) x = sample_w(eta, y, rng);
  const double F0 = 1 / (1 + std::exp(eta));
  auto cdf = [&](double t) {
    const double F = 1 / (1 + std::exp(-(t - eta)));
    return 1 - std::pow((1 - F) / (1 - F0), y);
  };
  EXPECT_GT(ks_test(w, cdf), 0.01);
}

TEST(Utilities, KappaValues) {
  EXPECT_EQ(kappa_w(1), 0.0);
  EXPECT_EQ(kappa_w(3), -1.0);
  EXPECT_EQ(kappa_v(0, 1), 0.0);
  EXPECT_EQ(kappa_v(2, 7), 2.0);
}

TEST(Utilities, OmegasMarkAbsentLatents) {
  RngStream rng(4);
  BinomialOmegas o = sample_omegas_binomial(1.0, -1.0, 0.0, 0, 3, rng);
  EXPECT_EQ(o.w, kInf);
  EXPECT_GT(o.v, 0.0);
  o = sample_omegas_binomial(1.0, -1.0, 0.0, 3, 3, rng);
  EXPECT_EQ(o.v, kInf);
  double s = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) s += sample_omegas_binomial(0.5, -1.0, 0.5, 2, 5, rng).w;
  EXPECT_NEAR(s / n, 0.75, 0.015);  // PG(3, 0) mean
}

TEST(DeltaMode, HandValues) {
  const ModeCurvature a = delta_mode_curvature(3.0, 1.0, 0.0);
  EXPECT_NEAR(a.mode, 0.25, 1e-15);  // D/(d+1)
  const ModeCurvature b = delta_mode_curvature(1.0, 1.0, 1.0);
  EXPECT_NEAR(b.mode, 16.0 / std::pow(1 + std::sqrt(33.0), 2), 1e-14);
  const ModeCurvature c = delta_mode_curvature(3.0, 2.0, 1.0);
  EXPECT_NEAR(c.mode, 64.0 / std::pow(1 + std::sqrt(129.0), 2), 1e-14);
  EXPECT_THROW(delta_mode_curvature(1.0, 0.0, 1.0), ParameterError);
}

TEST(DeltaMode, MatchesNumericalDerivatives) {
  for (double BI : {-3.0, 0.0, 2.0}) {
    const DeltaConditional p{4.0, 2.5, BI};
    const ModeCurvature mc = delta_mode_curvature(p.dI, p.DI, p.BI);
    const double h = 1e-4 * mc.mode;
    const double f0 = delta_log_target(mc.mode, p), fp = delta_log_target(mc.mode + h, p),
                 fm = delta_log_target(mc.mode - h, p);
    EXPECT_NEAR((fp - fm) / (2 * h), 0.0, 1e-6 / mc.mode);
    const double d2 = (fp - 2 * f0 + fm) / (h * h);
    EXPECT_NEAR(d2, mc.curvature, 1e-4 * std::fabs(mc.curvature)) << BI;
  }
}

TEST(DeltaResample, FlatWeightsWhenNoCrossTerm) {
  RngStream rng(5);
  const DeltaConditional p{6.0, 4.0, 0.0};
  std::vector<double> x(20000);
  for (auto& v : x) v = delta_resample(p, 10, DeltaAux::InvGamma, rng);
  EXPECT_GT(ks_test(x, [&](double t) { return invgamma_cdf(t, p.dI, p.DI); }), 0.01);
}

TEST(DeltaResample, SingleDrawIsAuxiliary) {
  const DeltaConditional p{6.0, 4.0, 1.5};
  const ModeCurvature mc = delta_mode_curvature(p.dI, p.DI, p.BI);
  const double q = -mc.curvature * mc.mode * mc.mode;
  RngStream a(6), b(6);
  EXPECT_EQ(delta_resample(p, 1, DeltaAux::InvGamma, a), invgamma_sample(q - 1, mc.mode * q, b));
  EXPECT_THROW(delta_resample(p, 0, DeltaAux::InvGamma, a), ParameterError);
}

TEST(DeltaResample, ApproximatesTargetWithCrossTerm) {
  for (DeltaAux aux : {DeltaAux::InvGamma, DeltaAux::SqrtInvGamma}) {
    const DeltaConditional p{5.0, 4.0, 2.0};
    const oracle::Moments ref =
        oracle::quadrature_moments([&](double d) { return delta_log_target(d, p); }, 1e-4, 30.0);
    RngStream rng(7);
    double s = 0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) s += delta_resample(p, 10, aux, rng);
    EXPECT_NEAR(s / n, ref.mean, 0.02 * ref.mean);
  }
}

TEST(DeltaConditional, SingleTrialHasNoCrossTerm) {
  Scenario sc;
  sc.model = Model::Binomial;
  sc.N = 30;
  sc.d = 2;
  sc.trials = 1;
  RngStream rng(8);
  const BinomialDataset data = simulate_dataset(sc, rng).binomial();
  const PriorConfig prior = PriorConfig::defaults(2);
  Vector c = Vector::Zero(30);  // kappa = 0 for every latent when n = 1
  for (int i = 0; i < 30; ++i) c[i] = -(data.y[i] ? kappa_w(1) : kappa_v(0, 1));
  const OffsetRegression r = offset_regression(data.X, Vector::Ones(30), Vector::Ones(30), c, Matrix::Identity(2, 2) / 100.0);
  const DeltaConditional p = delta_conditional_params(0.3, r, prior, Boost::Full);
  EXPECT_EQ(p.BI, 0.0);
  EXPECT_EQ(p.dI, prior.d0 + 15.5);
  EXPECT_NEAR(p.DI, prior.D0 + 0.5 * r.Qaa + 0.09 / 200.0, 1e-14);
  EXPECT_EQ(delta_conditional_params(0.3, r, prior, Boost::ScaleOnly).dI, prior.d0 + 15.0);
}

TEST(OffsetRegression, MatchesDirectIntegration) {
  // log marginal of zt + sqrt(delta) c given delta, up to a constant, is
  // -n/2 log delta - Qaa/(2 delta) - Qac/sqrt(delta) + (terms free of delta)
  RngStream rng(9);
  const int n = 6;
  Matrix X(n, 2);
  Vector z(n), w(n), c(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = rng.normal();
    X(i, 1) = 1;
    z[i] = rng.normal();
    w[i] = 0.5 + rng.uniform();
    c[i] = rng.normal();
  }
  const Matrix A0 = Matrix::Identity(2, 2) * 3.0;
  const OffsetRegression r = offset_regression(X, z, w, c, A0.inverse());
  auto direct = [&](double delta) {
    const Vector y = z + std::sqrt(delta) * c;
    const Matrix S = delta * (X * A0 * X.transpose() + Matrix(w.cwiseInverse().asDiagonal()));
    const Eigen::LDLT<Matrix> ldlt(S);
    return -0.5 * std::log(ldlt.vectorD().prod()) - 0.5 * y.dot(ldlt.solve(y));
  };
  auto formula = [&](double delta) { return -0.5 * n * std::log(delta) - r.Qaa / (2 * delta) - r.Qac / std::sqrt(delta); };
  const double base = direct(1.0) - formula(1.0);
  for (double delta : {0.3, 2.0, 7.5}) EXPECT_NEAR(direct(delta) - formula(delta), base, 1e-10);
}

TEST(Sweep, SingleTrialMatchesBinaryLogit) {
  Scenario sc;
  sc.N = 150;
  sc.d = 2;
  sc.slopes = Vector::Constant(1, 0.8);
  RngStream rng(10);
  const SimulatedData sim = simulate_dataset(sc, rng);
  const BinaryDataset bd = sim.binary();
  const BinomialDataset nd{sim.X, sim.y, IVector::Ones(150)};
  const PriorConfig prior = PriorConfig::defaults(2);
  McmcConfig cfg;
  cfg.draws = 8000;
  cfg.burnin = 500;
  const DrawsStore a = run_binary(bd, prior, cfg);
  cfg.seed = 5;
  const DrawsStore b = run_binomial(nd, prior, cfg);
  for (int j = 0; j < 2; ++j) {
    const double se = std::hypot(oracle::mc_se(a.beta.col(j)), oracle::mc_se(b.beta.col(j)));
    EXPECT_LT(std::fabs(a.beta.col(j).mean() - b.beta.col(j).mean()), 3.5 * se) << j;
  }
}

TEST(Sweep, InterceptOnlyMatchesQuadrature) {
  // 12 observations with 10 trials each, 31 successes in total
  const int N = 12, trials = 10;
  BinomialDataset data{Matrix::Ones(N, 1), IVector::Zero(N), IVector::Constant(N, trials)};
  const int ys[N] = {2, 3, 1, 4, 2, 0, 5, 3, 2, 4, 3, 2};
  int s = 0;
  for (int i = 0; i < N; ++i) s += data.y[i] = ys[i];
  const PriorConfig prior = PriorConfig::defaults(1);
  McmcConfig cfg;
  cfg.draws = 20000;
  cfg.burnin = 1000;
  for (Boost b : {Boost::Full, Boost::None}) {
    cfg.boost = b;
    const DrawsStore d = run_binomial(data, prior, cfg);
    const oracle::Moments ref = oracle::intercept_logit_posterior(s, N * trials, prior.marginal_cov()(0, 0));
    const Vector chain = d.beta.col(0);
    EXPECT_NEAR(chain.mean(), ref.mean, 3.5 * oracle::mc_se(chain));
    EXPECT_NEAR(inefficiency(chain).sd, ref.sd, 0.05 * ref.sd);
  }
}

TEST(Sweep, ExtremeCountsStayFinite) {
  BinomialDataset data{Matrix::Ones(3, 1), IVector::Zero(3), IVector::Constant(3, 50)};
  data.y << 0, 50, 0;
  McmcConfig cfg;
  cfg.draws = 200;
  cfg.burnin = 0;
  const DrawsStore d = run_binomial(data, PriorConfig::defaults(1), cfg);
  EXPECT_TRUE(d.beta.allFinite());
  EXPECT_TRUE((d.delta.array() > 0).all());
}
