#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "upg/binary.hpp"
#include "upg/dist.hpp"
#include "upg/linalg.hpp"
#include "upg/model.hpp"

namespace upg {

// Binary state-space model with random-walk coefficients:
//   y_t = 1 <=> z_t > 0,  z_t = X_t beta_t + eps_t,  beta_t = beta_{t-1} + w_t,  w_t ~ N(0, diag theta),
//   beta_{j0} ~ N(beta_j, theta_j P_jj),  beta_j ~ N(0, A0jj).
struct SsmState {
  Matrix path;  // (T+1) x d, row 0 is the initial state
  Vector init;  // initial means
  Vector theta;
  Vector z, omega;
  double gamma = 0.0;
  double delta = 1.0;
};

// Diagonal prior variances of the initial means in the expanded model.
inline Vector ssm_init_var(const PriorConfig& prior, Boost boost) {
  Vector a = prior.A0.diagonal();
  if (boost != Boost::Full) a[a.size() - 1] += prior.G0;
  return a;
}

inline SsmState ssm_init(const TsDataset& data, const PriorConfig& prior, Link link, RngStream& rng) {
  SsmState s;
  const Eigen::Index T = data.N(), d = data.d();
  s.path = Matrix::Zero(T + 1, d);
  s.init = Vector::Zero(d);
  s.theta = Vector::Constant(d, prior.C0 / (prior.c0 + 1.0));
  s.omega = Vector::Ones(T);
  s.z.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) s.z[t] = sample_utility(0.0, data.y[t], link, rng);
  return s;
}

// Filter output at delta = 1; index t of the vectors refers to time t, with t = 0
// the initial state (zhat, S and Ppred unused there).
struct FilterCache {
  Vector zhat;
  Vector S;
  std::vector<Vector> xf;
  std::vector<Matrix> Pf;
  std::vector<Matrix> Ppred;
  std::vector<Vector> K;
};

inline FilterCache scaled_kalman_filter(const Vector& zt, const Vector& omega, const Matrix& X, const Vector& theta,
                                        const Vector& init_var, const Vector& Pjj) {
  const Eigen::Index T = zt.size(), d = X.cols();
  if (X.rows() != T || omega.size() != T || theta.size() != d) throw DimensionError("scaled_kalman_filter: dimension mismatch");
  FilterCache c;
  c.zhat.resize(T + 1);
  c.S.resize(T + 1);
  c.xf.resize(T + 1);
  c.Pf.resize(T + 1);
  c.Ppred.resize(T + 1);
  c.K.resize(T + 1);
  c.zhat[0] = 0.0;
  c.S[0] = 0.0;
  c.xf[0] = Vector::Zero(d);
  c.Pf[0] = (init_var.array() + theta.array() * Pjj.array()).matrix().asDiagonal();
  const Matrix Q = theta.asDiagonal();
  for (Eigen::Index t = 1; t <= T; ++t) {
    const Vector x = X.row(t - 1).transpose();
    c.Ppred[t] = c.Pf[t - 1] + Q;
    const Vector Px = c.Ppred[t] * x;
    c.zhat[t] = x.dot(c.xf[t - 1]);
    c.S[t] = x.dot(Px) + 1.0 / omega[t - 1];
    if (!(c.S[t] > 0.0)) throw FactorizationError("scaled_kalman_filter: non-positive predictive variance");
    c.K[t] = Px / c.S[t];
    c.xf[t] = c.xf[t - 1] + c.K[t] * (zt[t - 1] - c.zhat[t]);
    c.Pf[t] = c.Ppred[t] - c.K[t] * Px.transpose();
    c.Pf[t] = 0.5 * (c.Pf[t] + c.Pf[t].transpose());
  }
  return c;
}

// sum (zt - zhat)^2 / S over t = 1..T
inline double ssm_standardized_ssr(const Vector& zt, const FilterCache& c) {
  double s = 0.0;
  for (Eigen::Index t = 1; t < c.zhat.size(); ++t) {
    const double r = zt[t - 1] - c.zhat[t];
    s += r * r / c.S[t];
  }
  return s;
}

// log prod_t N(zt_t; zhat_t, delta S_t)
inline double ssm_log_integrated_likelihood(const Vector& zt, const FilterCache& c, double delta) {
  double lp = 0.0;
  for (Eigen::Index t = 1; t < c.zhat.size(); ++t) {
    const double v = delta * c.S[t];
    const double r = zt[t - 1] - c.zhat[t];
    lp += -0.5 * (std::log(2.0 * std::numbers::pi * v) + r * r / v);
  }
  return lp;
}

inline double sample_delta_ssm(double gamma, const Vector& zt, const FilterCache& c, const PriorConfig& prior,
                               Boost boost, RngStream& rng, double shape_shift = 0.0) {
  const double T = static_cast<double>(zt.size());
  double shape = prior.d0 + 0.5 * T + shape_shift;
  double scale = prior.D0 + 0.5 * ssm_standardized_ssr(zt, c);
  if (boost == Boost::Full) {
    shape += 0.5;
    scale += gamma * gamma / (2.0 * prior.G0);
  }
  return invgamma_sample(shape, scale, rng);
}

// Joint draw of the path given the filter, covariances scaled by delta.
inline Matrix ffbs(const FilterCache& c, double delta, RngStream& rng) {
  const Eigen::Index T = static_cast<Eigen::Index>(c.xf.size()) - 1;
  const Eigen::Index d = c.xf[0].size();
  Matrix path(T + 1, d);
  path.row(T) = mvn_sample(c.xf[T], delta, cholesky(c.Pf[T]), rng).transpose();
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    Eigen::LLT<Matrix> llt(c.Ppred[t + 1]);
    if (llt.info() != Eigen::Success) throw FactorizationError("ffbs: predictive covariance not positive definite");
    const Matrix J = llt.solve(c.Pf[t]).transpose();  // Pf Ppred^-1
    const Vector mean = c.xf[t] + J * (path.row(t + 1).transpose() - c.xf[t]);
    Matrix cov = c.Pf[t] - J * c.Ppred[t + 1] * J.transpose();
    cov = 0.5 * (cov + cov.transpose());
    path.row(t) = mvn_sample(mean, delta, cholesky(cov), rng).transpose();
  }
  return path;
}

inline void sample_init_and_theta(const Matrix& path, double delta, const Vector& init_var, const PriorConfig& prior,
                                  Vector& init, Vector& theta, RngStream& rng) {
  const Eigen::Index T = path.rows() - 1, d = path.cols();
  init.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double a = init_var[j];
    const double p = theta[j] * prior.Pjj[j];
    const double mean = a * path(0, j) / (a + p);
    const double var = delta * a * p / (a + p);
    init[j] = mean + std::sqrt(var) * rng.normal();

    double ss = (path(0, j) - init[j]) * (path(0, j) - init[j]) / prior.Pjj[j];
    for (Eigen::Index t = 1; t <= T; ++t) ss += (path(t, j) - path(t - 1, j)) * (path(t, j) - path(t - 1, j));
    const double C = prior.C0 + ss / (2.0 * delta);
    theta[j] = std::max(1e-12, invgamma_sample(prior.c0 + 0.5 * (T + 1.0), C, rng));
  }
}

inline void upg_ssm_sweep(SsmState& s, const TsDataset& data, const PriorConfig& prior, const McmcConfig& cfg,
                          RngStream& rng) {
  const Eigen::Index T = data.N(), d = data.d();
  const Vector init_var = ssm_init_var(prior, cfg.boost);

  // (a-1)
  s.z.resize(T);
  s.omega.resize(T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const double eta = data.X.row(t).dot(s.path.row(t + 1));
    s.z[t] = sample_utility(eta, data.y[t], cfg.link, rng);
    s.omega[t] = cfg.link == Link::Logit ? sample_omega(s.z[t], eta, rng) : 1.0;
  }

  // (a-2)
  const Matrix A_inv = init_var.cwiseInverse().asDiagonal();
  const WorkingPair star = sample_working_star(s.init, A_inv, prior, cfg.boost, rng);
  const Vector zt = (std::sqrt(star.delta) * s.z).array() + star.gamma;

  // (b-1) threshold with delta, states and initial means integrated out
  const FilterCache cache = scaled_kalman_filter(zt, s.omega, data.X, s.theta, init_var, prior.Pjj);
  double gamma = 0.0, delta = 1.0;
  if (cfg.boost == Boost::Full) {
    const auto [lo, hi] = gamma_bounds(zt, data.y);
    gamma = sample_threshold(lo, hi, prior, cfg.gamma_step, static_cast<double>(T), ssm_standardized_ssr(zt, cache), rng);
  }
  // (b-2)
  if (cfg.boost != Boost::None) delta = sample_delta_ssm(gamma, zt, cache, prior, cfg.boost, rng, cfg.delta_shape_shift);
  Matrix path = ffbs(cache, delta, rng);

  // (b-3)
  Vector init;
  sample_init_and_theta(path, delta, init_var, prior, init, s.theta, rng);

  // (b-4)
  const double sd = std::sqrt(delta);
  path.col(d - 1).array() -= gamma;
  init[d - 1] -= gamma;
  s.path = path / sd;
  s.init = init / sd;
  s.z = (zt.array() - gamma) / sd;
  s.gamma = gamma;
  s.delta = delta;
}

// ---------------------------------------------------------------------------
// Global pandemic indicator, 1800-2020: y_t = 1 inside any listed episode.

struct PandemicEpisode {
  int first;
  int last;
  const char* name;
};

inline const std::vector<PandemicEpisode>& pandemic_episodes() {
  static const std::vector<PandemicEpisode> eps = {
      {1855, 1860, "third plague pandemic"}, {1889, 1890, "Russian flu"},
      {1915, 1926, "encephalitis lethargica"}, {1918, 1920, "Spanish flu"},
      {1957, 1958, "Asian flu"},              {1968, 1969, "Hong Kong flu"},
      {2009, 2010, "swine flu"},              {2019, 2020, "COVID-19"}};
  return eps;
}

inline constexpr int kPandemicFirstYear = 1800;
inline constexpr int kPandemicLastYear = 2020;

// Local-level design (intercept only).
inline TsDataset pandemic_series() {
  const int T = kPandemicLastYear - kPandemicFirstYear + 1;
  TsDataset data;
  data.X = Matrix::Ones(T, 1);
  data.y = IVector::Zero(T);
  for (const auto& e : pandemic_episodes()) {
    for (int yr = e.first; yr <= e.last; ++yr) data.y[yr - kPandemicFirstYear] = 1;
  }
  return data;
}

}  // namespace upg
