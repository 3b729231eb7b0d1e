#pragma once

#include <cmath>

#include "upg/binary.hpp"
#include "upg/binomial.hpp"
#include "upg/dist.hpp"
#include "upg/linalg.hpp"
#include "upg/model.hpp"

namespace upg {

// Utilities of the aggregated model for one category block: category k, the
// baseline 0 and the maximum over the remaining categories A.
struct UtilityTriple {
  double uk = 0.0;
  double u0 = 0.0;
  double uA = -kInf;  // -inf marks an empty A (m = 1)
};

enum class TripleWinner { K, Baseline, A };

inline TripleWinner triple_winner(int y, int k) {
  if (y == k) return TripleWinner::K;
  if (y == 0) return TripleWinner::Baseline;
  return TripleWinner::A;
}

// Exponential-race draw of (u_k, u_0, u_A) given the observed winner: a shared
// Exp(1 + sum lambda) term plus independent increments for the losers.
inline UtilityTriple sample_utility_triple(double lambda_k, double lambda_A, TripleWinner who, RngStream& rng) {
  const bool has_A = lambda_A > 0.0;
  const double shared = rng.exponential() / (1.0 + lambda_k + lambda_A);
  double ek = shared, e0 = shared, eA = shared;
  if (who != TripleWinner::K) ek += rng.exponential() / lambda_k;
  if (who != TripleWinner::Baseline) e0 += rng.exponential();
  if (has_A && who != TripleWinner::A) eA += rng.exponential() / lambda_A;
  UtilityTriple t;
  t.uk = -std::log(ek);
  t.u0 = -std::log(e0);
  t.uA = has_A ? -std::log(eA) : -kInf;
  return t;
}

struct MnlState {
  Matrix B;      // m x d, baseline row omitted
  Vector gamma;  // per category, last sweep
  Vector delta;
  // latents of the most recent category block; u0 and uA are filled only by
  // the aggregated scheme, uk holds the binary utility under the offset scheme
  Vector uk, u0, uA, omega;
};

inline MnlState mnl_init(const MultinomialDataset& data) {
  MnlState s;
  s.B = Matrix::Zero(data.m, data.d());
  s.gamma = Vector::Zero(data.m);
  s.delta = Vector::Ones(data.m);
  return s;
}

// (L, O) for category k given boosted utilities relative to the baseline.
inline std::pair<double, double> mnl_gamma_bounds(const Vector& zk, const Vector& zA, const IVector& y, int k) {
  double lo = -kInf, hi = kInf;
  for (Eigen::Index i = 0; i < zk.size(); ++i) {
    if (y[i] == k) hi = std::min(hi, zk[i] - std::max(0.0, zA[i]));
    else if (y[i] == 0) lo = std::max(lo, zk[i]);
    else lo = std::max(lo, zk[i] - zA[i]);
  }
  if (!(lo < hi)) throw ConstraintError("mnl_gamma_bounds: L >= O for category " + std::to_string(k));
  return {lo, hi};
}

// log(1 + sum_{l != k} lambda_l) per observation, k 1-based
inline Vector mnl_offset(const Matrix& eta, int k) {
  Vector c(eta.rows());
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    double mx = 0.0;
    for (Eigen::Index l = 0; l < eta.cols(); ++l) {
      if (l != k - 1) mx = std::max(mx, eta(i, l));
    }
    double acc = std::exp(-mx);
    for (Eigen::Index l = 0; l < eta.cols(); ++l) {
      if (l != k - 1) acc += std::exp(eta(i, l) - mx);
    }
    c[i] = mx + std::log(acc);
  }
  return c;
}

namespace detail {

inline void store_category(int k, MnlState& s, Vector bt, double gamma, double delta) {
  bt[bt.size() - 1] -= gamma;
  s.B.row(k - 1) = (bt / std::sqrt(delta)).transpose();
  s.gamma[k - 1] = gamma;
  s.delta[k - 1] = delta;
}

// Category k as a binary logit for 1{y = k} with offset; boosting as in the binomial
// sampler, where b_N depends on sqrt(delta).
inline void mnl_offset_step(int k, MnlState& s, const MultinomialDataset& data, const PriorConfig& prior,
                            const McmcConfig& cfg, const Matrix& A_inv, const Matrix& eta, RngStream& rng) {
  const Eigen::Index N = data.N();
  const Vector c = mnl_offset(eta, k);
  IVector dk(N);
  s.uk.resize(N);
  s.omega.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    dk[i] = data.y[i] == k ? 1 : 0;
    const double lin = eta(i, k - 1) - c[i];
    s.uk[i] = logit_utility(lin, dk[i], rng.uniform());
    s.omega[i] = pg_sample({2, s.uk[i] - lin}, rng);
  }
  s.u0.resize(0);
  s.uA.resize(0);

  const Vector beta_k = s.B.row(k - 1).transpose();
  const WorkingPair star = sample_working_star(beta_k, A_inv, prior, cfg.boost, rng);
  const Vector zt = (std::sqrt(star.delta) * s.uk).array() + star.gamma;

  const OffsetRegression reg = offset_regression(data.X, zt, s.omega, c, A_inv);
  double gamma = 0.0, delta = 1.0;
  if (cfg.boost != Boost::None) {
    if (cfg.boost == Boost::Full) {
      const auto [lo, hi] = gamma_bounds(zt, dk);
      // with a single category the delta conditional is inverse gamma and the
      // threshold can be drawn with delta integrated out, as for binary data
      gamma = data.m == 1 ? sample_threshold(lo, hi, prior, cfg.gamma_step, static_cast<double>(N), reg.Qaa, rng)
                          : sample_threshold_given_delta(lo, hi, star.delta, prior, cfg.gamma_step, rng);
    }
    const DeltaConditional p = delta_conditional_params(gamma, reg, prior, cfg.boost, cfg.delta_shape_shift);
    delta = delta_resample(p, cfg.resample_draws, cfg.delta_aux, rng);
  }
  store_category(k, s, offset_coef_sample(reg, delta, rng), gamma, delta);
}

inline void mnl_aggregated_step(int k, MnlState& s, const MultinomialDataset& data, const PriorConfig& prior,
                                const McmcConfig& cfg, const Matrix& A_inv, const Matrix& eta, RngStream& rng) {
  const Eigen::Index N = data.N();
  const Eigen::Index d = data.d();

  // (a-1) triples and mixing weights
  s.uk.resize(N);
  s.u0.resize(N);
  s.uA.resize(N);
  s.omega.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const double lk = std::exp(eta(i, k - 1));
    double lA = 0.0;
    for (int l = 0; l < data.m; ++l) {
      if (l != k - 1) lA += std::exp(eta(i, l));
    }
    const UtilityTriple t = sample_utility_triple(lk, lA, triple_winner(data.y[i], k), rng);
    s.uk[i] = t.uk;
    s.u0[i] = t.u0;
    s.uA[i] = t.uA;
    s.omega[i] = pg_sample({2, t.uk - t.u0 - eta(i, k - 1)}, rng);
  }

  // (a-2) boost; work relative to the baseline utility
  const Vector beta_k = s.B.row(k - 1).transpose();
  const WorkingPair star = sample_working_star(beta_k, A_inv, prior, cfg.boost, rng);
  const double sq = std::sqrt(star.delta);
  const Vector zt = (sq * (s.uk - s.u0)).array() + star.gamma;
  Vector zA(N);
  for (Eigen::Index i = 0; i < N; ++i) zA[i] = data.m > 1 ? sq * (s.uA[i] - s.u0[i]) : -kInf;

  // (b-1)
  const PosteriorMoments mom = posterior_moments(data.X, zt, s.omega, A_inv, Vector::Zero(d));
  double gamma = 0.0, delta = 1.0;
  if (cfg.boost != Boost::None) {
    const double ssr = residual_form(data.X, zt, s.omega, A_inv, mom);
    double shape = prior.d0 + 0.5 * static_cast<double>(N) + cfg.delta_shape_shift;
    double scale = prior.D0 + 0.5 * ssr;
    if (cfg.boost == Boost::Full) {
      const auto [lo, hi] = mnl_gamma_bounds(zt, zA, data.y, k);
      gamma = sample_threshold(lo, hi, prior, cfg.gamma_step, static_cast<double>(N), ssr, rng);
      shape += 0.5;
      scale += gamma * gamma / (2.0 * prior.G0);
    }
    delta = invgamma_sample(shape, scale, rng);
  }

  // (b-2)
  store_category(k, s, mvn_sample(mom.b, delta, mom.chol, rng), gamma, delta);
}

}  // namespace detail

// Update of category k (1-based) given the current coefficients of all others.
inline void mnl_category_sweep(int k, MnlState& s, const MultinomialDataset& data, const PriorConfig& prior,
                               const McmcConfig& cfg, RngStream& rng) {
  if (k < 1 || k > data.m) throw ParameterError("mnl_category_sweep: category out of range");
  const Matrix A_inv = spd_inverse(expanded_prior_cov(prior, cfg.boost));
  const Matrix eta = data.X * s.B.transpose();  // N x m
  if (cfg.mnl_scheme == MnlScheme::Offset) detail::mnl_offset_step(k, s, data, prior, cfg, A_inv, eta, rng);
  else detail::mnl_aggregated_step(k, s, data, prior, cfg, A_inv, eta, rng);
}

inline void upg_mnl_sweep(MnlState& s, const MultinomialDataset& data, const PriorConfig& prior,
                          const McmcConfig& cfg, RngStream& rng) {
  for (int k = 1; k <= data.m; ++k) mnl_category_sweep(k, s, data, prior, cfg, rng);
}

}  // namespace upg
