#pragma once

#include <cmath>
#include <limits>
#include <utility>

#include "upg/dist.hpp"
#include "upg/linalg.hpp"
#include "upg/model.hpp"

namespace upg {

struct BinaryState {
  Vector beta;
  Vector z;      // utilities of the identified model
  Vector omega;  // PG mixing weights, ones for probit
  double gamma = 0.0;
  double delta = 1.0;
};

// ---------------------------------------------------------------------------
// utilities

namespace detail {

// z = eta + eps with eps truncated to (-eta, inf); the y = 0 case is the mirror image.
// The inverse cdf is evaluated as -F^-1(U * pi), which equals F^-1(1 - U * pi) but
// does not lose the tail to rounding.
inline double positive_utility_logit(double eta, double u) {
  const double log_p = std::log(u) - softplus(-eta);
  const double z = eta - (log_p - std::log1p(-std::exp(log_p)));
  return z > 0.0 ? z : std::numeric_limits<double>::min();
}

inline double positive_utility_probit(double eta, RngStream& rng) {
  const double z = eta + normal_tail_sample(-eta, rng);
  return z > 0.0 ? z : std::numeric_limits<double>::min();
}

}  // namespace detail

// Logit utility as a function of the uniform draw u.
inline double logit_utility(double eta, int y, double u) {
  return y == 1 ? detail::positive_utility_logit(eta, u) : -detail::positive_utility_logit(-eta, u);
}

inline double sample_utility(double eta, int y, Link link, RngStream& rng) {
  if (link == Link::Logit) return logit_utility(eta, y, rng.uniform());
  return y == 1 ? detail::positive_utility_probit(eta, rng) : -detail::positive_utility_probit(-eta, rng);
}

inline double sample_omega(double z, double eta, RngStream& rng) {
  return pg_sample({2, z - eta}, rng);
}

// ---------------------------------------------------------------------------
// working parameters

struct WorkingPair {
  double delta = 1.0;
  double gamma = 0.0;
};

struct ThresholdPrior {
  double g1 = 0.0;
  double G1 = 0.0;
};

// gamma | delta, beta ~ N(sqrt(delta) g1, delta G1). With diagonal A0 this is
// G1 = G0 A0dd / (G0 + A0dd), g1 = -beta_d G0 / (G0 + A0dd).
inline ThresholdPrior threshold_prior(const Vector& beta, const Matrix& A0_inv, double G0) {
  const Eigen::Index d = beta.size() - 1;
  ThresholdPrior t;
  t.G1 = 1.0 / (A0_inv(d, d) + 1.0 / G0);
  t.g1 = -A0_inv.row(d).dot(beta) * t.G1;
  return t;
}

// (delta*, gamma*) from their conditional prior given beta.
inline WorkingPair sample_working_star(const Vector& beta, const Matrix& A0_inv, const PriorConfig& prior,
                                       Boost boost, RngStream& rng) {
  WorkingPair w;
  if (boost == Boost::None) return w;
  w.delta = invgamma_sample(prior.d0, prior.D0, rng);
  if (boost == Boost::Full) {
    const ThresholdPrior t = threshold_prior(beta, A0_inv, prior.G0);
    w.gamma = std::sqrt(w.delta) * (t.g1 + std::sqrt(t.G1) * rng.normal());
  }
  return w;
}

// L = max over y = 0, O = min over y = 1; an empty side gives -inf / +inf.
inline std::pair<double, double> gamma_bounds(const Vector& zt, const IVector& y) {
  double lo = -kInf, hi = kInf;
  for (Eigen::Index i = 0; i < zt.size(); ++i) {
    if (y[i] == 1) hi = std::min(hi, zt[i]);
    else lo = std::max(lo, zt[i]);
  }
  if (!(lo < hi)) throw ConstraintError("gamma_bounds: L >= O, latent utilities inconsistent with y");
  return {lo, hi};
}

// Threshold draw in step (b). n_obs Gaussian observation terms with residual
// quadratic form ssr (coefficients profiled out) enter the collapsed variant.
inline double sample_threshold(double lo, double hi, const PriorConfig& prior, GammaStep step,
                               double n_obs, double ssr, RngStream& rng) {
  if (step == GammaStep::PriorT) return trunc_student_sample(2.0 * prior.d0, std::sqrt(prior.G0_star()), lo, hi, rng);
  const double dof = 2.0 * prior.d0 + n_obs;
  const double scale = std::sqrt(2.0 * prior.G0 * (prior.D0 + 0.5 * ssr) / dof);
  return trunc_student_sample(dof, scale, lo, hi, rng);
}

struct IgParams {
  double shape = 1.0;
  double scale = 1.0;
};

// sum w (z - X b)^2 + b' A_inv b
inline double residual_form(const Matrix& X, const Vector& z, const Vector& w, const Matrix& A_inv,
                            const PosteriorMoments& m) {
  const Vector r = z - X * m.b;
  return r.dot(w.cwiseProduct(r)) + m.b.dot(A_inv * m.b);
}

// delta | gamma, boosted latents ~ IG(d0 + 1/2 + N/2, D0 + gamma^2/(2 G0) + ssr/2)
inline IgParams binary_delta_params(double gamma, double n_obs, double ssr, const PriorConfig& prior) {
  return {prior.d0 + 0.5 + 0.5 * n_obs, prior.D0 + gamma * gamma / (2.0 * prior.G0) + 0.5 * ssr};
}

inline double sample_delta_new(double gamma, const Vector& zt, const Vector& w, const Matrix& X,
                               const PosteriorMoments& m, const Matrix& A0_inv, const PriorConfig& prior,
                               RngStream& rng) {
  const IgParams p = binary_delta_params(gamma, static_cast<double>(zt.size()), residual_form(X, zt, w, A0_inv, m), prior);
  return invgamma_sample(p.shape, p.scale, rng);
}

// ---------------------------------------------------------------------------

// Coefficient prior covariance used in the expanded model. Without the threshold the
// intercept takes the variance A0dd + G0 so every mode targets the same posterior.
inline Matrix expanded_prior_cov(const PriorConfig& prior, Boost boost) {
  return boost == Boost::Full ? prior.A0 : prior.marginal_cov();
}

inline BinaryState binary_init(const BinaryDataset& data, Link link, RngStream& rng) {
  BinaryState s;
  s.beta = Vector::Zero(data.d());
  s.omega = Vector::Ones(data.N());
  s.z.resize(data.N());
  for (Eigen::Index i = 0; i < data.N(); ++i) s.z[i] = sample_utility(0.0, data.y[i], link, rng);
  return s;
}

// One sweep: utilities, boost, threshold and scale, coefficients.
inline void upg_binary_sweep(BinaryState& s, const BinaryDataset& data, const PriorConfig& prior,
                             const McmcConfig& cfg, RngStream& rng) {
  const Eigen::Index N = data.N();
  const Eigen::Index d = data.d();
  const Matrix A_inv = spd_inverse(expanded_prior_cov(prior, cfg.boost));

  // (a-1) utilities and mixing weights
  const Vector eta = data.X * s.beta;
  s.z.resize(N);
  s.omega.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    s.z[i] = sample_utility(eta[i], data.y[i], cfg.link, rng);
    s.omega[i] = cfg.link == Link::Logit ? sample_omega(s.z[i], eta[i], rng) : 1.0;
  }

  // (a-2) move to a random expanded model
  const WorkingPair star = sample_working_star(s.beta, A_inv, prior, cfg.boost, rng);
  const Vector zt = (std::sqrt(star.delta) * s.z).array() + star.gamma;

  // (b-1) threshold and scale
  const PosteriorMoments mom = posterior_moments(data.X, zt, s.omega, A_inv, Vector::Zero(d));
  double gamma = 0.0, delta = 1.0;
  if (cfg.boost != Boost::None) {
    const double ssr = residual_form(data.X, zt, s.omega, A_inv, mom);
    double shape = prior.d0 + 0.5 * static_cast<double>(N) + cfg.delta_shape_shift;
    double scale = prior.D0 + 0.5 * ssr;
    if (cfg.boost == Boost::Full) {
      const auto [lo, hi] = gamma_bounds(zt, data.y);
      gamma = sample_threshold(lo, hi, prior, cfg.gamma_step, static_cast<double>(N), ssr, rng);
      shape += 0.5;
      scale += gamma * gamma / (2.0 * prior.G0);
    }
    delta = invgamma_sample(shape, scale, rng);
  }

  // (b-2) coefficients, then back to the identified model
  Vector bt = mvn_sample(mom.b, delta, mom.chol, rng);
  const double sd = std::sqrt(delta);
  bt[d - 1] -= gamma;
  s.beta = bt / sd;
  s.z = (zt.array() - gamma) / sd;
  s.gamma = gamma;
  s.delta = delta;
}

}  // namespace upg
