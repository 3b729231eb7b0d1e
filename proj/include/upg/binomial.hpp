#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "upg/binary.hpp"
#include "upg/dist.hpp"
#include "upg/linalg.hpp"
#include "upg/model.hpp"

namespace upg {

// ---------------------------------------------------------------------------
// utilities of the binomial RUM

// w = log((1 + lambda) W^{-1/y} - lambda) > 0
inline double sample_w(double eta, int y, RngStream& rng) {
  if (y < 1) throw ParameterError("sample_w: y must be >= 1");
  const double a = -std::log(rng.uniform()) / y;
  const double w = softplus(softplus(eta) + std::log(std::expm1(a)));
  return w > 0.0 ? w : std::numeric_limits<double>::min();
}

// v = -log(((1 + lambda)/lambda) V^{-1/(n-y)} - 1/lambda) < 0
inline double sample_v(double eta, int y, int n, RngStream& rng) {
  if (y >= n) throw ParameterError("sample_v: y must be < n");
  const double b = -std::log(rng.uniform()) / (n - y);
  const double v = -softplus(std::log(std::expm1(b)) + softplus(-eta));
  return v < 0.0 ? v : -std::numeric_limits<double>::min();
}

inline double kappa_w(int y) { return 0.5 * (1.0 - y); }
inline double kappa_v(int y, int n) { return 0.5 * (n - y - 1.0); }

struct BinomialOmegas {
  double w = kInf;  // +inf marks an absent latent
  double v = kInf;
};

inline BinomialOmegas sample_omegas_binomial(double w, double v, double eta, int y, int n, RngStream& rng) {
  BinomialOmegas o;
  if (y > 0) o.w = pg_sample({y + 1, w - eta}, rng);
  if (y < n) o.v = pg_sample({n - y + 1, v - eta}, rng);
  return o;
}

// ---------------------------------------------------------------------------
// Boosted Gaussian regression with an offset scaled by sqrt(delta):
//   zt + sqrt(delta) c = X bt + e,  e ~ N(0, delta / omega),  bt ~ N(0, delta A0).
// Integrating bt out leaves delta^{-n/2} exp(-Qaa/(2 delta) - Qac/sqrt(delta)).

struct OffsetRegression {
  Matrix B;
  Matrix chol;
  Vector pa;  // X' W zt
  Vector pc;  // X' W c
  double Qaa = 0.0;
  double Qac = 0.0;
  double n_obs = 0.0;
};

inline OffsetRegression offset_regression(const Matrix& X, const Vector& zt, const Vector& w, const Vector& c,
                                          const Matrix& A_inv) {
  const PosteriorMoments m = posterior_moments(X, zt, w, A_inv, Vector::Zero(A_inv.rows()));
  OffsetRegression r;
  r.B = m.B;
  r.chol = m.chol;
  r.pa = X.transpose() * w.cwiseProduct(zt);
  r.pc = X.transpose() * w.cwiseProduct(c);
  r.Qaa = zt.dot(w.cwiseProduct(zt)) - r.pa.dot(r.B * r.pa);
  r.Qac = zt.dot(w.cwiseProduct(c)) - r.pa.dot(r.B * r.pc);
  r.n_obs = static_cast<double>(zt.size());
  return r;
}

// bt ~ N(B (pa + sqrt(delta) pc), delta B)
inline Vector offset_coef_sample(const OffsetRegression& r, double delta, RngStream& rng) {
  const Vector mean = r.B * (r.pa + std::sqrt(delta) * r.pc);
  return mvn_sample(mean, delta, r.chol, rng);
}

// p(delta | .) ∝ delta^{-(dI+1)} exp(-DI/delta + BI/sqrt(delta))
struct DeltaConditional {
  double dI = 1.0;
  double DI = 1.0;
  double BI = 0.0;
};

inline DeltaConditional delta_conditional_params(double gamma, const OffsetRegression& r, const PriorConfig& prior,
                                                 Boost boost, double shape_shift = 0.0) {
  DeltaConditional p;
  p.dI = prior.d0 + 0.5 * r.n_obs + shape_shift;
  p.DI = prior.D0 + 0.5 * r.Qaa;
  p.BI = -r.Qac;
  if (boost == Boost::Full) {
    p.dI += 0.5;
    p.DI += gamma * gamma / (2.0 * prior.G0);
  }
  if (!(p.DI > 0.0)) throw ConstraintError("delta_conditional_params: D_I <= 0");
  return p;
}

inline double delta_log_target(double delta, const DeltaConditional& p) {
  return -(p.dI + 1.0) * std::log(delta) - p.DI / delta + p.BI / std::sqrt(delta);
}

struct ModeCurvature {
  double mode = 1.0;
  double curvature = -1.0;
};

inline ModeCurvature delta_mode_curvature(double dI, double DI, double BI) {
  if (!(DI > 0.0)) throw ParameterError("delta_mode_curvature: D_I must be > 0");
  const double root = std::sqrt(BI * BI + 16.0 * DI * (dI + 1.0));
  const double den = BI + root;
  ModeCurvature mc;
  mc.mode = 16.0 * DI * DI / (den * den);
  mc.curvature = -root / (4.0 * std::pow(mc.mode, 2.5));
  return mc;
}

// Importance resampling from an auxiliary prior matched to the mode and curvature
// of the target. With BI = 0 and the inverse-gamma auxiliary the weights are flat.
inline double delta_resample(const DeltaConditional& p, int L, DeltaAux aux, RngStream& rng) {
  if (L < 1) throw ParameterError("delta_resample: L must be >= 1");
  const ModeCurvature mc = delta_mode_curvature(p.dI, p.DI, p.BI);
  const double q = -mc.curvature * mc.mode * mc.mode;
  std::vector<double> draws(L), logw(L);
  for (int l = 0; l < L; ++l) {
    if (aux == DeltaAux::InvGamma) {
      const double ds = q - 1.0;
      const double Ds = mc.mode * q;
      draws[l] = invgamma_sample(ds, Ds, rng);
      logw[l] = -(p.dI - ds) * std::log(draws[l]) - (p.DI - Ds) / draws[l] + p.BI / std::sqrt(draws[l]);
    } else {
      const double bs = 2.0 * q - 1.0;
      const double Bs = 2.0 * (bs + 1.0) * std::sqrt(mc.mode);
      draws[l] = sqrt_invgamma_sample(2.0 * bs, Bs, rng);
      logw[l] = -(p.dI - bs) * std::log(draws[l]) - p.DI / draws[l] + (p.BI + Bs) / std::sqrt(draws[l]);
    }
  }
  if (L == 1) return draws[0];
  double mx = -kInf;
  for (double lw : logw) mx = std::max(mx, lw);
  if (!std::isfinite(mx)) throw ConstraintError("delta_resample: all weights underflow");
  double total = 0.0;
  for (double& lw : logw) total += (lw = std::exp(lw - mx));
  double u = rng.uniform() * total;
  for (int l = 0; l < L; ++l) {
    u -= logw[l];
    if (u <= 0.0) return draws[l];
  }
  return draws[L - 1];
}

// ---------------------------------------------------------------------------

struct BinomialState {
  Vector beta;
  Vector w, v;              // NaN where absent
  Vector omega_w, omega_v;  // NaN where absent
  double gamma = 0.0;
  double delta = 1.0;
};

inline BinomialState binomial_init(const BinomialDataset& data) {
  BinomialState s;
  s.beta = Vector::Zero(data.d());
  return s;
}

// Threshold draw when the delta conditional is not inverse gamma: gamma given the
// current working delta is its prior N(0, delta G0) cut to (lo, hi).
inline double sample_threshold_given_delta(double lo, double hi, double delta, const PriorConfig& prior,
                                           GammaStep step, RngStream& rng) {
  if (step == GammaStep::PriorT) return trunc_student_sample(2.0 * prior.d0, std::sqrt(prior.G0_star()), lo, hi, rng);
  return trunc_normal_sample(std::sqrt(delta * prior.G0), lo, hi, rng);
}

inline void upg_binomial_sweep(BinomialState& s, const BinomialDataset& data, const PriorConfig& prior,
                               const McmcConfig& cfg, RngStream& rng) {
  const Eigen::Index N = data.N();
  const Eigen::Index d = data.d();
  const Matrix A_inv = spd_inverse(expanded_prior_cov(prior, cfg.boost));
  const Vector eta = data.X * s.beta;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // (a-1) order-statistic utilities and PG weights; stacked as one regression
  s.w.setConstant(N, nan);
  s.v.setConstant(N, nan);
  s.omega_w.setConstant(N, nan);
  s.omega_v.setConstant(N, nan);
  std::vector<Eigen::Index> rows;
  std::vector<double> z, om, off;
  std::vector<bool> is_w;
  for (Eigen::Index i = 0; i < N; ++i) {
    const int y = data.y[i], n = data.n[i];
    if (y > 0) s.w[i] = sample_w(eta[i], y, rng);
    if (y < n) s.v[i] = sample_v(eta[i], y, n, rng);
    const BinomialOmegas o = sample_omegas_binomial(s.w[i], s.v[i], eta[i], y, n, rng);
    if (y > 0) {
      s.omega_w[i] = o.w;
      rows.push_back(i), z.push_back(s.w[i]), om.push_back(o.w), off.push_back(-kappa_w(y) / o.w), is_w.push_back(true);
    }
    if (y < n) {
      s.omega_v[i] = o.v;
      rows.push_back(i), z.push_back(s.v[i]), om.push_back(o.v), off.push_back(-kappa_v(y, n) / o.v), is_w.push_back(false);
    }
  }
  const Eigen::Index M = static_cast<Eigen::Index>(rows.size());
  Matrix Xs(M, d);
  Vector zs(M), ws(M), cs(M);
  for (Eigen::Index r = 0; r < M; ++r) {
    Xs.row(r) = data.X.row(rows[r]);
    zs[r] = z[r];
    ws[r] = om[r];
    cs[r] = off[r];
  }

  // (a-2)
  const WorkingPair star = sample_working_star(s.beta, A_inv, prior, cfg.boost, rng);
  const Vector zt = (std::sqrt(star.delta) * zs).array() + star.gamma;

  // (b-1)
  const OffsetRegression reg = offset_regression(Xs, zt, ws, cs, A_inv);
  double gamma = 0.0, delta = 1.0;
  if (cfg.boost != Boost::None) {
    if (cfg.boost == Boost::Full) {
      double lo = -kInf, hi = kInf;
      for (Eigen::Index r = 0; r < M; ++r) {
        if (is_w[r]) hi = std::min(hi, zt[r]);
        else lo = std::max(lo, zt[r]);
      }
      if (!(lo < hi)) throw ConstraintError("upg_binomial_sweep: L >= O");
      gamma = sample_threshold_given_delta(lo, hi, star.delta, prior, cfg.gamma_step, rng);
    }
    const DeltaConditional p = delta_conditional_params(gamma, reg, prior, cfg.boost, cfg.delta_shape_shift);
    delta = delta_resample(p, cfg.resample_draws, cfg.delta_aux, rng);
  }

  // (b-2)
  Vector bt = offset_coef_sample(reg, delta, rng);
  bt[d - 1] -= gamma;
  s.beta = bt / std::sqrt(delta);
  s.gamma = gamma;
  s.delta = delta;
}

}  // namespace upg
