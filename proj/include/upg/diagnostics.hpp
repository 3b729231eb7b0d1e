#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "upg/linalg.hpp"
#include "upg/rng.hpp"

namespace upg {

struct DegenerateChainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double sample_mean(const Vector& x) { return x.mean(); }

inline double sample_var(const Vector& x) {
  if (x.size() < 2) return 0.0;
  const double m = x.mean();
  return (x.array() - m).square().sum() / static_cast<double>(x.size() - 1);
}

// Autocovariances r_0..r_maxlag with divisor M.
inline Vector autocovariance(const Vector& x, int maxlag) {
  const Eigen::Index M = x.size();
  const Vector c = x.array() - x.mean();
  Vector r(maxlag + 1);
  for (int k = 0; k <= maxlag; ++k) {
    r[k] = c.head(M - k).dot(c.tail(M - k)) / static_cast<double>(M);
  }
  return r;
}

inline Vector autocorrelation(const Vector& x, int maxlag) {
  const Vector r = autocovariance(x, maxlag);
  return r / r[0];
}

// Spectral density at frequency zero from a Yule-Walker AR fit; the order is
// chosen by AIC up to floor(10 log10 M).
inline double spectrum0_ar(const Vector& x) {
  const Eigen::Index M = x.size();
  if (M < 2) throw DegenerateChainError("spectrum0_ar: chain too short");
  const int order_max = static_cast<int>(std::min<double>(M - 1, std::floor(10.0 * std::log10(M))));
  const Vector r = autocovariance(x, order_max);
  if (!(r[0] > 0.0)) throw DegenerateChainError("spectrum0_ar: zero-variance chain");

  // Levinson-Durbin; keep the coefficient vector of every order
  std::vector<Vector> phi(order_max + 1);
  std::vector<double> v(order_max + 1);
  phi[0] = Vector();
  v[0] = r[0];
  int best = 0;
  double best_aic = M * std::log(v[0]);
  for (int k = 1; k <= order_max; ++k) {
    double acc = r[k];
    for (int j = 1; j < k; ++j) acc -= phi[k - 1][j - 1] * r[k - j];
    const double refl = acc / v[k - 1];
    phi[k].resize(k);
    for (int j = 1; j < k; ++j) phi[k][j - 1] = phi[k - 1][j - 1] - refl * phi[k - 1][k - j - 1];
    phi[k][k - 1] = refl;
    v[k] = v[k - 1] * (1.0 - refl * refl);
    if (!(v[k] > 0.0)) break;
    const double aic = M * std::log(v[k]) + 2.0 * k;
    if (aic < best_aic) {
      best_aic = aic;
      best = k;
    }
  }
  const double var_pred = v[best] * static_cast<double>(M) / static_cast<double>(M - (best + 1));
  const double denom = 1.0 - (best > 0 ? phi[best].sum() : 0.0);
  return var_pred / (denom * denom);
}

struct ChainStats {
  double IF = 1.0;
  double ESS = 0.0;
  Vector acf;
  double mean = 0.0;
  double sd = 0.0;
  double q05 = 0.0, q50 = 0.0, q95 = 0.0;
};

// Linear-interpolation quantile (type 7).
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline ChainStats inefficiency(const Vector& x, int acf_lags = 20) {
  ChainStats s;
  const double var = sample_var(x);
  s.IF = spectrum0_ar(x) / var;
  s.ESS = static_cast<double>(x.size()) / s.IF;
  s.acf = autocorrelation(x, std::min<int>(acf_lags, static_cast<int>(x.size()) - 1));
  s.mean = x.mean();
  s.sd = std::sqrt(var);
  const std::vector<double> v(x.data(), x.data() + x.size());
  s.q05 = quantile(v, 0.05);
  s.q50 = quantile(v, 0.50);
  s.q95 = quantile(v, 0.95);
  return s;
}

// IF by non-overlapping batch means with `batches` batches.
inline double batch_means_if(const Vector& x, int batches = 50) {
  const Eigen::Index len = x.size() / batches;
  Vector bm(batches);
  for (int b = 0; b < batches; ++b) bm[b] = x.segment(b * len, len).mean();
  return static_cast<double>(len) * sample_var(bm) / sample_var(x.head(len * batches));
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

// Asymptotic Kolmogorov tail probability with the Stephens small-sample correction.
inline double kolmogorov_pvalue(double D, double n) {
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * D;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double D = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double F = cdf(x[i]);
    D = std::max({D, (i + 1) / n - F, F - i / n});
  }
  return D;
}

inline double ks_test(const std::vector<double>& x, const std::function<double(double)>& cdf) {
  return kolmogorov_pvalue(ks_statistic(x, cdf), static_cast<double>(x.size()));
}

inline double ks_test2(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double D = 0.0;
  while (i < a.size() && j < b.size()) {
    const double t = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= t) ++i;
    while (j < b.size() && b[j] <= t) ++j;
    D = std::max(D, std::fabs(i / na - j / nb));
  }
  return kolmogorov_pvalue(D, na * nb / (na + nb));
}

// ---------------------------------------------------------------------------
// Geweke joint-distribution ("getting it right") test.
//
// Alternates data simulation given the parameters with one posterior sweep. If
// the sweep leaves the posterior invariant, the parameter chain is stationary
// at the prior. The chain is thinned by its largest inefficiency factor and each
// coordinate is compared with its prior cdf by KS; p-values are Bonferroni adjusted.

struct GewekeReport {
  std::vector<std::string> names;
  std::vector<double> p_values;  // adjusted
  std::vector<double> ifs;
  int thin = 1;
  int kept = 0;
  double alpha = 0.01;

  double min_p() const { return p_values.empty() ? 1.0 : *std::min_element(p_values.begin(), p_values.end()); }
  bool passed() const { return min_p() > alpha; }
};

template <class Params>
struct GewekeModel {
  std::function<Params(RngStream&)> draw_prior;
  // simulate data from Params, then run one posterior sweep; returns new Params
  std::function<Params(const Params&, RngStream&)> step;
  std::function<Vector(const Params&)> monitor;
  std::vector<std::function<double(double)>> prior_cdf;
  std::vector<std::string> names;
};

template <class Params>
GewekeReport geweke_joint_test(const GewekeModel<Params>& model, int sweeps, RngStream& rng,
                               double alpha = 0.01) {
  Params theta = model.draw_prior(rng);
  const Eigen::Index K = model.monitor(theta).size();
  Matrix trace(sweeps, K);
  for (int t = 0; t < sweeps; ++t) {
    theta = model.step(theta, rng);
    trace.row(t) = model.monitor(theta).transpose();
  }
  GewekeReport rep;
  rep.alpha = alpha;
  rep.names = model.names;
  double max_if = 1.0;
  for (Eigen::Index k = 0; k < K; ++k) {
    const Vector col = trace.col(k);
    double f = 1.0;
    if (sample_var(col) > 0.0) f = spectrum0_ar(col) / sample_var(col);
    rep.ifs.push_back(f);
    max_if = std::max(max_if, f);
  }
  rep.thin = static_cast<int>(std::ceil(max_if));
  for (Eigen::Index k = 0; k < K; ++k) {
    std::vector<double> kept;
    for (int t = 0; t < sweeps; t += rep.thin) kept.push_back(trace(t, k));
    rep.kept = static_cast<int>(kept.size());
    const double p = ks_test(kept, model.prior_cdf[k]);
    rep.p_values.push_back(std::min(1.0, p * static_cast<double>(K)));
  }
  return rep;
}

}  // namespace upg
