#pragma once

#include <cmath>
#include <string>

#include "upg/binary.hpp"
#include "upg/binomial.hpp"
#include "upg/diagnostics.hpp"
#include "upg/mnl.hpp"
#include "upg/model.hpp"
#include "upg/ssm.hpp"

namespace upg {

// Joint-distribution tests of the UPG samplers on small fixed designs. The
// identified prior is N(0, A0 + G0 e_d e_d') for every coefficient block.

namespace detail {

inline Matrix geweke_design(Eigen::Index N, Eigen::Index d, RngStream& rng) {
  Matrix X(N, d);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j + 1 < d; ++j) X(i, j) = rng.normal();
    X(i, d - 1) = 1.0;
  }
  return X;
}

inline std::function<double(double)> normal_cdf_sd(double sd) {
  return [sd](double x) { return norm_cdf(x / sd); };
}

inline double inv_logit(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace detail

inline GewekeReport geweke_binary(int N, int sweeps, const PriorConfig& prior, const McmcConfig& cfg, RngStream& rng) {
  const Eigen::Index d = prior.A0.rows();
  BinaryDataset data{detail::geweke_design(N, d, rng), IVector::Zero(N)};
  const Matrix S = prior.marginal_cov();
  const Matrix L = cholesky(S);
  GewekeModel<Vector> gm;
  gm.draw_prior = [L, d](RngStream& r) { return mvn_sample(Vector::Zero(d), 1.0, L, r); };
  gm.step = [&data, &prior, &cfg, N](const Vector& b, RngStream& r) {
    const Vector eta = data.X * b;
    for (int i = 0; i < N; ++i) {
      const double p = cfg.link == Link::Logit ? detail::inv_logit(eta[i]) : norm_cdf(eta[i]);
      data.y[i] = r.uniform() < p ? 1 : 0;
    }
    BinaryState s;
    s.beta = b;
    upg_binary_sweep(s, data, prior, cfg, r);
    return s.beta;
  };
  gm.monitor = [](const Vector& b) { return b; };
  for (Eigen::Index j = 0; j < d; ++j) {
    gm.prior_cdf.push_back(detail::normal_cdf_sd(std::sqrt(S(j, j))));
    gm.names.push_back("beta" + std::to_string(j + 1));
  }
  return geweke_joint_test(gm, sweeps, rng);
}

inline GewekeReport geweke_mnl(int N, int m, int sweeps, const PriorConfig& prior, const McmcConfig& cfg,
                               RngStream& rng) {
  const Eigen::Index d = prior.A0.rows();
  MultinomialDataset data{detail::geweke_design(N, d, rng), IVector::Zero(N), m};
  const Matrix S = prior.marginal_cov();
  const Matrix L = cholesky(S);
  GewekeModel<Matrix> gm;
  gm.draw_prior = [L, d, m](RngStream& r) {
    Matrix B(m, d);
    for (int k = 0; k < m; ++k) B.row(k) = mvn_sample(Vector::Zero(d), 1.0, L, r).transpose();
    return B;
  };
  gm.step = [&data, &prior, &cfg, N, m](const Matrix& B, RngStream& r) {
    const Matrix eta = data.X * B.transpose();
    for (int i = 0; i < N; ++i) {
      double total = 1.0;
      for (int k = 0; k < m; ++k) total += std::exp(eta(i, k));
      double u = r.uniform() * total - 1.0;
      int label = 0;
      for (int k = 0; k < m && u > 0.0; ++k) {
        label = k + 1;
        u -= std::exp(eta(i, k));
      }
      data.y[i] = label;
    }
    MnlState s = mnl_init(data);
    s.B = B;
    upg_mnl_sweep(s, data, prior, cfg, r);
    return s.B;
  };
  gm.monitor = [](const Matrix& B) { return Vector(Eigen::Map<const Vector>(B.data(), B.size())); };
  // column-major flattening: index j * m + k
  for (Eigen::Index j = 0; j < d; ++j) {
    for (int k = 0; k < m; ++k) {
      gm.prior_cdf.push_back(detail::normal_cdf_sd(std::sqrt(S(j, j))));
      gm.names.push_back("k" + std::to_string(k + 1) + ":beta" + std::to_string(j + 1));
    }
  }
  return geweke_joint_test(gm, sweeps, rng);
}

inline GewekeReport geweke_binomial(int N, int trials, int sweeps, const PriorConfig& prior, const McmcConfig& cfg,
                                    RngStream& rng) {
  const Eigen::Index d = prior.A0.rows();
  BinomialDataset data{detail::geweke_design(N, d, rng), IVector::Zero(N), IVector::Constant(N, trials)};
  const Matrix S = prior.marginal_cov();
  const Matrix L = cholesky(S);
  GewekeModel<Vector> gm;
  gm.draw_prior = [L, d](RngStream& r) { return mvn_sample(Vector::Zero(d), 1.0, L, r); };
  gm.step = [&data, &prior, &cfg, N, trials](const Vector& b, RngStream& r) {
    const Vector eta = data.X * b;
    for (int i = 0; i < N; ++i) {
      const double p = detail::inv_logit(eta[i]);
      int y = 0;
      for (int n = 0; n < trials; ++n) y += r.uniform() < p ? 1 : 0;
      data.y[i] = y;
    }
    BinomialState s = binomial_init(data);
    s.beta = b;
    upg_binomial_sweep(s, data, prior, cfg, r);
    return s.beta;
  };
  gm.monitor = [](const Vector& b) { return b; };
  for (Eigen::Index j = 0; j < d; ++j) {
    gm.prior_cdf.push_back(detail::normal_cdf_sd(std::sqrt(S(j, j))));
    gm.names.push_back("beta" + std::to_string(j + 1));
  }
  return geweke_joint_test(gm, sweeps, rng);
}

// Local-level model (d = 1). Monitors the initial mean, theta, and the two
// standardized increments (beta_0 - init)/sqrt(theta P) and (beta_T - beta_0)/sqrt(T theta),
// both N(0,1) under the prior.
inline GewekeReport geweke_ssm(int T, int sweeps, const PriorConfig& prior, const McmcConfig& cfg, RngStream& rng) {
  if (prior.A0.rows() != 1) throw ParameterError("geweke_ssm: local-level model only (d = 1)");
  TsDataset data{Matrix::Ones(T, 1), IVector::Zero(T)};
  const double init_sd = std::sqrt(prior.marginal_cov()(0, 0));
  const double P = prior.Pjj[0];
  GewekeModel<SsmState> gm;
  gm.draw_prior = [&prior, init_sd, P, T](RngStream& r) {
    SsmState s;
    s.theta = Vector::Constant(1, invgamma_sample(prior.c0, prior.C0, r));
    s.init = Vector::Constant(1, init_sd * r.normal());
    s.path.resize(T + 1, 1);
    s.path(0, 0) = s.init[0] + std::sqrt(s.theta[0] * P) * r.normal();
    for (int t = 1; t <= T; ++t) s.path(t, 0) = s.path(t - 1, 0) + std::sqrt(s.theta[0]) * r.normal();
    return s;
  };
  gm.step = [&data, &prior, &cfg, T](const SsmState& cur, RngStream& r) {
    for (int t = 0; t < T; ++t) {
      const double p = cfg.link == Link::Logit ? detail::inv_logit(cur.path(t + 1, 0)) : norm_cdf(cur.path(t + 1, 0));
      data.y[t] = r.uniform() < p ? 1 : 0;
    }
    SsmState s = cur;
    upg_ssm_sweep(s, data, prior, cfg, r);
    return s;
  };
  gm.monitor = [P, T](const SsmState& s) {
    Vector v(4);
    v << s.init[0], s.theta[0], (s.path(0, 0) - s.init[0]) / std::sqrt(s.theta[0] * P),
        (s.path(T, 0) - s.path(0, 0)) / std::sqrt(T * s.theta[0]);
    return v;
  };
  gm.prior_cdf = {detail::normal_cdf_sd(init_sd),
                  [&prior](double x) { return invgamma_cdf(x, prior.c0, prior.C0); },
                  detail::normal_cdf_sd(1.0), detail::normal_cdf_sd(1.0)};
  gm.names = {"init", "theta", "z_init", "z_path"};
  return geweke_joint_test(gm, sweeps, rng);
}

}  // namespace upg
