#pragma once

#include <cmath>
#include <functional>

#include "upg/binary.hpp"
#include "upg/dist.hpp"
#include "upg/linalg.hpp"
#include "upg/mnl.hpp"
#include "upg/model.hpp"

namespace upg {

// All baselines use the identified prior beta ~ N(0, A0 + G0 e_d e_d').

// Probit data augmentation without boosting.
inline void albert_chib_sweep(BinaryState& s, const BinaryDataset& data, const PriorConfig& prior, RngStream& rng) {
  McmcConfig cfg;
  cfg.boost = Boost::None;
  cfg.link = Link::Probit;
  upg_binary_sweep(s, data, prior, cfg, rng);
}

// omega_i ~ PG(1, x_i beta); beta | omega ~ N(B X'kappa, B), kappa = y - 1/2.
inline void ps_logit_sweep(Vector& beta, const BinaryDataset& data, const PriorConfig& prior, RngStream& rng) {
  const Eigen::Index N = data.N();
  const Vector eta = data.X * beta;
  Vector w(N), pseudo(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    w[i] = pg_sample({1, eta[i]}, rng);
    pseudo[i] = (data.y[i] - 0.5) / w[i];
  }
  const PosteriorMoments m = posterior_moments(data.X, pseudo, w, spd_inverse(prior.marginal_cov()), Vector::Zero(data.d()));
  beta = mvn_sample(m.b, 1.0, m.chol, rng);
}

// Per category: binary PG step for 1{y = k} with offset log(1 + sum_{l != k} lambda_l).
inline void ps_mnl_sweep(Matrix& B, const MultinomialDataset& data, const PriorConfig& prior, RngStream& rng) {
  const Eigen::Index N = data.N();
  const Matrix A_inv = spd_inverse(prior.marginal_cov());
  for (int k = 1; k <= data.m; ++k) {
    const Matrix eta = data.X * B.transpose();
    const Vector c = mnl_offset(eta, k);
    Vector w(N), pseudo(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      w[i] = pg_sample({1, eta(i, k - 1) - c[i]}, rng);
      pseudo[i] = ((data.y[i] == k ? 1.0 : 0.0) - 0.5) / w[i] + c[i];
    }
    const PosteriorMoments m = posterior_moments(data.X, pseudo, w, A_inv, Vector::Zero(data.d()));
    B.row(k - 1) = mvn_sample(m.b, 1.0, m.chol, rng).transpose();
  }
}

// ---------------------------------------------------------------------------
// Componentwise adaptive random-walk Metropolis. Proposal variance for component i
// at iteration k is (s/k) sum_{j<k} (theta_ij - mean_i)^2 once k > 100, else 1.

struct AmhState {
  Vector theta;
  Vector mean;  // running mean of the history
  Vector m2;    // running sum of squared deviations
  long k = 0;   // completed iterations
  double s = 5.66;
  long proposed = 0;
  long accepted = 0;

  explicit AmhState(Vector start = Vector(), double scale = 5.66)
      : theta(std::move(start)), mean(Vector::Zero(theta.size())), m2(Vector::Zero(theta.size())), s(scale) {}

  double proposal_var(Eigen::Index i) const { return k > 100 ? s * m2[i] / static_cast<double>(k) : 1.0; }
  double acceptance_rate() const { return proposed ? static_cast<double>(accepted) / proposed : 0.0; }
};

using LogPosterior = std::function<double(const Vector&)>;

inline void amh_sweep(AmhState& st, const LogPosterior& log_post, RngStream& rng) {
  double lp = log_post(st.theta);
  for (Eigen::Index i = 0; i < st.theta.size(); ++i) {
    const double old = st.theta[i];
    st.theta[i] = old + std::sqrt(st.proposal_var(i)) * rng.normal();
    const double lp_new = log_post(st.theta);
    ++st.proposed;
    if (std::log(rng.uniform()) < lp_new - lp) {
      lp = lp_new;
      ++st.accepted;
    } else {
      st.theta[i] = old;
    }
  }
  // Welford update of the history statistics
  ++st.k;
  const Vector delta = st.theta - st.mean;
  st.mean += delta / static_cast<double>(st.k);
  st.m2 += delta.cwiseProduct(st.theta - st.mean);
}

// log N(beta; 0, S) up to a constant, with S given by its Cholesky factor
inline double log_gaussian_prior(const Vector& beta, const Matrix& chol) {
  const Vector a = chol.triangularView<Eigen::Lower>().solve(beta);
  return -0.5 * a.squaredNorm();
}

inline LogPosterior binary_log_posterior(const BinaryDataset& data, const PriorConfig& prior, Link link) {
  const Matrix L = cholesky(prior.marginal_cov());
  return [&data, L, link](const Vector& b) { return loglik_binary(b, data, link) + log_gaussian_prior(b, L); };
}

// theta = vec of the m x d coefficient matrix, row-major by category
inline LogPosterior mnl_log_posterior(const MultinomialDataset& data, const PriorConfig& prior) {
  const Matrix L = cholesky(prior.marginal_cov());
  return [&data, L](const Vector& th) {
    const Eigen::Index d = data.d();
    Matrix B(data.m, d);
    double lp = 0.0;
    for (int k = 0; k < data.m; ++k) {
      B.row(k) = th.segment(k * d, d).transpose();
      lp += log_gaussian_prior(th.segment(k * d, d), L);
    }
    return lp + loglik_mnl(B, data);
  };
}

inline LogPosterior binomial_log_posterior(const BinomialDataset& data, const PriorConfig& prior) {
  const Matrix L = cholesky(prior.marginal_cov());
  return [&data, L](const Vector& b) { return loglik_binomial(b, data) + log_gaussian_prior(b, L); };
}

}  // namespace upg
