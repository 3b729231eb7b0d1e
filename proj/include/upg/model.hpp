#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "upg/dist.hpp"
#include "upg/linalg.hpp"

namespace upg {

using IVector = Eigen::VectorXi;

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Convention for every dataset: the last column of X is the intercept (all ones).

namespace detail {
inline void check_design(const Matrix& X, const char* who) {
  if (X.cols() < 1) throw InputError(std::string(who) + ": design has no columns");
  if (!X.allFinite()) throw InputError(std::string(who) + ": design has non-finite entries");
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    if (X(i, X.cols() - 1) != 1.0) {
      throw InputError(std::string(who) + ": row " + std::to_string(i) + " lacks the intercept 1 in the last column");
    }
  }
}
}  // namespace detail

struct BinaryDataset {
  Matrix X;
  IVector y;

  Eigen::Index N() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  void validate() const {
    if (X.rows() < 1) throw InputError("binary dataset: no observations");
    if (y.size() != X.rows()) throw InputError("binary dataset: y and X row counts differ");
    detail::check_design(X, "binary dataset");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0 && y[i] != 1) throw InputError("binary dataset: row " + std::to_string(i) + " has y not in {0,1}");
    }
  }
};

// Time series with a binary outcome; rows are time points 1..T.
using TsDataset = BinaryDataset;

struct MultinomialDataset {
  Matrix X;
  IVector y;  // labels 0..m, 0 is the baseline
  int m = 1;

  Eigen::Index N() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  void validate() const {
    if (X.rows() < 1) throw InputError("multinomial dataset: no observations");
    if (m < 1) throw InputError("multinomial dataset: need m >= 1 non-baseline categories");
    if (y.size() != X.rows()) throw InputError("multinomial dataset: y and X row counts differ");
    detail::check_design(X, "multinomial dataset");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] < 0 || y[i] > m) throw InputError("multinomial dataset: row " + std::to_string(i) + " has label out of range");
    }
  }
};

struct BinomialDataset {
  Matrix X;
  IVector y;
  IVector n;  // trials

  Eigen::Index N() const { return X.rows(); }
  Eigen::Index d() const { return X.cols(); }

  void validate() const {
    if (X.rows() < 1) throw InputError("binomial dataset: no observations");
    if (y.size() != X.rows() || n.size() != X.rows()) throw InputError("binomial dataset: y, n and X row counts differ");
    detail::check_design(X, "binomial dataset");
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (n[i] < 1) throw InputError("binomial dataset: row " + std::to_string(i) + " has n < 1");
      if (y[i] < 0 || y[i] > n[i]) throw InputError("binomial dataset: row " + std::to_string(i) + " has y outside [0, n]");
    }
  }
};

// ---------------------------------------------------------------------------

struct PriorConfig {
  Matrix A0;          // coefficient prior in the expanded model
  double G0 = 100.0;  // threshold prior scale
  double d0 = 2.5;
  double D0 = 2.5;
  double c0 = 2.5;  // state-space process variance prior
  double C0 = 1.5;
  Vector Pjj;  // state-space initial-state scale

  static PriorConfig defaults(Eigen::Index d) {
    PriorConfig p;
    p.A0 = 100.0 * Matrix::Identity(d, d);
    p.Pjj = Vector::Ones(d);
    return p;
  }

  double G0_star() const { return G0 * D0 / d0; }

  // Prior of the identified coefficients: A0 + G0 e_d e_d'.
  Matrix marginal_cov() const {
    Matrix a = A0;
    a(a.rows() - 1, a.cols() - 1) += G0;
    return a;
  }

  void validate(Eigen::Index d) const {
    if (A0.rows() != d || A0.cols() != d) throw ParameterError("prior: A0 has wrong dimension");
    cholesky(A0);
    if (!(G0 > 0 && d0 > 0 && D0 > 0 && c0 > 0 && C0 > 0)) throw ParameterError("prior: hyperparameters must be positive");
    if (Pjj.size() != d || (Pjj.array() <= 0.0).any()) throw ParameterError("prior: Pjj must be positive with length d");
  }
};

enum class Boost { Full, ScaleOnly, None };
enum class Link { Logit, Probit };

// How the threshold gamma is drawn in step (b):
//  Exact  - truncated t with delta and coefficients integrated out when the delta
//           conditional is inverse gamma (binary, SSM); otherwise truncated normal
//           given the current working delta (binomial, offset MNL)
//  PriorT - truncated prior Student-t, ignoring the likelihood's dependence on gamma through delta
enum class GammaStep { Exact, PriorT };

// Latent representation of the multinomial sampler for category k:
//  Offset     - binary logit for 1{y = k} with offset log(1 + sum_{l != k} lambda_l)
//  Aggregated - utilities (u_k, u_0, u_A); u_k - u_0 regressed as if logistic given u_A.
//               Not invariant for m > 1, kept for comparison.
enum class MnlScheme { Offset, Aggregated };

// Auxiliary prior of the binomial delta resampler.
enum class DeltaAux { InvGamma, SqrtInvGamma };

struct McmcConfig {
  int draws = 10000;
  int burnin = 2000;
  std::uint64_t seed = 1;
  Boost boost = Boost::Full;
  Link link = Link::Logit;
  GammaStep gamma_step = GammaStep::Exact;
  MnlScheme mnl_scheme = MnlScheme::Offset;
  int resample_draws = 10;  // binomial delta resampler L
  DeltaAux delta_aux = DeltaAux::InvGamma;
  double amh_scale = 5.66;
  // Added to the posterior shape of delta. Nonzero values break the sampler on
  // purpose; used only to check that validation tests have power.
  double delta_shape_shift = 0.0;

  void validate() const {
    if (draws < 1) throw ParameterError("config: draws must be >= 1");
    if (burnin < 0) throw ParameterError("config: burnin must be >= 0");
    if (resample_draws < 1) throw ParameterError("config: resample_draws must be >= 1");
    if (!(amh_scale > 0)) throw ParameterError("config: amh_scale must be > 0");
  }
};

struct DrawsStore {
  Matrix beta;   // draws x p; for state-space fits the path, then theta and initial means
  Matrix gamma;  // draws x blocks (one block per mnl category, else one)
  Matrix delta;
  std::vector<std::string> names;
  double seconds = 0.0;
  double acceptance = -1.0;  // AMH only

  void resize(int draws, Eigen::Index p, Eigen::Index blocks = 1) {
    beta.resize(draws, p);
    gamma.setZero(draws, blocks);
    delta.setOnes(draws, blocks);
  }
};

// ---------------------------------------------------------------------------
// log-likelihoods

inline double log_inv_logit(double eta) { return -softplus(-eta); }

inline double loglik_binary(const Vector& beta, const BinaryDataset& data, Link link) {
  const Vector eta = data.X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double s = data.y[i] == 1 ? eta[i] : -eta[i];
    ll += link == Link::Logit ? log_inv_logit(s) : log_norm_cdf(s);
  }
  return ll;
}

// B holds one row per non-baseline category.
inline double loglik_mnl(const Matrix& B, const MultinomialDataset& data) {
  const Matrix eta = data.X * B.transpose();  // N x m
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    double mx = 0.0;
    for (Eigen::Index k = 0; k < eta.cols(); ++k) mx = std::max(mx, eta(i, k));
    double s = std::exp(-mx);
    for (Eigen::Index k = 0; k < eta.cols(); ++k) s += std::exp(eta(i, k) - mx);
    const double num = data.y[i] == 0 ? 0.0 : eta(i, data.y[i] - 1);
    ll += num - mx - std::log(s);
  }
  return ll;
}

inline double log_choose(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

inline double loglik_binomial(const Vector& beta, const BinomialDataset& data) {
  const Vector eta = data.X * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    ll += log_choose(data.n[i], data.y[i]) + data.y[i] * log_inv_logit(eta[i]) +
          (data.n[i] - data.y[i]) * log_inv_logit(-eta[i]);
  }
  return ll;
}

// ---------------------------------------------------------------------------
// simulation

enum class Model { Logit, Probit, Mnl, Binomial, SsmLogit, SsmProbit };

inline const char* model_name(Model m) {
  switch (m) {
    case Model::Logit: return "logit";
    case Model::Probit: return "probit";
    case Model::Mnl: return "mnl";
    case Model::Binomial: return "binomial";
    case Model::SsmLogit: return "ssm-logit";
    case Model::SsmProbit: return "ssm-probit";
  }
  return "?";
}

inline Model parse_model(const std::string& s) {
  if (s == "logit") return Model::Logit;
  if (s == "probit") return Model::Probit;
  if (s == "mnl") return Model::Mnl;
  if (s == "binomial") return Model::Binomial;
  if (s == "ssm-logit") return Model::SsmLogit;
  if (s == "ssm-probit") return Model::SsmProbit;
  throw ParameterError("unknown model '" + s + "'");
}

struct Scenario {
  Model model = Model::Logit;
  int N = 100;  // observations, or T for state-space models
  int d = 1;    // columns including the intercept
  // Slopes for the d-1 covariates; empty means all zero.
  Vector slopes;
  double intercept = 0.0;
  int m = 1;       // non-baseline categories (mnl)
  int trials = 1;  // binomial trials per observation
  double theta = 0.01;  // state-space process variance
  // Plant exactly one success (one observation per non-baseline category for mnl).
  bool one_success = false;
};

struct SimulatedData {
  Matrix X;
  IVector y;
  IVector n;       // binomial only
  int m = 1;       // mnl only
  Matrix truth;    // true coefficients (rows: categories or time points)

  BinaryDataset binary() const { return {X, y}; }
  MultinomialDataset multinomial() const { return {X, y, m}; }
  BinomialDataset binomial() const { return {X, y, n}; }
};

inline SimulatedData simulate_dataset(const Scenario& sc, RngStream& rng) {
  if (sc.N < 1) throw ParameterError("simulate: N must be >= 1");
  if (sc.d < 1) throw ParameterError("simulate: d must be >= 1");
  if (sc.slopes.size() != 0 && sc.slopes.size() != sc.d - 1) throw ParameterError("simulate: slopes must have length d-1");
  if (sc.model == Model::Mnl && sc.one_success && sc.N < sc.m + 1) throw ParameterError("simulate: too few observations for one success per category");

  SimulatedData out;
  out.X.resize(sc.N, sc.d);
  for (int i = 0; i < sc.N; ++i) {
    for (int j = 0; j + 1 < sc.d; ++j) out.X(i, j) = rng.normal();
    out.X(i, sc.d - 1) = 1.0;
  }
  Vector beta = Vector::Zero(sc.d);
  if (sc.slopes.size() != 0) beta.head(sc.d - 1) = sc.slopes;
  beta[sc.d - 1] = sc.intercept;
  out.y.setZero(sc.N);

  auto plant_one = [&](int label) {
    int i;
    do { i = static_cast<int>(rng.uniform() * sc.N); } while (out.y[i] != 0);
    out.y[i] = label;
  };

  switch (sc.model) {
    case Model::Logit:
    case Model::Probit: {
      out.truth = beta.transpose();
      if (sc.one_success) {
        plant_one(1);
        break;
      }
      const Vector eta = out.X * beta;
      for (int i = 0; i < sc.N; ++i) {
        const double p = sc.model == Model::Logit ? 1.0 / (1.0 + std::exp(-eta[i])) : norm_cdf(eta[i]);
        out.y[i] = rng.uniform() < p ? 1 : 0;
      }
      break;
    }
    case Model::Mnl: {
      out.m = sc.m;
      out.truth = beta.transpose().replicate(sc.m, 1);
      if (sc.one_success) {
        for (int k = 1; k <= sc.m; ++k) plant_one(k);
        break;
      }
      const Matrix eta = out.X * out.truth.transpose();
      for (int i = 0; i < sc.N; ++i) {
        double total = 1.0;
        for (int k = 0; k < sc.m; ++k) total += std::exp(eta(i, k));
        double u = rng.uniform() * total - 1.0;
        int label = 0;
        for (int k = 0; k < sc.m && u > 0.0; ++k) {
          label = k + 1;
          u -= std::exp(eta(i, k));
        }
        out.y[i] = label;
      }
      break;
    }
    case Model::Binomial: {
      if (sc.trials < 1) throw ParameterError("simulate: trials must be >= 1");
      out.truth = beta.transpose();
      out.n.setConstant(sc.N, sc.trials);
      const Vector eta = out.X * beta;
      for (int i = 0; i < sc.N; ++i) {
        const double p = 1.0 / (1.0 + std::exp(-eta[i]));
        int s = 0;
        for (int r = 0; r < sc.trials; ++r) s += rng.uniform() < p ? 1 : 0;
        out.y[i] = s;
      }
      break;
    }
    case Model::SsmLogit:
    case Model::SsmProbit: {
      out.truth.resize(sc.N + 1, sc.d);
      out.truth.row(0) = beta.transpose();
      for (int t = 1; t <= sc.N; ++t) {
        for (int j = 0; j < sc.d; ++j) out.truth(t, j) = out.truth(t - 1, j) + std::sqrt(sc.theta) * rng.normal();
      }
      for (int t = 0; t < sc.N; ++t) {
        const double eta = out.X.row(t).dot(out.truth.row(t + 1));
        const double p = sc.model == Model::SsmLogit ? 1.0 / (1.0 + std::exp(-eta)) : norm_cdf(eta);
        out.y[t] = rng.uniform() < p ? 1 : 0;
      }
      break;
    }
  }
  return out;
}

}  // namespace upg
