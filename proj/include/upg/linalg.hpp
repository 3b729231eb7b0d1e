#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "upg/rng.hpp"

namespace upg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct FactorizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline void check_symmetric(const Matrix& a, const char* who) {
  if (a.rows() != a.cols()) throw DimensionError(std::string(who) + ": matrix not square");
  const double tol = 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol) {
    throw FactorizationError(std::string(who) + ": matrix not symmetric");
  }
}

// Lower Cholesky factor; no pivoting, no regularization.
inline Matrix cholesky(const Matrix& a) {
  check_symmetric(a, "cholesky");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw FactorizationError("cholesky: matrix not positive definite");
  return llt.matrixL();
}

inline Matrix spd_inverse(const Matrix& a) {
  check_symmetric(a, "spd_inverse");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw FactorizationError("spd_inverse: matrix not positive definite");
  return llt.solve(Matrix::Identity(a.rows(), a.cols()));
}

// mean + sqrt(scale) * L * e, e ~ N(0, I)
inline Vector mvn_sample(const Vector& mean, double scale, const Matrix& chol, RngStream& rng) {
  if (chol.rows() != mean.size() || chol.cols() != mean.size()) {
    throw DimensionError("mvn_sample: factor and mean dimensions differ");
  }
  Vector e(mean.size());
  for (Eigen::Index j = 0; j < e.size(); ++j) e[j] = rng.normal();
  const Vector le = chol.triangularView<Eigen::Lower>() * e;
  return mean + std::sqrt(scale) * le;
}

struct PosteriorMoments {
  Vector b;     // b_N
  Matrix B;     // B_N
  Matrix chol;  // lower factor of B_N
};

// B = (A0_inv + X' W X)^-1, b = B (X' W z + prior_mean_term)
inline PosteriorMoments posterior_moments(const Matrix& X, const Vector& z, const Vector& w,
                                          const Matrix& A0_inv, const Vector& prior_mean_term) {
  const Eigen::Index d = A0_inv.rows();
  if (X.cols() != d || X.rows() != z.size() || X.rows() != w.size() || prior_mean_term.size() != d) {
    throw DimensionError("posterior_moments: dimension mismatch");
  }
  Matrix prec = A0_inv;
  prec.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose() * w.cwiseSqrt().asDiagonal());
  prec = prec.selfadjointView<Eigen::Lower>();
  Eigen::LLT<Matrix> llt(prec);
  if (llt.info() != Eigen::Success) throw FactorizationError("posterior_moments: precision not positive definite");
  PosteriorMoments m;
  m.B = llt.solve(Matrix::Identity(d, d));
  m.B = 0.5 * (m.B + m.B.transpose());
  m.b = m.B * (X.transpose() * w.cwiseProduct(z) + prior_mean_term);
  m.chol = cholesky(m.B);
  return m;
}

}  // namespace upg
