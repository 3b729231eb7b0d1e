#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "upg/rng.hpp"

namespace upg {

struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when truncation bounds are inconsistent (lower >= upper or an empty window).
struct ConstraintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// scalar helpers

// log(1 + e^x) without overflow
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double log_norm_cdf(double x) {
  if (x > -30.0) return std::log(norm_cdf(x));
  // asymptotic series for the far lower tail
  const double x2 = x * x;
  return -0.5 * x2 - std::log(-x) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log1p(-1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2));
}

inline double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("norm_quantile: p outside (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

// Standard normal restricted to (a, inf).
inline double normal_tail_sample(double a, RngStream& rng) {
  if (a < 30.0) {
    // survival-side inversion keeps precision in the upper tail
    const boost::math::normal_distribution<double> n01;
    const double s = rng.uniform() * boost::math::cdf(boost::math::complement(n01, a));
    if (s > 0.0) {
      const double x = boost::math::quantile(boost::math::complement(n01, s));
      return x > a ? x : std::nextafter(a, kInf);
    }
  }
  // Robert (1995) exponential proposal, used only far out in the tail
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double x = a + rng.exponential() / rate;
    if (std::log(rng.uniform()) <= -0.5 * (x - rate) * (x - rate)) return x;
  }
}

// ---------------------------------------------------------------------------
// Polya-Gamma

struct PolyaGammaParams {
  int b = 1;
  double c = 0.0;
};

namespace detail {

constexpr double kPgTrunc = 0.64;

// alternating-series coefficients a_n(x) of J*(1, z)
inline double pg_coef(int n, double x) {
  const double k = (n + 0.5) * std::numbers::pi;
  if (x > kPgTrunc) return k * std::exp(-0.5 * k * k * x);
  if (x > 0.0) {
    return std::exp(-1.5 * (std::log(0.5 * std::numbers::pi) + std::log(x)) + std::log(k) -
                    2.0 * (n + 0.5) * (n + 0.5) / x);
  }
  return 0.0;
}

// p / (p + q): probability of the exponential piece of the proposal
inline double pg_mass_texpon(double z) {
  const double t = kPgTrunc;
  const double fz = 0.125 * std::numbers::pi * std::numbers::pi + 0.5 * z * z;
  const double b = std::sqrt(1.0 / t) * (t * z - 1.0);
  const double a = -std::sqrt(1.0 / t) * (t * z + 1.0);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - z + log_norm_cdf(b);
  const double xa = x0 + z + log_norm_cdf(a);
  const double qdivp = 4.0 / std::numbers::pi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + qdivp);
}

// inverse Gaussian(1/z, 1) truncated to (0, t)
inline double pg_rtigauss(double z, RngStream& rng) {
  const double t = kPgTrunc;
  z = std::fabs(z);
  double x = t + 1.0;
  if (1.0 / t > z) {
    double alpha = 0.0;
    while (rng.uniform() > alpha) {
      double e1 = rng.exponential();
      double e2 = rng.exponential();
      while (e1 * e1 > 2.0 * e2 / t) {
        e1 = rng.exponential();
        e2 = rng.exponential();
      }
      x = 1.0 + e1 * t;
      x = t / (x * x);
      alpha = std::exp(-0.5 * z * z * x);
    }
  } else {
    const double mu = 1.0 / z;
    while (x > t) {
      double y = rng.normal();
      y *= y;
      const double half_mu = 0.5 * mu;
      const double mu_y = mu * y;
      x = mu + half_mu * mu_y - half_mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
      if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    }
  }
  return x;
}

}  // namespace detail

// PG(1, c) by Devroye-style alternating-series accept/reject.
inline double pg1_sample(double c, RngStream& rng) {
  const double z = 0.5 * std::fabs(c);
  const double fz = 0.125 * std::numbers::pi * std::numbers::pi + 0.5 * z * z;
  const double p_exp = detail::pg_mass_texpon(z);
  for (;;) {
    const double x = rng.uniform() < p_exp ? detail::kPgTrunc + rng.exponential() / fz
                                           : detail::pg_rtigauss(z, rng);
    double s = detail::pg_coef(0, x);
    const double y = rng.uniform() * s;
    for (int n = 1;; ++n) {
      if (n % 2 == 1) {
        s -= detail::pg_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += detail::pg_coef(n, x);
        if (y > s) break;
      }
    }
  }
}

// PG(b, c), integer b, as a sum of b PG(1, c) draws.
inline double pg_sample(const PolyaGammaParams& p, RngStream& rng) {
  if (p.b < 1) throw ParameterError("pg_sample: b < 1");
  if (!std::isfinite(p.c)) throw ParameterError("pg_sample: non-finite tilt");
  double sum = 0.0;
  for (int i = 0; i < p.b; ++i) sum += pg1_sample(p.c, rng);
  return sum;
}

inline double pg_mean(int b, double c) {
  c = std::fabs(c);
  if (c < 1e-6) return b * (0.25 - c * c / 48.0);
  return b / (2.0 * c) * std::tanh(0.5 * c);
}

// ---------------------------------------------------------------------------
// generalized logistic, types I and II

enum class GenLogFamily { TypeI, TypeII };

struct GenLogisticParams {
  GenLogFamily family = GenLogFamily::TypeI;
  double nu = 1.0;
};

// location shift of the PG mixture representation
inline double genlog_kappa(const GenLogisticParams& p) {
  return p.family == GenLogFamily::TypeI ? 0.5 * (p.nu - 1.0) : 0.5 * (1.0 - p.nu);
}

inline double genlog_log_density(double x, const GenLogisticParams& p) {
  const double a = p.family == GenLogFamily::TypeI ? p.nu : 1.0;
  return std::log(p.nu) + a * x - (p.nu + 1.0) * softplus(x);
}

inline double genlog_density(double x, const GenLogisticParams& p) {
  return std::exp(genlog_log_density(x, p));
}

inline double genlog_cdf(double x, const GenLogisticParams& p) {
  if (p.family == GenLogFamily::TypeI) return std::exp(-p.nu * softplus(-x));
  return -std::expm1(-p.nu * softplus(x));
}

inline double genlog_quantile(double prob, const GenLogisticParams& p) {
  if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("genlog_quantile: p outside (0,1)");
  if (p.family == GenLogFamily::TypeI) return -std::log(std::expm1(-std::log(prob) / p.nu));
  return std::log(std::expm1(-std::log1p(-prob) / p.nu));
}

inline double genlog_sample(const GenLogisticParams& p, RngStream& rng) {
  return genlog_quantile(rng.uniform(), p);
}

// ---------------------------------------------------------------------------
// truncated Student-t

// Inverse-cdf map of u in (0,1) to t(dof, 0, scale^2) restricted to (lower, upper).
inline double trunc_student_quantile(double dof, double scale, double lower, double upper,
                                     double u) {
  if (!(dof > 0.0) || !(scale > 0.0)) throw ParameterError("trunc_student: dof and scale must be > 0");
  if (!(lower < upper)) {
    throw ConstraintError("trunc_student: empty interval (" + std::to_string(lower) + ", " +
                          std::to_string(upper) + ")");
  }
  const boost::math::students_t_distribution<double> t(dof);
  const double a = lower / scale;
  const double b = upper / scale;
  double x;
  if (a >= 0.0) {
    // both bounds in the upper half: invert the survival function
    const double sa = std::isinf(a) ? 1.0 : boost::math::cdf(boost::math::complement(t, a));
    const double sb = std::isinf(b) ? 0.0 : boost::math::cdf(boost::math::complement(t, b));
    if (sa - sb < 1e-300) throw ConstraintError("trunc_student: probability window underflow");
    x = boost::math::quantile(boost::math::complement(t, u * sb + (1.0 - u) * sa));
  } else {
    const double fa = std::isinf(a) ? 0.0 : boost::math::cdf(t, a);
    const double fb = std::isinf(b) ? 1.0 : boost::math::cdf(t, b);
    if (fb - fa < 1e-300) throw ConstraintError("trunc_student: probability window underflow");
    const double pr = u * fb + (1.0 - u) * fa;
    x = pr == 0.5 ? 0.0 : boost::math::quantile(t, pr);
  }
  x *= scale;
  if (x <= lower) x = std::nextafter(lower, upper);
  if (x >= upper) x = std::nextafter(upper, lower);
  return x;
}

inline double trunc_student_sample(double dof, double scale, double lower, double upper,
                                   RngStream& rng) {
  return trunc_student_quantile(dof, scale, lower, upper, rng.uniform());
}

// N(0, sd^2) restricted to (lower, upper).
inline double trunc_normal_sample(double sd, double lower, double upper, RngStream& rng) {
  if (!(sd > 0.0)) throw ParameterError("trunc_normal: sd must be > 0");
  if (!(lower < upper)) throw ConstraintError("trunc_normal: empty interval");
  double a = lower / sd, b = upper / sd, sign = 1.0;
  if (a < 0.0 && b <= 0.0) {
    std::swap(a, b);
    a = -a, b = -b, sign = -1.0;
  }
  const boost::math::normal_distribution<double> n01;
  double x;
  if (a > 0.0) {
    const double sa = boost::math::cdf(boost::math::complement(n01, a));
    const double sb = std::isinf(b) ? 0.0 : boost::math::cdf(boost::math::complement(n01, b));
    if (sa - sb > 1e-300) {
      x = boost::math::quantile(boost::math::complement(n01, sb + rng.uniform() * (sa - sb)));
    } else {
      // far tail: exponential rejection, then uniform if the window is very narrow
      x = normal_tail_sample(a, rng);
      for (int k = 0; k < 1000 && x >= b; ++k) x = normal_tail_sample(a, rng);
      if (x >= b) x = a + rng.uniform() * (b - a);
    }
  } else {
    const double fa = std::isinf(a) ? 0.0 : norm_cdf(a);
    const double fb = std::isinf(b) ? 1.0 : norm_cdf(b);
    x = norm_quantile(fa + rng.uniform() * (fb - fa));
  }
  x = std::clamp(x, std::nextafter(a, b), std::nextafter(b, a));
  return sign * sd * x;
}

// ---------------------------------------------------------------------------
// inverse gamma and sqrt-inverse-gamma

inline double invgamma_sample(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) throw ParameterError("invgamma_sample: shape and scale must be > 0");
  return scale / rng.gamma(shape);
}

inline double invgamma_log_density(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

inline double invgamma_cdf(double x, double shape, double scale) {
  return x <= 0.0 ? 0.0 : boost::math::gamma_q(shape, scale / x);
}

// density of delta when sqrt(delta) ~ IG(two_a, b)
inline double sqrt_invgamma_log_density(double delta, double two_a, double b) {
  if (!(two_a > 0.0) || !(b > 0.0)) throw ParameterError("sqrt_invgamma: parameters must be > 0");
  if (!(delta > 0.0)) return -kInf;
  const double a = 0.5 * two_a;
  return two_a * std::log(b) - std::log(2.0) - std::lgamma(two_a) - (a + 1.0) * std::log(delta) -
         b / std::sqrt(delta);
}

inline double sqrt_invgamma_density(double delta, double two_a, double b) {
  return std::exp(sqrt_invgamma_log_density(delta, two_a, b));
}

inline double sqrt_invgamma_sample(double two_a, double b, RngStream& rng) {
  const double s = invgamma_sample(two_a, b, rng);
  return s * s;
}

}  // namespace upg
