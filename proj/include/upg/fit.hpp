#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "upg/baselines.hpp"
#include "upg/binary.hpp"
#include "upg/binomial.hpp"
#include "upg/mnl.hpp"
#include "upg/model.hpp"
#include "upg/ssm.hpp"

namespace upg {

enum class Sampler { Upg, AlbertChib, PolsonScott, Amh };

inline const char* sampler_name(Sampler s) {
  switch (s) {
    case Sampler::Upg: return "upg";
    case Sampler::AlbertChib: return "ac";
    case Sampler::PolsonScott: return "ps";
    case Sampler::Amh: return "amh";
  }
  return "?";
}

inline Sampler parse_sampler(const std::string& s) {
  if (s == "upg") return Sampler::Upg;
  if (s == "ac") return Sampler::AlbertChib;
  if (s == "ps") return Sampler::PolsonScott;
  if (s == "amh") return Sampler::Amh;
  throw ParameterError("unknown sampler '" + s + "' (expected upg, ac, ps or amh)");
}

inline std::vector<std::string> default_coef_names(Eigen::Index d) {
  std::vector<std::string> n;
  for (Eigen::Index j = 0; j + 1 < d; ++j) n.push_back("x" + std::to_string(j + 1));
  n.push_back("intercept");
  return n;
}

namespace detail {

// Runs burnin + draws sweeps; record(row) stores the state after each kept sweep.
template <class Sweep, class Record>
double run_loop(const McmcConfig& cfg, Sweep&& sweep, Record&& record) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int it = 0; it < cfg.burnin + cfg.draws; ++it) {
    sweep();
    if (it >= cfg.burnin) record(it - cfg.burnin);
  }
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

[[noreturn]] inline void unsupported(Sampler s, const char* model) {
  throw ParameterError(std::string("sampler '") + sampler_name(s) + "' is not available for " + model);
}

}  // namespace detail

inline DrawsStore run_binary(const BinaryDataset& data, const PriorConfig& prior, const McmcConfig& cfg,
                             Sampler sampler = Sampler::Upg, std::vector<std::string> names = {}) {
  data.validate();
  prior.validate(data.d());
  cfg.validate();
  if (sampler == Sampler::AlbertChib && cfg.link != Link::Probit) detail::unsupported(sampler, "logit");
  if (sampler == Sampler::PolsonScott && cfg.link != Link::Logit) detail::unsupported(sampler, "probit");
  RngStream rng(cfg.seed);
  DrawsStore out;
  out.resize(cfg.draws, data.d());
  out.names = names.empty() ? default_coef_names(data.d()) : std::move(names);

  if (sampler == Sampler::Amh) {
    AmhState st(Vector::Zero(data.d()), cfg.amh_scale);
    const LogPosterior lp = binary_log_posterior(data, prior, cfg.link);
    out.seconds = detail::run_loop(cfg, [&] { amh_sweep(st, lp, rng); }, [&](int r) { out.beta.row(r) = st.theta.transpose(); });
    out.acceptance = st.acceptance_rate();
    return out;
  }
  if (sampler == Sampler::PolsonScott) {
    Vector beta = Vector::Zero(data.d());
    out.seconds = detail::run_loop(cfg, [&] { ps_logit_sweep(beta, data, prior, rng); }, [&](int r) { out.beta.row(r) = beta.transpose(); });
    return out;
  }
  BinaryState s = binary_init(data, cfg.link, rng);
  McmcConfig c = cfg;
  if (sampler == Sampler::AlbertChib) c.boost = Boost::None;
  out.seconds = detail::run_loop(
      c, [&] { upg_binary_sweep(s, data, prior, c, rng); },
      [&](int r) {
        out.beta.row(r) = s.beta.transpose();
        out.gamma(r, 0) = s.gamma;
        out.delta(r, 0) = s.delta;
      });
  return out;
}

inline DrawsStore run_mnl(const MultinomialDataset& data, const PriorConfig& prior, const McmcConfig& cfg,
                          Sampler sampler = Sampler::Upg, std::vector<std::string> names = {}) {
  data.validate();
  prior.validate(data.d());
  cfg.validate();
  if (sampler == Sampler::AlbertChib) detail::unsupported(sampler, "mnl");
  const Eigen::Index d = data.d();
  RngStream rng(cfg.seed);
  DrawsStore out;
  out.resize(cfg.draws, data.m * d, data.m);
  const std::vector<std::string> base = names.empty() ? default_coef_names(d) : std::move(names);
  for (int k = 1; k <= data.m; ++k) {
    for (const auto& n : base) out.names.push_back("k" + std::to_string(k) + ":" + n);
  }
  auto flatten = [&](const Matrix& B, int r) {
    for (int k = 0; k < data.m; ++k) out.beta.row(r).segment(k * d, d) = B.row(k);
  };

  if (sampler == Sampler::Amh) {
    AmhState st(Vector::Zero(data.m * d), cfg.amh_scale);
    const LogPosterior lp = mnl_log_posterior(data, prior);
    out.seconds = detail::run_loop(cfg, [&] { amh_sweep(st, lp, rng); }, [&](int r) { out.beta.row(r) = st.theta.transpose(); });
    out.acceptance = st.acceptance_rate();
    return out;
  }
  if (sampler == Sampler::PolsonScott) {
    Matrix B = Matrix::Zero(data.m, d);
    out.seconds = detail::run_loop(cfg, [&] { ps_mnl_sweep(B, data, prior, rng); }, [&](int r) { flatten(B, r); });
    return out;
  }
  MnlState s = mnl_init(data);
  out.seconds = detail::run_loop(
      cfg, [&] { upg_mnl_sweep(s, data, prior, cfg, rng); },
      [&](int r) {
        flatten(s.B, r);
        out.gamma.row(r) = s.gamma.transpose();
        out.delta.row(r) = s.delta.transpose();
      });
  return out;
}

inline DrawsStore run_binomial(const BinomialDataset& data, const PriorConfig& prior, const McmcConfig& cfg,
                               Sampler sampler = Sampler::Upg, std::vector<std::string> names = {}) {
  data.validate();
  prior.validate(data.d());
  cfg.validate();
  if (sampler == Sampler::AlbertChib || sampler == Sampler::PolsonScott) detail::unsupported(sampler, "binomial");
  RngStream rng(cfg.seed);
  DrawsStore out;
  out.resize(cfg.draws, data.d());
  out.names = names.empty() ? default_coef_names(data.d()) : std::move(names);
  if (sampler == Sampler::Amh) {
    AmhState st(Vector::Zero(data.d()), cfg.amh_scale);
    const LogPosterior lp = binomial_log_posterior(data, prior);
    out.seconds = detail::run_loop(cfg, [&] { amh_sweep(st, lp, rng); }, [&](int r) { out.beta.row(r) = st.theta.transpose(); });
    out.acceptance = st.acceptance_rate();
    return out;
  }
  BinomialState s = binomial_init(data);
  out.seconds = detail::run_loop(
      cfg, [&] { upg_binomial_sweep(s, data, prior, cfg, rng); },
      [&](int r) {
        out.beta.row(r) = s.beta.transpose();
        out.gamma(r, 0) = s.gamma;
        out.delta(r, 0) = s.delta;
      });
  return out;
}

// Columns: beta_j[t] for t = 1..T (time-major), then theta_j, then init_j.
inline DrawsStore run_ssm(const TsDataset& data, const PriorConfig& prior, const McmcConfig& cfg,
                          std::vector<std::string> names = {}) {
  data.validate();
  prior.validate(data.d());
  cfg.validate();
  const Eigen::Index T = data.N(), d = data.d();
  const std::vector<std::string> base = names.empty() ? default_coef_names(d) : std::move(names);
  RngStream rng(cfg.seed);
  DrawsStore out;
  out.resize(cfg.draws, T * d + 2 * d);
  for (Eigen::Index t = 1; t <= T; ++t) {
    for (Eigen::Index j = 0; j < d; ++j) out.names.push_back(base[j] + "[" + std::to_string(t) + "]");
  }
  for (Eigen::Index j = 0; j < d; ++j) out.names.push_back("theta:" + base[j]);
  for (Eigen::Index j = 0; j < d; ++j) out.names.push_back("init:" + base[j]);
  SsmState s = ssm_init(data, prior, cfg.link, rng);
  out.seconds = detail::run_loop(
      cfg, [&] { upg_ssm_sweep(s, data, prior, cfg, rng); },
      [&](int r) {
        for (Eigen::Index t = 1; t <= T; ++t) out.beta.row(r).segment((t - 1) * d, d) = s.path.row(t);
        out.beta.row(r).segment(T * d, d) = s.theta.transpose();
        out.beta.row(r).segment(T * d + d, d) = s.init.transpose();
        out.gamma(r, 0) = s.gamma;
        out.delta(r, 0) = s.delta;
      });
  return out;
}

}  // namespace upg
