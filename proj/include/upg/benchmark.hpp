#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "upg/diagnostics.hpp"
#include "upg/fit.hpp"
#include "upg/model.hpp"
#include "upg/ssm.hpp"

namespace upg {

// A sampler as benchmarked: the algorithm plus, for UPG, its boost mode.
struct SamplerVariant {
  Sampler sampler = Sampler::Upg;
  Boost boost = Boost::Full;
  std::string label = "upg";
};

inline SamplerVariant parse_variant(const std::string& s) {
  if (s == "upg") return {Sampler::Upg, Boost::Full, s};
  if (s == "upg-scale") return {Sampler::Upg, Boost::ScaleOnly, s};
  if (s == "upg-none") return {Sampler::Upg, Boost::None, s};
  const Sampler base = parse_sampler(s);
  return {base, Boost::None, s};
}

enum class Grid { Intercept, OneSuccess, Categories, Trials };

inline Grid parse_grid(const std::string& s) {
  if (s == "intercept") return Grid::Intercept;
  if (s == "one-success") return Grid::OneSuccess;
  if (s == "categories") return Grid::Categories;
  if (s == "trials") return Grid::Trials;
  throw ParameterError("unknown grid '" + s + "' (expected intercept, one-success, categories or trials)");
}

inline const char* grid_param_name(Grid g) {
  switch (g) {
    case Grid::Intercept: return "intercept";
    case Grid::OneSuccess: return "N";
    case Grid::Categories: return "m";
    case Grid::Trials: return "trials";
  }
  return "?";
}

struct BenchmarkConfig {
  Model model = Model::Logit;
  Grid grid = Grid::Intercept;
  std::vector<double> values;
  std::vector<SamplerVariant> samplers;
  int reps = 10;
  int N = 1000;
  int d = 1;  // intercept-only: slopes are unidentified with a single success
  int m = 2;
  int trials = 10;
  double intercept = -3.0;  // fixed intercept for the trials grid
  McmcConfig mcmc;
  unsigned threads = 1;
};

struct BenchmarkRow {
  std::string model;
  std::string sampler;
  double param = 0.0;
  int replication = 0;
  double IF = 0.0;
  double ESS = 0.0;
  double seconds = 0.0;
  double acceptance = -1.0;
};

inline Scenario benchmark_scenario(const BenchmarkConfig& cfg, double value) {
  Scenario sc;
  sc.model = cfg.model;
  sc.N = cfg.N;
  sc.d = cfg.d;
  sc.m = cfg.m;
  sc.trials = cfg.trials;
  switch (cfg.grid) {
    case Grid::Intercept: sc.intercept = value; break;
    case Grid::OneSuccess:
      sc.N = static_cast<int>(value);
      sc.one_success = true;
      break;
    case Grid::Categories:
      sc.model = Model::Mnl;
      sc.m = static_cast<int>(value);
      sc.one_success = true;
      break;
    case Grid::Trials:
      sc.model = Model::Binomial;
      sc.trials = static_cast<int>(value);
      sc.intercept = cfg.intercept;
      break;
  }
  return sc;
}

// Runs one fit and returns the draws of the monitored coefficient: the intercept
// (of category 1 for mnl).
inline DrawsStore benchmark_fit(const Scenario& sc, const SimulatedData& sim, const SamplerVariant& v, McmcConfig mc) {
  const PriorConfig prior = PriorConfig::defaults(sc.d);
  mc.boost = v.boost;
  switch (sc.model) {
    case Model::Logit:
    case Model::Probit:
      mc.link = sc.model == Model::Logit ? Link::Logit : Link::Probit;
      return run_binary(sim.binary(), prior, mc, v.sampler);
    case Model::Mnl: return run_mnl(sim.multinomial(), prior, mc, v.sampler);
    case Model::Binomial: return run_binomial(sim.binomial(), prior, mc, v.sampler);
    default: throw ParameterError("benchmark: state-space models are benchmarked by pandemic-demo");
  }
}

inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkConfig& cfg) {
  if (cfg.values.empty()) throw ParameterError("benchmark: empty value grid");
  if (cfg.samplers.empty()) throw ParameterError("benchmark: no samplers");
  if (cfg.reps < 1) throw ParameterError("benchmark: reps must be >= 1");
  cfg.mcmc.validate();

  struct Job {
    std::size_t value_idx;
    int rep;
    std::size_t sampler_idx;
  };
  std::vector<Job> jobs;
  for (std::size_t vi = 0; vi < cfg.values.size(); ++vi) {
    for (int r = 0; r < cfg.reps; ++r) {
      for (std::size_t si = 0; si < cfg.samplers.size(); ++si) jobs.push_back({vi, r, si});
    }
  }
  std::vector<BenchmarkRow> rows(jobs.size());
  const RngStream root(cfg.mcmc.seed);

  auto work = [&](std::size_t j) {
    const Job& job = jobs[j];
    const double value = cfg.values[job.value_idx];
    const Scenario sc = benchmark_scenario(cfg, value);
    // data depend on (value, replication) only, so samplers see identical datasets
    RngStream data_rng = root.fork(job.value_idx * 100003 + static_cast<std::uint64_t>(job.rep));
    const SimulatedData sim = simulate_dataset(sc, data_rng);
    McmcConfig mc = cfg.mcmc;
    mc.seed = data_rng.fork(1 + job.sampler_idx).seed();
    const DrawsStore draws = benchmark_fit(sc, sim, cfg.samplers[job.sampler_idx], mc);
    const ChainStats st = inefficiency(draws.beta.col(sc.d - 1));
    BenchmarkRow& row = rows[j];
    row.model = model_name(sc.model);
    row.sampler = cfg.samplers[job.sampler_idx].label;
    row.param = value;
    row.replication = job.rep;
    row.IF = st.IF;
    row.ESS = st.ESS;
    row.seconds = draws.seconds;
    row.acceptance = draws.acceptance;
  };

  const unsigned nthreads = std::max(1u, std::min<unsigned>(cfg.threads, static_cast<unsigned>(jobs.size())));
  if (nthreads == 1) {
    for (std::size_t j = 0; j < jobs.size(); ++j) work(j);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr err;
  std::mutex err_mu;
  for (unsigned t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t j = next++; j < jobs.size(); j = next++) {
        try {
          work(j);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
  return rows;
}

struct BenchmarkSummary {
  std::string model;
  std::string sampler;
  double param = 0.0;
  double median_IF = 0.0;
  double median_ESS = 0.0;
  double median_seconds = 0.0;
};

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline std::vector<BenchmarkSummary> summarize_benchmark(const std::vector<BenchmarkRow>& rows) {
  std::map<std::tuple<std::string, std::string, double>, std::vector<const BenchmarkRow*>> groups;
  std::vector<std::tuple<std::string, std::string, double>> order;
  for (const auto& r : rows) {
    auto key = std::make_tuple(r.model, r.sampler, r.param);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<BenchmarkSummary> out;
  for (const auto& key : order) {
    std::vector<double> ifs, ess, sec;
    for (const BenchmarkRow* r : groups[key]) {
      ifs.push_back(r->IF);
      ess.push_back(r->ESS);
      sec.push_back(r->seconds);
    }
    out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), median(ifs), median(ess), median(sec)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// pandemic demo: local-level logit fitted with and without boosting

struct PandemicResult {
  std::vector<int> years;
  IVector y;
  Vector q10, q50, q90;  // predicted probability, boosted chain
  Vector if_boost, if_none;
  double seconds_boost = 0.0, seconds_none = 0.0;
};

inline PandemicResult pandemic_demo(int draws, int burnin, std::uint64_t seed) {
  const TsDataset data = pandemic_series();
  const Eigen::Index T = data.N();
  const PriorConfig prior = PriorConfig::defaults(1);
  PandemicResult res;
  res.y = data.y;
  for (int yr = kPandemicFirstYear; yr <= kPandemicLastYear; ++yr) res.years.push_back(yr);

  auto run = [&](Boost boost, Vector& ifs, double& seconds, bool keep_quantiles) {
    McmcConfig cfg;
    cfg.draws = draws;
    cfg.burnin = burnin;
    cfg.seed = seed;
    cfg.boost = boost;
    RngStream rng(seed);
    SsmState s = ssm_init(data, prior, Link::Logit, rng);
    Eigen::MatrixXf chain(draws, T);  // single precision keeps 100k x 221 draws in memory
    seconds = detail::run_loop(
        cfg, [&] { upg_ssm_sweep(s, data, prior, cfg, rng); },
        [&](int r) { chain.row(r) = s.path.col(0).tail(T).transpose().cast<float>(); });
    ifs.resize(T);
    if (keep_quantiles) {
      res.q10.resize(T);
      res.q50.resize(T);
      res.q90.resize(T);
    }
    for (Eigen::Index t = 0; t < T; ++t) {
      const Vector col = chain.col(t).cast<double>();
      ifs[t] = inefficiency(col, 1).IF;
      if (keep_quantiles) {
        std::vector<double> p(col.size());
        for (Eigen::Index i = 0; i < col.size(); ++i) p[i] = 1.0 / (1.0 + std::exp(-col[i]));
        std::sort(p.begin(), p.end());
        res.q10[t] = quantile(p, 0.10);
        res.q50[t] = quantile(p, 0.50);
        res.q90[t] = quantile(p, 0.90);
      }
    }
  };
  run(Boost::Full, res.if_boost, res.seconds_boost, true);
  run(Boost::None, res.if_none, res.seconds_none, false);
  return res;
}

}  // namespace upg
