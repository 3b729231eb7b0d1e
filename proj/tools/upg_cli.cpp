// upg: simulate, fit, benchmark and pandemic-demo front end.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "upg/benchmark.hpp"
#include "upg/fit.hpp"
#include "upg/io.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace upg;

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// --config: JSON object whose keys are long option names of the subcommand.
// Keys already given on the command line are skipped, so explicit flags win.

bool given(const std::vector<std::string>& args, const std::string& opt) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) { return a == opt || a.rfind(opt + "=", 0) == 0; });
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a == "--config" || a.rfind("--config=", 0) == 0; });
  if (it == args.end()) return args;
  std::string path;
  if (*it == "--config") {
    if (std::next(it) == args.end()) throw UsageError("--config needs a file");
    path = *std::next(it);
    args.erase(it, it + 2);
  } else {
    path = it->substr(9);
    args.erase(it);
  }
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw InputError("config '" + path + "': expected a JSON object");

  std::vector<std::string> extra;
  for (const auto& [key, val] : cfg.items()) {
    if (key == "subcommand") continue;
    const std::string opt = "--" + key;
    if (given(args, opt)) continue;
    if (val.is_boolean()) {
      if (val.get<bool>()) extra.push_back(opt);
    } else if (val.is_array()) {
      std::string joined;
      for (const auto& e : val) joined += (joined.empty() ? "" : ",") + scalar_text(e);
      extra.push_back(opt);
      extra.push_back(joined);
    } else {
      extra.push_back(opt);
      extra.push_back(scalar_text(val));
    }
  }
  // subcommand sits at args[1] unless only the config names it
  std::size_t pos = 1;
  if (args.size() < 2 || args[1].rfind("-", 0) == 0) {
    if (!cfg.contains("subcommand")) throw UsageError("no subcommand given");
    args.insert(args.begin() + 1, cfg["subcommand"].get<std::string>());
  }
  args.insert(args.begin() + static_cast<long>(pos) + 1, extra.begin(), extra.end());
  return args;
}

// ---------------------------------------------------------------------------

Boost parse_boost(const std::string& s) {
  if (s == "full") return Boost::Full;
  if (s == "scale") return Boost::ScaleOnly;
  if (s == "none") return Boost::None;
  throw ParameterError("unknown boost '" + s + "'");
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw InputError("cannot write '" + p.string() + "'");
  return out;
}

json stats_json(const std::string& name, const Vector& col) {
  json j;
  j["name"] = name;
  try {
    const ChainStats s = inefficiency(col);
    j["mean"] = s.mean;
    j["sd"] = s.sd;
    j["q05"] = s.q05;
    j["q50"] = s.q50;
    j["q95"] = s.q95;
    j["IF"] = s.IF;
    j["ESS"] = s.ESS;
  } catch (const std::exception&) {
    // constant or too short for the AR fit
    j["mean"] = col.mean();
    j["IF"] = nullptr;
    j["ESS"] = nullptr;
  }
  return j;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string model = "logit";
  int N = 1000;
  int d = 1;
  double intercept = 0.0;
  std::vector<double> slopes;
  int m = 1;
  int trials = 1;
  double theta = 0.01;
  bool one_success = false;
  std::uint64_t seed = 1;
  std::string out;
};

void cmd_simulate(const SimulateArgs& a) {
  Scenario sc;
  sc.model = parse_model(a.model);
  sc.N = a.N;
  sc.d = a.d;
  sc.intercept = a.intercept;
  if (!a.slopes.empty()) sc.slopes = Eigen::Map<const Vector>(a.slopes.data(), static_cast<Eigen::Index>(a.slopes.size()));
  sc.m = a.m;
  sc.trials = a.trials;
  sc.theta = a.theta;
  sc.one_success = a.one_success;
  if (sc.one_success && sc.model != Model::Logit && sc.model != Model::Probit && sc.model != Model::Mnl) {
    throw ParameterError("simulate: one-success is defined for logit, probit and mnl");
  }
  RngStream rng(a.seed);
  const SimulatedData sim = simulate_dataset(sc, rng);
  if (a.out.empty() || a.out == "-") {
    write_simulated_csv(std::cout, sim, sc.model);
  } else {
    auto out = open_out(a.out);
    write_simulated_csv(out, sim, sc.model);
  }
}

struct FitArgs {
  std::string input;
  std::string model = "logit";
  std::string sampler = "upg";
  std::string boost = "full";
  std::string gamma_step = "exact";
  std::string mnl_scheme = "offset";
  std::string delta_aux = "ig";
  std::string trials_col = "n";
  int m = 0;
  int draws = 10000;
  int burnin = 2000;
  std::uint64_t seed = 1;
  int resample = 10;
  double amh_scale = 5.66;
  bool no_intercept = false;
  double A0 = 100.0, G0 = 100.0, d0 = 2.5, D0 = 2.5, c0 = 2.5, C0 = 1.5, P = 1.0;
  std::string out_dir = ".";
};

void cmd_fit(const FitArgs& a) {
  const Model model = parse_model(a.model);
  const Sampler sampler = parse_sampler(a.sampler);
  McmcConfig cfg;
  cfg.draws = a.draws;
  cfg.burnin = a.burnin;
  cfg.seed = a.seed;
  cfg.boost = parse_boost(a.boost);
  cfg.link = model == Model::Probit || model == Model::SsmProbit ? Link::Probit : Link::Logit;
  if (a.gamma_step == "exact") cfg.gamma_step = GammaStep::Exact;
  else if (a.gamma_step == "prior-t") cfg.gamma_step = GammaStep::PriorT;
  else throw ParameterError("unknown gamma-step '" + a.gamma_step + "'");
  if (a.mnl_scheme == "offset") cfg.mnl_scheme = MnlScheme::Offset;
  else if (a.mnl_scheme == "aggregated") cfg.mnl_scheme = MnlScheme::Aggregated;
  else throw ParameterError("unknown mnl-scheme '" + a.mnl_scheme + "'");
  if (a.delta_aux == "ig") cfg.delta_aux = DeltaAux::InvGamma;
  else if (a.delta_aux == "sqrt-ig") cfg.delta_aux = DeltaAux::SqrtInvGamma;
  else throw ParameterError("unknown delta-aux '" + a.delta_aux + "'");
  cfg.resample_draws = a.resample;
  cfg.amh_scale = a.amh_scale;

  const CsvTable table = read_csv(a.input);
  const FitInput in = table_to_input(table, !a.no_intercept, model == Model::Binomial ? a.trials_col : "");
  const Eigen::Index d = in.X.cols();
  PriorConfig prior = PriorConfig::defaults(d);
  prior.A0 = a.A0 * Matrix::Identity(d, d);
  prior.G0 = a.G0;
  prior.d0 = a.d0;
  prior.D0 = a.D0;
  prior.c0 = a.c0;
  prior.C0 = a.C0;
  prior.Pjj = Vector::Constant(d, a.P);

  DrawsStore draws;
  std::vector<std::string> block_names = {""};
  switch (model) {
    case Model::Logit:
    case Model::Probit: draws = run_binary({in.X, in.y}, prior, cfg, sampler, in.names); break;
    case Model::Mnl: {
      const int m = a.m > 0 ? a.m : (in.y.size() ? in.y.maxCoeff() : 0);
      if (m < 1) throw InputError("mnl: need at least one non-baseline category");
      draws = run_mnl({in.X, in.y, m}, prior, cfg, sampler, in.names);
      block_names.clear();
      for (int k = 1; k <= m; ++k) block_names.push_back(":k" + std::to_string(k));
      break;
    }
    case Model::Binomial: draws = run_binomial({in.X, in.y, in.n}, prior, cfg, sampler, in.names); break;
    case Model::SsmLogit:
    case Model::SsmProbit:
      if (sampler != Sampler::Upg) throw ParameterError("state-space models support only the upg sampler");
      draws = run_ssm({in.X, in.y}, prior, cfg, in.names);
      break;
  }

  fs::create_directories(a.out_dir);
  std::vector<std::string> header = draws.names;
  for (const auto& b : block_names) header.push_back("gamma" + b);
  for (const auto& b : block_names) header.push_back("delta" + b);
  Matrix all(draws.beta.rows(), draws.beta.cols() + draws.gamma.cols() + draws.delta.cols());
  all << draws.beta, draws.gamma, draws.delta;
  {
    auto out = open_out(fs::path(a.out_dir) / "draws.csv");
    write_csv(out, header, all);
  }

  json diag;
  diag["seed"] = a.seed;
  diag["seconds"] = draws.seconds;
  if (draws.acceptance >= 0) diag["acceptance"] = draws.acceptance;
  diag["config"] = {{"input", a.input},       {"model", a.model},         {"sampler", a.sampler},
                    {"boost", a.boost},       {"gamma-step", a.gamma_step}, {"mnl-scheme", a.mnl_scheme},
                    {"delta-aux", a.delta_aux}, {"resample", a.resample},   {"draws", a.draws},
                    {"burnin", a.burnin},     {"amh-scale", a.amh_scale}, {"intercept", !a.no_intercept},
                    {"A0", a.A0},             {"G0", a.G0},               {"d0", a.d0},
                    {"D0", a.D0},             {"c0", a.c0},               {"C0", a.C0},
                    {"P", a.P}};
  json params = json::array();
  for (Eigen::Index j = 0; j < draws.beta.cols(); ++j) params.push_back(stats_json(draws.names[j], draws.beta.col(j)));
  diag["parameters"] = params;
  auto out = open_out(fs::path(a.out_dir) / "diag.json");
  out << diag.dump(2) << '\n';
}

struct BenchArgs {
  std::string model = "logit";
  std::string grid = "one-success";
  std::vector<double> values;
  std::vector<std::string> samplers = {"upg", "ps", "amh"};
  int reps = 10;
  int draws = 10000;
  int burnin = 2000;
  int N = 1000;
  int d = 1;
  int m = 2;
  int trials = 10;
  double intercept = -3.0;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string summarize;
};

void cmd_benchmark(const BenchArgs& a) {
  BenchmarkConfig c;
  c.model = parse_model(a.model);
  c.grid = parse_grid(a.grid);
  c.values = a.values;
  if (c.values.empty()) {
    switch (c.grid) {
      case Grid::Intercept: c.values = {-5, -4, -3, -2, -1, 0, 1, 2, 3, 4, 5}; break;
      case Grid::OneSuccess: c.values = {1000}; break;
      case Grid::Categories: c.values = {2, 3, 4}; break;
      case Grid::Trials: c.values = {1, 10, 50}; break;
    }
  }
  for (const auto& s : a.samplers) c.samplers.push_back(parse_variant(s));
  c.reps = a.reps;
  c.N = a.N;
  c.d = a.d;
  c.m = a.m;
  c.trials = a.trials;
  c.intercept = a.intercept;
  c.mcmc.draws = a.draws;
  c.mcmc.burnin = a.burnin;
  c.mcmc.seed = a.seed;
  c.threads = a.threads;
  const auto rows = run_benchmark(c);

  auto emit = [&](std::ostream& o) {
    o << "model,sampler,param,replication,IF,ESS,seconds,acceptance\n";
    for (const auto& r : rows) {
      o << r.model << ',' << r.sampler << ',' << format_double(r.param) << ',' << r.replication << ','
        << format_double(r.IF) << ',' << format_double(r.ESS) << ',' << format_double(r.seconds) << ','
        << format_double(r.acceptance) << '\n';
    }
  };
  if (a.out.empty() || a.out == "-") {
    emit(std::cout);
  } else {
    auto out = open_out(a.out);
    emit(out);
  }
  if (!a.summarize.empty()) {
    auto out = open_out(a.summarize);
    out << "model,sampler,param,median_IF,median_ESS,median_seconds\n";
    for (const auto& s : summarize_benchmark(rows)) {
      out << s.model << ',' << s.sampler << ',' << format_double(s.param) << ',' << format_double(s.median_IF) << ','
          << format_double(s.median_ESS) << ',' << format_double(s.median_seconds) << '\n';
    }
  }
}

struct PandemicArgs {
  int draws = 100000;
  int burnin = 2000;
  bool full = false;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

void cmd_pandemic(PandemicArgs a) {
  if (a.full) {
    a.draws = 500000;
    a.burnin = 20000;
  }
  const PandemicResult r = pandemic_demo(a.draws, a.burnin, a.seed);
  fs::create_directories(a.out_dir);
  const Eigen::Index T = r.y.size();
  {
    auto out = open_out(fs::path(a.out_dir) / "path.csv");
    out << "year,y,q10,q50,q90\n";
    for (Eigen::Index t = 0; t < T; ++t) {
      out << r.years[t] << ',' << r.y[t] << ',' << format_double(r.q10[t]) << ',' << format_double(r.q50[t]) << ','
          << format_double(r.q90[t]) << '\n';
    }
  }
  int better = 0;
  {
    auto out = open_out(fs::path(a.out_dir) / "if.csv");
    out << "year,if_boost,if_none\n";
    for (Eigen::Index t = 0; t < T; ++t) {
      out << r.years[t] << ',' << format_double(r.if_boost[t]) << ',' << format_double(r.if_none[t]) << '\n';
      better += r.if_boost[t] <= r.if_none[t];
    }
  }
  json s;
  s["T"] = T;
  s["successes"] = r.y.sum();
  s["draws"] = a.draws;
  s["burnin"] = a.burnin;
  s["seed"] = a.seed;
  s["fraction_boost_not_worse"] = static_cast<double>(better) / static_cast<double>(T);
  s["seconds_boost"] = r.seconds_boost;
  s["seconds_none"] = r.seconds_none;
  std::cout << s.dump(2) << '\n';
}

int report(const std::string& kind, const std::string& msg, int code) {
  json e;
  e["error"] = kind;
  e["message"] = msg;
  std::cerr << e.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultimate Polya-Gamma samplers for binary, multinomial, binomial and state-space models"};
  app.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "draw a dataset from a model scenario, written as CSV");
  sim->add_option("--model", sa.model, "logit|probit|mnl|binomial|ssm-logit|ssm-probit")->capture_default_str();
  sim->add_option("--N", sa.N, "observations (T for state-space)")->capture_default_str();
  sim->add_option("--d", sa.d, "columns including the intercept")->capture_default_str();
  sim->add_option("--intercept", sa.intercept)->capture_default_str();
  sim->add_option("--slopes", sa.slopes, "d-1 slopes; default 0")->delimiter(',');
  sim->add_option("--m", sa.m, "non-baseline categories (mnl)")->capture_default_str();
  sim->add_option("--trials", sa.trials, "trials per observation (binomial)")->capture_default_str();
  sim->add_option("--theta", sa.theta, "process variance (state-space)")->capture_default_str();
  sim->add_flag("--one-success", sa.one_success, "plant exactly one success (per category for mnl)");
  sim->add_option("--seed", sa.seed)->capture_default_str();
  sim->add_option("--out", sa.out, "output CSV, '-' for stdout");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "run a sampler on a CSV dataset");
  fit->add_option("--input", fa.input, "CSV with a y column")->required();
  fit->add_option("--model", fa.model)->capture_default_str();
  fit->add_option("--sampler", fa.sampler, "upg|ac|ps|amh")->capture_default_str();
  fit->add_option("--boost", fa.boost, "full|scale|none")->capture_default_str();
  fit->add_option("--gamma-step", fa.gamma_step, "exact|prior-t")->capture_default_str();
  fit->add_option("--mnl-scheme", fa.mnl_scheme, "offset|aggregated")->capture_default_str();
  fit->add_option("--delta-aux", fa.delta_aux, "ig|sqrt-ig (binomial delta resampler)")->capture_default_str();
  fit->add_option("--resample", fa.resample, "binomial delta resampler draws")->capture_default_str();
  fit->add_option("--trials-col", fa.trials_col)->capture_default_str();
  fit->add_option("--m", fa.m, "non-baseline categories; default max(y)");
  fit->add_option("--draws", fa.draws)->capture_default_str();
  fit->add_option("--burnin", fa.burnin)->capture_default_str();
  fit->add_option("--seed", fa.seed)->capture_default_str();
  fit->add_option("--amh-scale", fa.amh_scale)->capture_default_str();
  fit->add_flag("--no-intercept,--no-intercept-append", fa.no_intercept, "do not append an intercept column");
  fit->add_option("--A0", fa.A0, "prior variance of each coefficient (diagonal)")->capture_default_str();
  fit->add_option("--G0", fa.G0)->capture_default_str();
  fit->add_option("--d0", fa.d0)->capture_default_str();
  fit->add_option("--D0", fa.D0)->capture_default_str();
  fit->add_option("--c0", fa.c0)->capture_default_str();
  fit->add_option("--C0", fa.C0)->capture_default_str();
  fit->add_option("--P", fa.P, "initial-state scale (state-space)")->capture_default_str();
  fit->add_option("--out-dir", fa.out_dir)->capture_default_str();

  BenchArgs ba;
  auto* bench = app.add_subcommand("benchmark", "inefficiency factors over a scenario grid");
  bench->add_option("--model", ba.model)->capture_default_str();
  bench->add_option("--grid", ba.grid, "intercept|one-success|categories|trials")->capture_default_str();
  bench->add_option("--values", ba.values, "grid values")->delimiter(',');
  bench->add_option("--samplers", ba.samplers, "upg|upg-scale|upg-none|ac|ps|amh")->delimiter(',');
  bench->add_option("--reps", ba.reps)->capture_default_str();
  bench->add_option("--draws", ba.draws)->capture_default_str();
  bench->add_option("--burnin", ba.burnin)->capture_default_str();
  bench->add_option("--N", ba.N)->capture_default_str();
  bench->add_option("--d", ba.d)->capture_default_str();
  bench->add_option("--m", ba.m)->capture_default_str();
  bench->add_option("--trials", ba.trials)->capture_default_str();
  bench->add_option("--intercept", ba.intercept, "fixed intercept of the trials grid")->capture_default_str();
  bench->add_option("--seed", ba.seed)->capture_default_str();
  bench->add_option("--threads", ba.threads)->capture_default_str();
  bench->add_option("--out", ba.out, "long-format CSV, '-' for stdout");
  bench->add_option("--summarize", ba.summarize, "also write medians per (model, sampler, param)");

  PandemicArgs pa;
  auto* pan = app.add_subcommand("pandemic-demo", "local-level logit on the bundled pandemic series");
  pan->add_option("--draws", pa.draws)->capture_default_str();
  pan->add_option("--burnin", pa.burnin)->capture_default_str();
  pan->add_flag("--full", pa.full, "500k draws after 20k burn-in");
  pan->add_option("--seed", pa.seed)->capture_default_str();
  pan->add_option("--out-dir", pa.out_dir)->capture_default_str();

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<const char*> cargs;
    for (const auto& s : args) cargs.push_back(s.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());

    if (sim->parsed()) cmd_simulate(sa);
    else if (fit->parsed()) cmd_fit(fa);
    else if (bench->parsed()) cmd_benchmark(ba);
    else if (pan->parsed()) cmd_pandemic(pa);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), 2);
  } catch (const UsageError& e) {
    return report("usage", e.what(), 2);
  } catch (const InputError& e) {
    return report("input", e.what(), 3);
  } catch (const ParameterError& e) {
    return report("parameter", e.what(), 4);
  } catch (const std::exception& e) {
    return report("runtime", e.what(), 5);
  }
}
