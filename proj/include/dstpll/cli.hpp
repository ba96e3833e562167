#pragma once

// Command-line front end. Needs the vendored CLI11 and nlohmann/json headers.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dstpll/dataset.hpp"
#include "dstpll/error.hpp"
#include "dstpll/metrics.hpp"
#include "dstpll/oracle.hpp"
#include "dstpll/oracle_exact.hpp"
#include "dstpll/pll.hpp"

namespace dstpll::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kDataError = 3 };

/// Bad configuration or usage; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Every parameter any subcommand reads. Labels are 1-based here, as in files.
struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::optional<std::size_t> num_labels;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  // augment
  std::size_t r = 1;
  double p = 0.0;
  std::optional<double> epsilon;

  // benchmark / cooccur
  std::size_t k = 10;
  double alpha = 0.5;
  std::size_t folds = 5;
  std::vector<double> betas{0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::string> methods{"dst-pll", "pl-knn"};
  std::string case2_mode = "literal";
  bool standardize = true;

  // simulate / risk-curve
  std::size_t l = 3;
  std::size_t y_true = 1;
  std::size_t y_cooccur = 2;
  double p1 = 0.4;
  double p2 = 0.35;
  double p3 = 0.25;
  std::size_t k_min = 1;
  std::size_t k_max = 15;
  std::size_t trials = 100000;
  std::vector<std::size_t> n_grid{50, 200, 800, 3200};
  std::size_t repetitions = 20;
  double sigma = RiskGeometry{}.sigma;
  std::size_t queries = RiskGeometry{}.queries;

  // generate
  std::size_t n = 500;
  std::size_t dim = 8;
  double separation = 4.0;
  double sd = 1.0;

  // selfcheck
  std::size_t check_k_max = 20;
};

inline void to_json(nlohmann::ordered_json& j, const RunConfig& c) {
  j = nlohmann::ordered_json{{"command", c.command},   {"input", c.input},
                             {"output", c.output},     {"seed", c.seed},
                             {"jobs", c.jobs},         {"r", c.r},
                             {"p", c.p},               {"k", c.k},
                             {"alpha", c.alpha},       {"folds", c.folds},
                             {"betas", c.betas},       {"methods", c.methods},
                             {"case2_mode", c.case2_mode}, {"standardize", c.standardize},
                             {"l", c.l},               {"y_true", c.y_true},
                             {"y_cooccur", c.y_cooccur}, {"p1", c.p1},
                             {"p2", c.p2},             {"p3", c.p3},
                             {"k_min", c.k_min},       {"k_max", c.k_max},
                             {"trials", c.trials},     {"n_grid", c.n_grid},
                             {"repetitions", c.repetitions}, {"sigma", c.sigma},
                             {"queries", c.queries},   {"n", c.n},
                             {"dim", c.dim},           {"separation", c.separation},
                             {"sd", c.sd},             {"check_k_max", c.check_k_max}};
  j["num_labels"] = c.num_labels ? nlohmann::ordered_json(*c.num_labels) : nlohmann::ordered_json(nullptr);
  j["epsilon"] = c.epsilon ? nlohmann::ordered_json(*c.epsilon) : nlohmann::ordered_json(nullptr);
}

namespace detail {

template <typename T>
void read_key(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

template <typename T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (auto it = j.find(key); it != j.end()) {
    if (it->is_null()) {
      out.reset();
    } else {
      out = it->get<T>();
    }
  }
}

}  // namespace detail

/// Overlays a JSON document onto `c`. Unknown keys are rejected.
inline void apply_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  nlohmann::ordered_json known;
  to_json(known, RunConfig{});
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  try {
    detail::read_key(j, "command", c.command);
    detail::read_key(j, "input", c.input);
    detail::read_key(j, "output", c.output);
    detail::read_optional(j, "num_labels", c.num_labels);
    detail::read_key(j, "seed", c.seed);
    detail::read_key(j, "jobs", c.jobs);
    detail::read_key(j, "r", c.r);
    detail::read_key(j, "p", c.p);
    detail::read_optional(j, "epsilon", c.epsilon);
    detail::read_key(j, "k", c.k);
    detail::read_key(j, "alpha", c.alpha);
    detail::read_key(j, "folds", c.folds);
    detail::read_key(j, "betas", c.betas);
    detail::read_key(j, "methods", c.methods);
    detail::read_key(j, "case2_mode", c.case2_mode);
    detail::read_key(j, "standardize", c.standardize);
    detail::read_key(j, "l", c.l);
    detail::read_key(j, "y_true", c.y_true);
    detail::read_key(j, "y_cooccur", c.y_cooccur);
    detail::read_key(j, "p1", c.p1);
    detail::read_key(j, "p2", c.p2);
    detail::read_key(j, "p3", c.p3);
    detail::read_key(j, "k_min", c.k_min);
    detail::read_key(j, "k_max", c.k_max);
    detail::read_key(j, "trials", c.trials);
    detail::read_key(j, "n_grid", c.n_grid);
    detail::read_key(j, "repetitions", c.repetitions);
    detail::read_key(j, "sigma", c.sigma);
    detail::read_key(j, "queries", c.queries);
    detail::read_key(j, "n", c.n);
    detail::read_key(j, "dim", c.dim);
    detail::read_key(j, "separation", c.separation);
    detail::read_key(j, "sd", c.sd);
    detail::read_key(j, "check_k_max", c.check_k_max);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config value has the wrong type: ") + e.what());
  }
}

inline Case2Mode parse_case2_mode(const std::string& s) {
  if (s == "literal") return Case2Mode::Literal;
  if (s == "smallest_focal") return Case2Mode::SmallestFocal;
  throw ConfigError("case2_mode must be literal or smallest_focal, got '" + s + "'");
}

inline NoiseModel noise_model(const RunConfig& c) {
  if (c.y_true < 1 || c.y_cooccur < 1) throw ConfigError("y_true and y_cooccur are 1-based labels");
  NoiseModel m{c.l, c.y_true - 1, c.y_cooccur - 1, c.p1, c.p2, c.p3};
  try {
    m.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return m;
}

/// Starting values for `command`: risk-curve begins from the default risk
/// scenario, everything else from the RunConfig member defaults.
inline RunConfig defaults_for(const std::string& command) {
  RunConfig c;
  if (command == "risk-curve") {
    const RiskScenario sc;
    c.l = sc.model.l;
    c.y_true = sc.model.y_true + 1;
    c.y_cooccur = sc.model.y_cooccur + 1;
    c.p1 = sc.model.p1;
    c.p2 = sc.model.p2;
    c.p3 = sc.model.p3;
    c.k = sc.k;
    c.n_grid = sc.n_grid;
    c.repetitions = sc.repetitions;
  }
  return c;
}

/// Domain checks that need no data. Throws ConfigError.
inline void validate(const RunConfig& c) {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  const bool reads_input = c.command == "augment" || c.command == "benchmark" || c.command == "cooccur";
  if (reads_input) {
    need(!c.input.empty(), "--input is required");
    need(std::filesystem::is_regular_file(c.input), "input file not found: " + c.input);
  }
  if (c.command != "selfcheck") need(!c.output.empty(), "--output is required");
  need(c.jobs >= 1, "jobs must be at least 1");
  if (c.num_labels) need(*c.num_labels >= 1, "num_labels must be positive");
  if (c.command == "augment") {
    need(c.p >= 0.0 && c.p <= 1.0, "p must lie in [0,1]");
    need(c.r >= 1 && c.r <= 3, "r must be 1, 2 or 3");
    if (c.epsilon) {
      need(*c.epsilon >= 0.0 && *c.epsilon <= 1.0, "epsilon must lie in [0,1]");
      need(c.r == 1, "epsilon requires r = 1");
    }
  }
  if (c.command == "benchmark") {
    need(c.k >= 1, "k must be at least 1");
    need(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0,1)");
    need(c.folds >= 2, "folds must be at least 2");
    for (double b : c.betas) need(b >= 0.0 && b <= 1.0, "every beta must lie in [0,1]");
    need(!c.methods.empty(), "at least one method is required");
    for (const auto& m : c.methods) need(m == "dst-pll" || m == "pl-knn", "unknown method '" + m + "'");
    parse_case2_mode(c.case2_mode);
  }
  if (c.command == "cooccur") need(c.k >= 1, "k must be at least 1");
  if (c.command == "simulate") {
    noise_model(c);
    need(c.trials >= 1, "trials must be at least 1");
    need(c.k_min >= 1 && c.k_min <= c.k_max, "need 1 <= k_min <= k_max");
  }
  if (c.command == "risk-curve") {
    noise_model(c);
    need(c.k >= 1, "k must be at least 1");
    need(!c.n_grid.empty(), "n_grid must not be empty");
    for (std::size_t n : c.n_grid) need(n >= c.k, "every n in n_grid must be at least k");
    need(c.repetitions >= 1 && c.queries >= 1, "repetitions and queries must be positive");
    need(c.sigma > 0.0, "sigma must be positive");
  }
  if (c.command == "generate") {
    need(c.n >= 1 && c.num_labels.has_value() && *c.num_labels >= 2, "generate needs n >= 1 and num_labels >= 2");
    need(c.dim >= *c.num_labels, "dim must be at least num_labels");
    need(c.sd >= 0.0, "sd must be non-negative");
  }
  if (c.command == "selfcheck") need(c.check_k_max >= 1 && c.check_k_max <= 20, "check_k_max must lie in [1,20]");
}

// ---------------------------------------------------------------------------
// Work

/// Runs f(0..count-1) on `jobs` threads. Results must be written to per-index
/// slots by f; the first exception is rethrown.
template <typename F>
void parallel_for(std::size_t count, std::size_t jobs, F&& f) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

struct FoldOutcome {
  EvalReport dst;
  EvalReport knn;
};

struct BenchmarkOptions {
  PllConfig pll;
  bool standardize = true;
};

/// Fits on the fold's training rows and predicts its test rows with s~ = Y.
/// The global row index seeds each prediction's random stream.
inline FoldOutcome run_fold(const PartialDataset& ds, const Fold& fold, const BenchmarkOptions& opt) {
  if (!ds.truth) throw Error(ErrorCode::TruthMissing, "benchmark needs ground-truth labels");
  PartialDataset train = ds.subset(fold.train);
  Matrix test = ds.features.select_rows(fold.test);
  if (opt.standardize) {
    auto z = standardize(train.features, test);
    train.features = std::move(z.train);
    test = std::move(z.other);
  }
  const auto model = PllModel::fit(train, opt.pll);
  std::vector<Prediction> dst, knn;
  std::vector<Label> truth;
  for (std::size_t q = 0; q < fold.test.size(); ++q) {
    auto pred = model.predict(test.row(q), fold.test[q]);
    pred.bpa.reset();
    dst.push_back(std::move(pred));
    knn.push_back(model.plknn_predict(test.row(q)));
    truth.push_back((*ds.truth)[fold.test[q]]);
  }
  return {evaluate(truth, dst, ds.num_labels), evaluate(truth, knn, ds.num_labels)};
}

namespace detail {

using dstpll::detail::format_real;

inline std::string beta_column(double beta) { return "o_beta_" + format_real(beta); }

inline std::vector<double> report_values(const EvalReport& r, std::span<const double> betas) {
  std::vector<double> v{static_cast<double>(r.n), r.accuracy,          r.mcc,
                        r.frac_confident,         r.mcc_confident,     r.accuracy_confident,
                        static_cast<double>(r.n_confident)};
  for (double b : betas) v.push_back(tradeoff(r.mcc_confident, r.frac_confident, b));
  return v;
}

inline void write_row(std::ostream& os, const std::string& method, const std::string& fold,
                      const std::vector<double>& values) {
  os << method << ',' << fold;
  for (double v : values) os << ',' << format_real(v);
  os << '\n';
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
  f << content;
  if (!f) throw Error(ErrorCode::Io, "failed writing " + path);
}

}  // namespace detail

inline std::string benchmark_csv(const PartialDataset& ds, const RunConfig& c) {
  BenchmarkOptions opt;
  opt.pll.k = c.k;
  opt.pll.alpha = c.alpha;
  opt.pll.seed = c.seed;
  opt.pll.case2_mode = parse_case2_mode(c.case2_mode);
  opt.standardize = c.standardize;
  const auto folds = kfold(ds.size(), c.folds, c.seed);
  std::vector<FoldOutcome> outcomes(folds.size());
  parallel_for(folds.size(), c.jobs, [&](std::size_t f) { outcomes[f] = run_fold(ds, folds[f], opt); });

  std::ostringstream os;
  os << "method,fold," << EvalReport::csv_header();
  for (double b : c.betas) os << ',' << detail::beta_column(b);
  os << '\n';
  for (const auto& method : c.methods) {
    std::vector<std::vector<double>> rows;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      const auto& rep = method == "dst-pll" ? outcomes[f].dst : outcomes[f].knn;
      rows.push_back(detail::report_values(rep, c.betas));
      detail::write_row(os, method, std::to_string(f + 1), rows.back());
    }
    const std::size_t width = rows.front().size();
    std::vector<double> mean(width, 0.0), sd(width, 0.0);
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < width; ++j) mean[j] += r[j];
    }
    for (double& m : mean) m /= static_cast<double>(rows.size());
    for (const auto& r : rows) {
      for (std::size_t j = 0; j < width; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]);
    }
    for (double& s : sd) s = std::sqrt(s / static_cast<double>(rows.size() - 1));
    detail::write_row(os, method, "mean", mean);
    detail::write_row(os, method, "std", sd);
  }
  return os.str();
}

inline std::string simulate_csv(const RunConfig& c) {
  const NoiseModel model = noise_model(c);
  const std::size_t count = c.k_max - c.k_min + 1;
  struct Row {
    double closed_true, closed_co;
    SimulationResult sim;
  };
  std::vector<Row> rows(count);
  parallel_for(count, c.jobs, [&](std::size_t i) {
    const std::size_t k = c.k_min + i;
    rows[i] = {expected_belief_true(model, k), expected_belief_cooccur(model, k),
               simulate_expected_belief(model, k, c.trials, Rng(c.seed).split(k).seed())};
  });
  std::ostringstream os;
  os << "k,closed_true,closed_cooccur,sim_true,sim_cooccur,stderr_true,stderr_cooccur\n";
  for (std::size_t i = 0; i < count; ++i) {
    const auto& r = rows[i];
    os << c.k_min + i << ',' << detail::format_real(r.closed_true) << ',' << detail::format_real(r.closed_co) << ','
       << detail::format_real(r.sim.mean_true) << ',' << detail::format_real(r.sim.mean_cooccur) << ','
       << detail::format_real(r.sim.stderr_true) << ',' << detail::format_real(r.sim.stderr_cooccur) << '\n';
  }
  return os.str();
}

inline std::string cooccur_csv(const PartialDataset& ds, std::size_t k) {
  const auto m = cooccurrence_matrix(ds, k);
  std::ostringstream os;
  os << "truth";
  for (std::size_t y = 1; y <= m.size(); ++y) os << ',' << y;
  os << '\n';
  for (std::size_t t = 0; t < m.size(); ++t) {
    os << t + 1;
    for (std::size_t y = 0; y < m.size(); ++y) os << ',' << m.at(t, y);
    os << '\n';
  }
  return os.str();
}

inline std::string risk_curve_csv(const RunConfig& c) {
  RiskGeometry geo;
  geo.sigma = c.sigma;
  geo.queries = c.queries;
  const auto points = risk_curve(noise_model(c), c.n_grid, c.k, c.repetitions, c.seed, geo);
  std::ostringstream os;
  os << "n,risk,stderr\n";
  for (const auto& p : points) {
    os << p.n << ',' << detail::format_real(p.risk) << ',' << detail::format_real(p.stderr) << '\n';
  }
  return os.str();
}

inline std::string selfcheck_csv(const exact::BinomialCheckReport& r) {
  std::ostringstream os;
  os << "check,value\n"
     << "k_max," << r.k_max << '\n'
     << "l3_combinations," << r.l3.combinations << '\n'
     << "l3_violations," << r.l3.violations << '\n'
     << "l3_strict," << r.l3.strict << '\n'
     << "l4_combinations," << r.l4.combinations << '\n'
     << "l4_violations," << r.l4.violations << '\n'
     << "l4_strict," << r.l4.strict << '\n'
     << "base_case_ok," << r.base_case_ok << '\n'
     << "shared_kernel_ok," << r.shared_kernel_ok << '\n'
     << "max_rel_error_true," << detail::format_real(r.max_rel_error_true) << '\n'
     << "max_rel_error_cooccur," << detail::format_real(r.max_rel_error_cooccur) << '\n'
     << "passed," << r.passed << '\n';
  return os.str();
}

/// Executes a validated config; returns the exit code. Module errors escape.
inline int execute(const RunConfig& c, std::ostream& out) {
  std::string csv;
  int code = kOk;
  if (c.command == "augment") {
    AugmentSpec spec{c.r, c.p, c.epsilon, c.seed};
    save_csv(augment(load_csv(c.input, c.num_labels), spec), c.output);
  } else if (c.command == "benchmark") {
    csv = benchmark_csv(load_csv(c.input, c.num_labels), c);
  } else if (c.command == "simulate") {
    csv = simulate_csv(c);
  } else if (c.command == "cooccur") {
    csv = cooccur_csv(load_csv(c.input, c.num_labels), c.k);
  } else if (c.command == "risk-curve") {
    csv = risk_curve_csv(c);
  } else if (c.command == "generate") {
    save_csv(gaussian_clusters(c.n, *c.num_labels, c.dim, c.separation, c.sd, c.seed), c.output);
  } else if (c.command == "selfcheck") {
    const auto rep = exact::exact_binomial_check(c.check_k_max);
    csv = selfcheck_csv(rep);
    code = rep.passed ? kOk : kCheckFailed;
    if (c.output.empty()) out << csv;
  }
  if (!csv.empty() && !c.output.empty()) detail::write_file(c.output, csv);
  if (!c.output.empty()) {
    nlohmann::ordered_json echo;
    to_json(echo, c);
    detail::write_file(c.output + ".json", echo.dump(2) + "\n");
  }
  return code;
}

// ---------------------------------------------------------------------------
// Argument handling

namespace detail {

/// Finds `--config PATH` or `--config=PATH` ahead of CLI11 parsing, so the
/// file can seed values that explicit flags then override.
inline std::optional<std::string> find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return std::nullopt;
}

inline void add_common(CLI::App& sub, RunConfig& c, std::string& config_path) {
  sub.add_option("--config", config_path, "JSON config file; flags override its values");
  sub.add_option("--seed", c.seed, "random seed (default: $DSTPLL_SEED or 0)");
  sub.add_option("--jobs", c.jobs, "worker threads");
  sub.add_option("-o,--output", c.output, "output file; a .json config echo is written beside it");
}

inline void add_model_flags(CLI::App& sub, RunConfig& c) {
  sub.add_option("--l", c.l, "number of labels");
  sub.add_option("--y-true", c.y_true, "dominant label (1-based)");
  sub.add_option("--y-cooccur", c.y_cooccur, "co-occurring label (1-based)");
  sub.add_option("--p1", c.p1, "mass of sets holding both labels");
  sub.add_option("--p2", c.p2, "mass of sets holding the dominant label only");
  sub.add_option("--p3", c.p3, "mass of sets missing the dominant label");
}

}  // namespace detail

/// Full CLI entry point: parses `args` (without the program name), runs the
/// subcommand, reports errors on `err`, and returns the process exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto first = std::find_if(args.begin(), args.end(), [](const std::string& a) { return a.rfind('-', 0) != 0; });
  RunConfig c = defaults_for(first == args.end() ? std::string() : *first);
  if (const char* env = std::getenv("DSTPLL_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t pos = 0;
      c.seed = std::stoull(env, &pos);
      if (pos != std::string(env).size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      err << "error: DSTPLL_SEED is not an unsigned integer: " << env << '\n';
      return kUsage;
    }
  }
  try {
    if (auto path = detail::find_config_path(args)) {
      std::ifstream f(*path);
      if (!f) throw ConfigError("config file not found: " + *path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(f);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config file " + *path + " is not valid JSON: " + e.what());
      }
      apply_json(j, c);
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  CLI::App app{"Partial-label learning with evidence fusion over nearest neighbors", "dstpll"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<double> epsilon = c.epsilon;
  std::optional<std::size_t> num_labels = c.num_labels;

  auto* augment = app.add_subcommand("augment", "add false-positive candidate labels to a supervised CSV");
  detail::add_common(*augment, c, config_path);
  augment->add_option("-i,--input", c.input, "supervised input CSV");
  augment->add_option("--r", c.r, "false positives per affected row");
  augment->add_option("--p", c.p, "fraction of rows affected");
  augment->add_option("--epsilon", epsilon, "co-occurrence degree (r = 1 only)");
  augment->add_option("--num-labels", num_labels, "label count when the file does not reveal it");

  auto* bench = app.add_subcommand("benchmark", "k-fold evaluation of dst-pll and pl-knn");
  detail::add_common(*bench, c, config_path);
  bench->add_option("-i,--input", c.input, "partial-label CSV with ground truth");
  bench->add_option("--k", c.k, "neighbors per query");
  bench->add_option("--alpha", c.alpha, "mass a neighbor keeps on the query candidates");
  bench->add_option("--folds", c.folds, "cross-validation folds");
  bench->add_option("--betas", c.betas, "trade-off weights, comma separated")->delimiter(',');
  bench->add_option("--methods", c.methods, "dst-pll and/or pl-knn")->delimiter(',');
  bench->add_option("--case2-mode", c.case2_mode, "literal or smallest_focal");
  bench->add_option("--standardize", c.standardize, "z-score features with training-fold statistics");
  bench->add_option("--num-labels", num_labels, "label count when the file does not reveal it");

  auto* sim = app.add_subcommand("simulate", "closed-form vs simulated expected beliefs");
  detail::add_common(*sim, c, config_path);
  detail::add_model_flags(*sim, c);
  sim->add_option("--k-min", c.k_min, "smallest neighborhood size");
  sim->add_option("--k-max", c.k_max, "largest neighborhood size");
  sim->add_option("--trials", c.trials, "Monte-Carlo trials per k");

  auto* co = app.add_subcommand("cooccur", "neighborhood label co-occurrence counts");
  detail::add_common(*co, c, config_path);
  co->add_option("-i,--input", c.input, "partial-label CSV with ground truth");
  co->add_option("--k", c.k, "neighbors per instance");
  co->add_option("--num-labels", num_labels, "label count when the file does not reveal it");

  auto* risk = app.add_subcommand("risk-curve", "empirical 0-1 risk against training size");
  detail::add_common(*risk, c, config_path);
  detail::add_model_flags(*risk, c);
  risk->add_option("--k", c.k, "neighbors per query");
  risk->add_option("--n-grid", c.n_grid, "training sizes, comma separated")->delimiter(',');
  risk->add_option("--repetitions", c.repetitions, "independent draws per size");
  risk->add_option("--sigma", c.sigma, "cluster jitter");
  risk->add_option("--queries", c.queries, "test points per draw");

  auto* gen = app.add_subcommand("generate", "supervised Gaussian cluster data");
  detail::add_common(*gen, c, config_path);
  gen->add_option("--n", c.n, "rows");
  gen->add_option("--num-labels", num_labels, "classes");
  gen->add_option("--dim", c.dim, "features, at least the class count");
  gen->add_option("--separation", c.separation, "distance of each centre from the origin");
  gen->add_option("--sd", c.sd, "noise standard deviation");

  auto* check = app.add_subcommand("selfcheck", "exact-arithmetic verification of the closed form");
  detail::add_common(*check, c, config_path);
  check->add_option("--k-max", c.check_k_max, "largest k verified, at most 20");

  // CLI11 wants argv order reversed when given a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  c.command = app.get_subcommands().front()->get_name();
  c.epsilon = epsilon;
  c.num_labels = num_labels;

  try {
    validate(c);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  try {
    return execute(c, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace dstpll::cli
