#include "emshs/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "emshs/errors.hpp"
#include "emshs/eval.hpp"
#include "emshs/graph.hpp"
#include "emshs/io.hpp"
#include "emshs/priors.hpp"
#include "emshs/simgen.hpp"

namespace emshs {

namespace {

void report(const std::string& kind, const std::string& message) {
  std::string line = message;
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::cerr << "emshs: error[" << kind << "]: " << line << std::endl;
}

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return parse_run_config(read_json_file(path));
}

std::vector<double> pick_grid(const RunConfig& cfg, const std::string& preset) {
  if (cfg.mu_grid) return *cfg.mu_grid;
  if (preset == "default") return default_mu_grid();
  if (preset == "narrow") return narrow_mu_grid();
  throw ConfigError("unknown grid preset '" + preset + "' (expected default or narrow)");
}

SparseGraph load_graph(const std::string& path, std::size_t p) {
  if (path.empty()) return SparseGraph::empty(p);
  return read_edge_list_file(path, p);
}

Observations load_observations(const std::string& x_path, const std::string& y_path) {
  Observations obs;
  obs.x = read_csv_file(x_path);
  obs.y = read_vector_file(y_path);
  if (obs.x.rows() != obs.y.size()) {
    throw DimensionError(x_path + " has " + std::to_string(obs.x.rows()) + " rows but " + y_path +
                         " has " + std::to_string(obs.y.size()));
  }
  return obs;
}

void write_split(const std::filesystem::path& dir, const std::string& name, const Observations& obs) {
  write_csv_file((dir / (name + "_X.csv")).string(), obs.x);
  write_csv_file((dir / (name + "_y.csv")).string(), obs.y);
}

struct Options {
  std::string spec, out, x, y, graph, config, xv, yv, fit, table, grid = "default", methods;
  std::optional<std::size_t> replicate, replicates, workers, cv;
  std::optional<std::uint64_t> seed;
  bool original_scale = false, with_timing = false, warm_start = false;
  double sigma = 1.0, lo = -3.0, hi = 3.0;
  std::size_t points = 301, samples = 100000;
};

int run_simulate(const Options& o) {
  ScenarioSpec spec = parse_scenario_spec(read_json_file(o.spec));
  if (o.replicate) spec.seed = replicate_seed(spec.seed, *o.replicate);
  const SyntheticTruth truth = build_truth(spec);
  const Splits splits = sample_dataset(truth, spec, spec.seed);
  const std::filesystem::path dir(o.out);
  std::filesystem::create_directories(dir);
  write_split(dir, "train", splits.train);
  write_split(dir, "valid", splits.valid);
  write_split(dir, "test", splits.test);
  write_text_file((dir / "working_graph.txt").string(), format_edge_list(truth.working_graph));
  write_text_file((dir / "true_graph.txt").string(), format_edge_list(truth.g0));
  write_json_file((dir / "truth.json").string(), truth_to_json(truth, spec));
  return kExitOk;
}

int run_fit(const Options& o) {
  const RunConfig cfg = load_config(o.config);
  const Observations obs = load_observations(o.x, o.y);
  const auto p = static_cast<std::size_t>(obs.p());
  cfg.hyper.validate(p);
  const SparseGraph g = load_graph(o.graph, p);
  const FitResult result = fit(Dataset::standardize(obs), g, cfg.hyper);
  write_json_file(o.out, fit_to_json(result, o.original_scale));
  if (!result.converged) {
    report("nonconvergence", "EM stopped after " + std::to_string(result.iterations) +
                                 " iterations without meeting epsilon_tol");
    return kExitNonConvergence;
  }
  return kExitOk;
}

int run_tune(const Options& o) {
  const RunConfig cfg = load_config(o.config);
  const Observations obs = load_observations(o.x, o.y);
  const auto p = static_cast<std::size_t>(obs.p());
  const SparseGraph g = load_graph(o.graph, p);
  const auto grid = pick_grid(cfg, o.grid);
  TuningOptions topt;
  topt.warm_start = o.warm_start;
  TuningResult result;
  if (o.cv) {
    if (!o.xv.empty() || !o.yv.empty()) throw ConfigError("--cv cannot be combined with --xv/--yv");
    result = cross_validate(obs, g, cfg.hyper, grid, *o.cv, o.seed.value_or(cfg.hyper.seed), topt);
  } else {
    if (o.xv.empty() || o.yv.empty()) throw ConfigError("tune needs --xv and --yv, or --cv k");
    const Observations valid = load_observations(o.xv, o.yv);
    if (valid.p() != obs.p()) throw DimensionError("validation X has a different column count");
    result = tune_over_mu(Dataset::standardize(obs), valid, g, cfg.hyper, grid, topt);
  }
  json doc = tuning_to_json(result);
  if (o.original_scale) doc["best_fit"] = fit_to_json(result.best_fit, true);
  write_json_file(o.out, doc);
  return kExitOk;
}

std::vector<Method> parse_methods(const std::string& list) {
  if (list.empty()) return BenchmarkOptions{}.methods;
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    const auto comma = list.find(',', start);
    const std::string item = list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(parse_method(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw ConfigError("--methods lists no method");
  return out;
}

int run_benchmark_cmd(const Options& o) {
  const ScenarioSpec spec = parse_scenario_spec(read_json_file(o.spec));
  const RunConfig cfg = load_config(o.config);
  BenchmarkOptions bopt;
  bopt.methods = parse_methods(o.methods);
  bopt.replicates = o.replicates.value_or(2);
  bopt.grid = pick_grid(cfg, o.grid);
  bopt.base = cfg.hyper;
  bopt.seed = o.seed.value_or(spec.seed);
  bopt.workers = o.workers.value_or(cfg.workers);
  bopt.tuning.warm_start = o.warm_start;
  const BenchmarkSummary summary = run_benchmark(spec, bopt);
  write_json_file(o.out, summary_to_json(summary, o.with_timing));
  const std::string table = format_summary_table(summary, o.with_timing);
  if (o.table.empty()) {
    std::cout << table;
  } else {
    write_text_file(o.table, table);
  }
  return kExitOk;
}

int run_predict(const Options& o) {
  const FitResult model = fit_from_json(read_json_file(o.fit));
  const Eigen::MatrixXd x = read_csv_file(o.x);
  write_csv_file(o.out, predict(model, x));
  return kExitOk;
}

int run_prior_plot(const Options& o) {
  const RunConfig cfg = load_config(o.config);
  if (cfg.hyper.mu.size() != 1) throw ConfigError("prior-plot needs a scalar mu");
  if (o.points < 2 || !(o.hi > o.lo)) throw ConfigError("prior-plot needs --points >= 2 and --hi > --lo");
  PriorConfig pc;
  pc.mu = cfg.hyper.mu.front();
  pc.nu = cfg.hyper.nu;
  pc.sigma = o.sigma;
  pc.a_omega = cfg.hyper.a_omega;
  pc.b_omega = cfg.hyper.b_omega;
  pc.validate();
  const auto grid = linspace(o.lo, o.hi, o.points);
  const auto density = marginal_beta_density_mc(pc, grid, o.samples, o.seed.value_or(cfg.hyper.seed));
  Eigen::MatrixXd table(static_cast<Eigen::Index>(grid.size()), 2);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    table(static_cast<Eigen::Index>(i), 0) = grid[i];
    table(static_cast<Eigen::Index>(i), 1) = density[i];
  }
  write_csv_file(o.out, table, {"beta", "density"});
  return kExitOk;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  if (!spdlog::get("emshs")) spdlog::set_default_logger(spdlog::stderr_logger_mt("emshs"));

  CLI::App app{"Graph-smoothed Laplace shrinkage regression"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic pathway instance");
  simulate->add_option("--spec", o.spec, "Scenario spec JSON")->required();
  simulate->add_option("--out", o.out, "Output directory")->required();
  simulate->add_option("--replicate", o.replicate, "Use the seed of this benchmark replicate");

  auto* fitc = app.add_subcommand("fit", "Fit at a single mu");
  fitc->add_option("--x", o.x, "Design CSV")->required();
  fitc->add_option("--y", o.y, "Response CSV")->required();
  fitc->add_option("--graph", o.graph, "Edge list (1-based)");
  fitc->add_option("--config", o.config, "Run config JSON");
  fitc->add_option("--out", o.out, "Fit JSON")->required();
  fitc->add_flag("--original-scale", o.original_scale, "Report beta on the input scale");

  auto* tune = app.add_subcommand("tune", "Select mu on validation data or by k-fold CV");
  tune->add_option("--x", o.x, "Training design CSV")->required();
  tune->add_option("--y", o.y, "Training response CSV")->required();
  tune->add_option("--xv", o.xv, "Validation design CSV");
  tune->add_option("--yv", o.yv, "Validation response CSV");
  tune->add_option("--cv", o.cv, "Number of folds")->check(CLI::PositiveNumber);
  tune->add_option("--seed", o.seed, "Fold seed");
  tune->add_option("--graph", o.graph, "Edge list (1-based)");
  tune->add_option("--config", o.config, "Run config JSON");
  tune->add_option("--grid", o.grid, "Grid preset when the config has no mu_grid: default|narrow");
  tune->add_flag("--warm-start", o.warm_start, "Start each grid point from the previous solution");
  tune->add_flag("--original-scale", o.original_scale, "Report beta on the input scale");
  tune->add_option("--out", o.out, "Tuning JSON")->required();

  auto* bench = app.add_subcommand("benchmark", "Multi-replicate simulation benchmark");
  bench->add_option("--spec", o.spec, "Scenario spec JSON")->required();
  bench->add_option("--replicates", o.replicates, "Replicates")->check(CLI::PositiveNumber);
  bench->add_option("--seed", o.seed, "Benchmark seed (default: spec seed)");
  bench->add_option("--workers", o.workers, "Parallel replicates")->check(CLI::PositiveNumber);
  bench->add_option("--config", o.config, "Run config JSON");
  bench->add_option("--methods", o.methods, "Comma list of EMSHS,EMSH,lasso-baseline");
  bench->add_option("--grid", o.grid, "Grid preset when the config has no mu_grid: default|narrow");
  bench->add_flag("--warm-start", o.warm_start, "Start each grid point from the previous solution");
  bench->add_option("--out", o.out, "Summary JSON")->required();
  bench->add_option("--table", o.table, "Text table path (default: stdout)");
  bench->add_flag("--with-timing", o.with_timing, "Include wall times in the JSON and the table");

  auto* pred = app.add_subcommand("predict", "Predict responses from a saved fit");
  pred->add_option("--fit", o.fit, "Fit JSON")->required();
  pred->add_option("--x", o.x, "Design CSV")->required();
  pred->add_option("--out", o.out, "Prediction CSV")->required();

  auto* prior = app.add_subcommand("prior-plot", "Marginal prior density of one coefficient");
  prior->add_option("--config", o.config, "Run config JSON (mu, nu)");
  prior->add_option("--out", o.out, "Density CSV")->required();
  prior->add_option("--sigma", o.sigma, "Noise scale")->check(CLI::PositiveNumber);
  prior->add_option("--lo", o.lo, "Grid minimum");
  prior->add_option("--hi", o.hi, "Grid maximum");
  prior->add_option("--points", o.points, "Grid size");
  prior->add_option("--samples", o.samples, "Monte Carlo samples");
  prior->add_option("--seed", o.seed, "Monte Carlo seed");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report("usage", e.what());
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(o);
    if (fitc->parsed()) return run_fit(o);
    if (tune->parsed()) return run_tune(o);
    if (bench->parsed()) return run_benchmark_cmd(o);
    if (pred->parsed()) return run_predict(o);
    if (prior->parsed()) return run_prior_plot(o);
  } catch (const ConfigError& e) {
    report("usage", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    report("data", e.what());
    return kExitData;
  } catch (const NonConvergenceError& e) {
    report("nonconvergence", e.what());
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    report("data", e.what());
    return kExitData;
  }
  report("usage", "no subcommand given");
  return kExitUsage;
}

}  // namespace emshs
