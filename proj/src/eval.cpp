#include "emshs/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include "emshs/errors.hpp"
#include "emshs/rng.hpp"

namespace emshs {

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  return out;
}

std::vector<double> default_mu_grid() { return linspace(3.5, 7.5, 20); }
std::vector<double> narrow_mu_grid() { return linspace(5.5, 6.5, 20); }

double mean_squared_error(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed) {
  if (predicted.size() != observed.size() || observed.size() == 0) {
    throw DimensionError("prediction and response lengths differ or are empty");
  }
  return (predicted - observed).squaredNorm() / static_cast<double>(observed.size());
}

namespace {

struct PathPoint {
  GridPoint summary;
  FitResult fit;
  bool ok = false;
  std::string failure;
};

std::vector<double> sorted_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw ConfigError("mu grid must be nonempty");
  std::vector<double> out = grid;
  std::sort(out.begin(), out.end());
  return out;
}

// Fits the whole grid on `train`, scoring each point on `holdout`.
std::vector<PathPoint> fit_path(const Dataset& train, const Observations& holdout,
                                const SparseGraph& g, const Hyperparameters& base,
                                const std::vector<double>& grid, const TuningOptions& opts) {
  std::vector<PathPoint> path(grid.size());
  const FitResult* previous = nullptr;
  double previous_mu = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    Hyperparameters h = base;
    h.set_mu(grid[i]);
    PathPoint& point = path[i];
    point.summary.mu = grid[i];
    try {
      if (opts.warm_start && previous != nullptr) {
        EmState warm = state_from_fit(*previous);
        warm.alpha.array() += grid[i] - previous_mu;
        point.fit = fit(train, g, h, &warm);
      } else {
        point.fit = fit(train, g, h);
      }
      point.ok = true;
      point.summary.mspe = mean_squared_error(predict(point.fit, holdout.x), holdout.y);
      point.summary.converged = point.fit.converged;
      point.summary.iterations = point.fit.iterations;
      point.summary.selected = point.fit.selected.size();
      point.summary.wall_time = point.fit.wall_time;
      previous = &point.fit;
      previous_mu = grid[i];
    } catch (const NonConvergenceError& e) {
      point.failure = e.what();
      point.summary.mspe = std::numeric_limits<double>::infinity();
    }
  }
  return path;
}

std::size_t select_best(const std::vector<GridPoint>& points) {
  std::size_t best = points.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].converged) continue;
    if (best == points.size() || points[i].mspe <= points[best].mspe) best = i;
  }
  if (best == points.size()) {
    std::ostringstream msg;
    msg << "no grid point converged:";
    for (const auto& pt : points) msg << " mu=" << pt.mu << (pt.converged ? "(ok)" : "(failed)");
    throw NonConvergenceError(msg.str());
  }
  return best;
}

}  // namespace

TuningResult tune_over_mu(const Dataset& train, const Observations& valid, const SparseGraph& g,
                          const Hyperparameters& base, const std::vector<double>& grid,
                          const TuningOptions& opts) {
  TuningResult result;
  result.mu_grid = sorted_grid(grid);
  auto path = fit_path(train, valid, g, base, result.mu_grid, opts);
  for (const auto& pt : path) result.per_mu.push_back(pt.summary);
  const std::size_t best = select_best(result.per_mu);
  result.best_mu = result.mu_grid[best];
  result.best_fit = std::move(path[best].fit);
  return result;
}

std::vector<std::size_t> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2 || n < k) throw ConfigError("cross-validation needs 2 <= k <= n");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_engine(seed, Stream::folds);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> folds(n);
  for (std::size_t i = 0; i < n; ++i) folds[order[i]] = i % k;
  return folds;
}

TuningResult cross_validate(const Observations& data, const SparseGraph& g,
                            const Hyperparameters& base, const std::vector<double>& grid,
                            std::size_t k, std::uint64_t seed, const TuningOptions& opts) {
  return cross_validate(data, g, base, grid, make_folds(static_cast<std::size_t>(data.n()), k, seed),
                        opts);
}

TuningResult cross_validate(const Observations& data, const SparseGraph& g,
                            const Hyperparameters& base, const std::vector<double>& grid,
                            const std::vector<std::size_t>& folds, const TuningOptions& opts) {
  if (folds.size() != static_cast<std::size_t>(data.n())) {
    throw DimensionError("fold assignment length differs from the number of rows");
  }
  const std::size_t k = *std::max_element(folds.begin(), folds.end()) + 1;
  if (k < 2) throw ConfigError("cross-validation needs at least two folds");

  TuningResult result;
  result.mu_grid = sorted_grid(grid);
  const std::size_t m = result.mu_grid.size();
  result.per_mu.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    result.per_mu[i].mu = result.mu_grid[i];
    result.per_mu[i].converged = true;
  }

  for (std::size_t f = 0; f < k; ++f) {
    std::vector<Eigen::Index> train_rows, test_rows;
    for (std::size_t i = 0; i < folds.size(); ++i) {
      (folds[i] == f ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(i));
    }
    if (test_rows.empty()) throw ConfigError("fold " + std::to_string(f) + " is empty");
    const Dataset train = Dataset::standardize(data.subset(train_rows));
    const Observations holdout = data.subset(test_rows);
    auto path = fit_path(train, holdout, g, base, result.mu_grid, opts);
    for (std::size_t i = 0; i < m; ++i) {
      auto& agg = result.per_mu[i];
      agg.mspe += path[i].summary.mspe / static_cast<double>(k);
      agg.converged = agg.converged && path[i].summary.converged;
      agg.iterations += path[i].summary.iterations;
      agg.wall_time += path[i].summary.wall_time;
    }
  }

  const std::size_t best = select_best(result.per_mu);
  result.best_mu = result.mu_grid[best];
  Hyperparameters h = base;
  h.set_mu(result.best_mu);
  result.best_fit = fit(Dataset::standardize(data), g, h);
  return result;
}

Metrics compute_metrics(const FitResult& fit, const std::vector<std::size_t>& truth_support,
                        const Observations& test) {
  if (test.n() == 0) throw DataError("test set is empty");
  Metrics m;
  m.mspe = mean_squared_error(predict(fit, test.x), test.y);
  std::vector<std::size_t> truth = truth_support;
  std::sort(truth.begin(), truth.end());
  for (std::size_t j : fit.selected) {
    if (!std::binary_search(truth.begin(), truth.end(), j)) ++m.fp;
  }
  for (std::size_t j : truth) {
    if (!std::binary_search(fit.selected.begin(), fit.selected.end(), j)) ++m.fn;
  }
  return m;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::emshs:
      return "EMSHS";
    case Method::emsh:
      return "EMSH";
    case Method::lasso_baseline:
      return "lasso-baseline";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  std::string lower;
  for (char c : name) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "emshs") return Method::emshs;
  if (lower == "emsh") return Method::emsh;
  if (lower == "lasso-baseline" || lower == "lasso") return Method::lasso_baseline;
  throw ConfigError("unknown method '" + name + "'");
}

Hyperparameters method_hyperparameters(Method m, const Hyperparameters& base) {
  Hyperparameters h = base;
  if (m == Method::lasso_baseline) h.nu = 1e-6;
  return h;
}

SparseGraph method_graph(Method m, const SparseGraph& working) {
  if (m == Method::emshs) return working;
  return SparseGraph::empty(working.num_nodes());
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) {
  auto rng = make_engine(seed, Stream::replicate, r);
  return rng();
}

namespace {

bool passes_verification(const FitResult& fit, const Dataset& train, std::string& why) {
  for (std::size_t t = 1; t < fit.trace.size(); ++t) {
    const double before = fit.trace[t - 1].logpost;
    if (fit.trace[t].logpost < before - 1e-8 * (1.0 + std::abs(before))) {
      why = "log posterior decreased at iteration " + std::to_string(t);
      return false;
    }
  }
  const KktReport kkt = check_kkt(train, fit.beta, fit.final_penalty, 1e-6);
  if (!kkt.pass) {
    why = "KKT violation " + std::to_string(kkt.max_violation);
    return false;
  }
  return true;
}

std::vector<ReplicateRecord> run_replicate(const ScenarioSpec& spec, const BenchmarkOptions& opts,
                                           std::size_t r) {
  std::vector<ReplicateRecord> out;
  for (Method m : opts.methods) {
    ReplicateRecord rec;
    rec.replicate = r;
    rec.method = m;
    out.push_back(rec);
  }
  try {
    ScenarioSpec local = spec;
    local.seed = replicate_seed(opts.seed, r);
    const SyntheticTruth truth = build_truth(local);
    const Splits splits = sample_dataset(truth, local, local.seed);
    const Dataset train = Dataset::standardize(splits.train);
    const auto support = truth.support();
    for (auto& rec : out) {
      try {
        const Hyperparameters h = method_hyperparameters(rec.method, opts.base);
        const SparseGraph g = method_graph(rec.method, truth.working_graph);
        TuningResult tuned = tune_over_mu(train, splits.valid, g, h, opts.grid, opts.tuning);
        double total_time = 0.0;
        for (const auto& pt : tuned.per_mu) total_time += pt.wall_time;
        rec.time_per_value = total_time / static_cast<double>(tuned.per_mu.size());
        rec.best_mu = tuned.best_mu;
        if (!passes_verification(tuned.best_fit, train, rec.failure)) continue;
        rec.metrics = compute_metrics(tuned.best_fit, support, splits.test);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.failure = e.what();
      }
    }
  } catch (const std::exception& e) {
    for (auto& rec : out) rec.failure = e.what();
  }
  return out;
}

Estimate estimate_of(const std::vector<double>& values) {
  Estimate est;
  if (values.empty()) return est;
  const double count = static_cast<double>(values.size());
  est.mean = std::accumulate(values.begin(), values.end(), 0.0) / count;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.se = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
  }
  return est;
}

}  // namespace

BenchmarkSummary run_benchmark(const ScenarioSpec& spec, const BenchmarkOptions& opts) {
  spec.validate();
  if (opts.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (opts.methods.empty()) throw ConfigError("at least one method is required");

  std::vector<std::vector<ReplicateRecord>> per_replicate(opts.replicates);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t r = next++; r < opts.replicates; r = next++) {
      per_replicate[r] = run_replicate(spec, opts, r);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(opts.workers, 1, opts.replicates);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  BenchmarkSummary summary;
  summary.spec = spec;
  summary.replicates = opts.replicates;
  for (auto& recs : per_replicate) {
    for (auto& rec : recs) summary.records.push_back(std::move(rec));
  }
  for (Method m : opts.methods) {
    MethodSummary ms;
    ms.method = m;
    std::vector<double> mspe, fp, fn, time;
    for (const auto& rec : summary.records) {
      if (rec.method != m) continue;
      if (!rec.ok) {
        ++ms.failures;
        continue;
      }
      mspe.push_back(rec.metrics.mspe);
      fp.push_back(static_cast<double>(rec.metrics.fp));
      fn.push_back(static_cast<double>(rec.metrics.fn));
      time.push_back(rec.time_per_value);
    }
    ms.replicates = mspe.size();
    ms.mspe = estimate_of(mspe);
    ms.fp = estimate_of(fp);
    ms.fn = estimate_of(fn);
    ms.time_per_value = estimate_of(time).mean;
    summary.methods.push_back(ms);
  }
  return summary;
}

std::string format_summary_table(const BenchmarkSummary& summary, bool with_timing) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "Scenario #" << summary.spec.scenario << ", p=" << summary.spec.p << ", n=" << summary.spec.n
      << ", replicates=" << summary.replicates << "\n";
  out << std::left << std::setw(16) << "Method" << std::right << std::setw(16) << "MSPE"
      << std::setw(16) << "FP" << std::setw(16) << "FN" << std::setw(10) << "Time" << "\n";
  auto cell = [](const Estimate& e) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(2) << e.mean << " (" << e.se << ")";
    return c.str();
  };
  for (const auto& m : summary.methods) {
    out << std::left << std::setw(16) << method_name(m.method) << std::right << std::setw(16)
        << cell(m.mspe) << std::setw(16) << cell(m.fp) << std::setw(16) << cell(m.fn)
        << std::setw(10);
    if (with_timing) {
      out << std::setprecision(4) << m.time_per_value << std::setprecision(2);
    } else {
      out << "-";
    }
    if (m.failures > 0) out << "  [" << m.failures << " failed]";
    out << "\n";
  }
  return out.str();
}

}  // namespace emshs
