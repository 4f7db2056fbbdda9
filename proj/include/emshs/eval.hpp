#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "emshs/dataset.hpp"
#include "emshs/em.hpp"
#include "emshs/graph.hpp"
#include "emshs/simgen.hpp"

namespace emshs {

/// 20 equally spaced values from 3.5 to 7.5.
std::vector<double> default_mu_grid();
/// 20 equally spaced values from 5.5 to 6.5.
std::vector<double> narrow_mu_grid();
std::vector<double> linspace(double lo, double hi, std::size_t count);

struct GridPoint {
  double mu = 0.0;
  double mspe = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t selected = 0;
  double wall_time = 0.0;
};

struct TuningResult {
  std::vector<double> mu_grid;
  std::vector<GridPoint> per_mu;
  double best_mu = 0.0;
  FitResult best_fit;
};

struct TuningOptions {
  /// Start each grid point from the previous point's solution instead of the
  /// default initialization. Off by default: the posterior is multimodal and a
  /// warm chain tends to stay in the mode found at the first grid value.
  bool warm_start = false;
};

double mean_squared_error(const Eigen::VectorXd& predicted, const Eigen::VectorXd& observed);

/**
 * Fits every grid value of mu on `train` (ascending order) and keeps the one
 * with the smallest MSPE on `valid`. Ties go to the larger mu. Throws
 * NonConvergenceError when no grid point converged.
 */
TuningResult tune_over_mu(const Dataset& train, const Observations& valid, const SparseGraph& g,
                          const Hyperparameters& base, const std::vector<double>& grid,
                          const TuningOptions& opts = {});

/// Random k-fold partition of n rows: fold id per row.
std::vector<std::size_t> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

/// k-fold CV over the grid with per-fold standardization, then a refit on all
/// rows at the selected mu. per_mu[i].mspe is the fold-averaged MSPE.
TuningResult cross_validate(const Observations& data, const SparseGraph& g,
                            const Hyperparameters& base, const std::vector<double>& grid,
                            std::size_t k, std::uint64_t seed, const TuningOptions& opts = {});
TuningResult cross_validate(const Observations& data, const SparseGraph& g,
                            const Hyperparameters& base, const std::vector<double>& grid,
                            const std::vector<std::size_t>& folds, const TuningOptions& opts = {});

struct Metrics {
  double mspe = 0.0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

Metrics compute_metrics(const FitResult& fit, const std::vector<std::size_t>& truth_support,
                        const Observations& test);

enum class Method { emshs, emsh, lasso_baseline };
std::string method_name(Method m);
Method parse_method(const std::string& name);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

struct MethodSummary {
  Method method = Method::emshs;
  Estimate mspe;
  Estimate fp;
  Estimate fn;
  /// Mean wall time per tuning value, seconds.
  double time_per_value = 0.0;
  std::size_t replicates = 0;
  std::size_t failures = 0;
};

struct ReplicateRecord {
  std::size_t replicate = 0;
  Method method = Method::emshs;
  bool ok = false;
  std::string failure;
  Metrics metrics;
  double best_mu = 0.0;
  double time_per_value = 0.0;
};

struct BenchmarkSummary {
  ScenarioSpec spec;
  std::size_t replicates = 0;
  std::vector<MethodSummary> methods;
  std::vector<ReplicateRecord> records;
};

struct BenchmarkOptions {
  std::vector<Method> methods{Method::emshs, Method::emsh, Method::lasso_baseline};
  std::size_t replicates = 2;
  std::vector<double> grid = default_mu_grid();
  Hyperparameters base;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  TuningOptions tuning;
};

/// Seed of replicate r of a benchmark seeded with `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);

/// Generates truth and splits per replicate, tunes every method on
/// train/valid, scores on test. Replicates run on `workers` threads and are
/// reduced in replicate order.
BenchmarkSummary run_benchmark(const ScenarioSpec& spec, const BenchmarkOptions& opts);

/// Hyperparameters and working graph a method uses on a given truth.
Hyperparameters method_hyperparameters(Method m, const Hyperparameters& base);
SparseGraph method_graph(Method m, const SparseGraph& working);

/// Column layout: Method | MSPE | FP | FN | Time, standard errors in parentheses.
/// Time is seconds per tuning value; without `with_timing` it prints as "-" so
/// the table is reproducible byte for byte.
std::string format_summary_table(const BenchmarkSummary& summary, bool with_timing = true);

}  // namespace emshs
