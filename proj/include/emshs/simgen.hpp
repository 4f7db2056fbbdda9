#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "emshs/dataset.hpp"
#include "emshs/graph.hpp"

namespace emshs {

/**
 * Synthetic pathway benchmark design.
 *
 * The first `p - independent_tail` variables carry the pathway graph and the
 * correlated design; the tail is independent standard normal. Scenarios:
 *   1  working graph = true graph
 *   2  as 1, but no true edges between important and unimportant variables
 *   3  true graph as in 1, working graph random with the same edge count
 *   4  true graph as in 2, working graph random with the same edge count
 *   5  true graph as in 1, working graph keeps edges with partial correlation > 0.5
 */
struct ScenarioSpec {
  std::size_t p = 1000;
  std::size_t n = 50;
  std::size_t q = 5;
  std::size_t g_pathways = 50;
  double mu_path = 30.0;
  /// Gamma-Poisson dispersion of pathway sizes (variance = mean + mean^2 / dispersion).
  double nb_dispersion = 10.0;
  double p1 = 0.05;
  int scenario = 1;
  std::size_t independent_tail = 0;
  double sigma_eps = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t structured() const { return p - independent_tail; }
};

/**
 * Distribution of the structured block, kept in precision form:
 * A = I + off-diagonal edge entries, Sigma_X = D A^{-1} D with D chosen so
 * that diag(Sigma_X) = 1. Sampling uses x = D L^{-T} e with A = L L'.
 */
struct CovarianceModel {
  std::size_t structured = 0;
  std::size_t tail = 0;
  /// A_jk and S_jk for every true-graph edge, in edge order.
  std::vector<double> edge_values;
  std::vector<int> signs;
  /// Lower Cholesky factor of A.
  Eigen::MatrixXd precision_chol;
  /// D = diag(A^{-1})^{-1/2}.
  Eigen::VectorXd scale;

  /// Dense Sigma_X of the structured block.
  Eigen::MatrixXd covariance() const;
  /// Lower Cholesky factor of covariance().
  Eigen::MatrixXd sigma_cholesky() const;
  /// Partial correlation of true edge e, -A_jk / sqrt(A_jj A_kk).
  double partial_correlation(std::size_t e) const { return -edge_values[e]; }
};

struct SyntheticTruth {
  Eigen::VectorXd beta0;
  SparseGraph g0;
  CovarianceModel covariance;
  SparseGraph working_graph;
  int scenario = 1;

  /// Indices of the nonzero true coefficients.
  std::vector<std::size_t> support() const;
};

struct Splits {
  Observations train;
  Observations valid;
  Observations test;
};

struct PathwayLayout {
  SparseGraph graph;
  /// Members of each pathway; pathway 0 is the important variables.
  std::vector<std::vector<std::size_t>> pathways;
};

PathwayLayout generate_pathways(const ScenarioSpec& spec);
SparseGraph generate_pathway_graph(const ScenarioSpec& spec);

/// Dense construction for the first `structured` nodes of g0 (all of them by default).
CovarianceModel build_covariance(const SparseGraph& g0, std::size_t q, std::uint64_t seed,
                                 std::size_t structured = 0);

SparseGraph derive_working_graph(const SparseGraph& g0, const CovarianceModel& cov, int scenario,
                                 std::uint64_t seed);

SyntheticTruth build_truth(const ScenarioSpec& spec);

Splits sample_dataset(const SyntheticTruth& truth, const ScenarioSpec& spec, std::uint64_t split_seed);

/// n rows drawn from the model with responses y = X beta0 + sigma_eps * noise.
Observations sample_observations(const SyntheticTruth& truth, const ScenarioSpec& spec,
                                 std::size_t n, std::uint64_t seed, std::uint64_t index);

}  // namespace emshs
