#pragma once

// Small random problems shared by the unit and acceptance tests.

#include <random>

#include <Eigen/Dense>

#include "emshs/dataset.hpp"
#include "emshs/graph.hpp"
#include "oracles.hpp"

namespace fixtures {

inline emshs::SparseGraph to_graph(int p, const oracle::EdgeList& edges) {
  std::vector<emshs::Edge> out;
  for (const auto& [j, k] : edges) out.push_back({static_cast<std::size_t>(j), static_cast<std::size_t>(k)});
  return emshs::SparseGraph(static_cast<std::size_t>(p), std::move(out));
}

inline oracle::EdgeList to_edge_list(const emshs::SparseGraph& g) {
  oracle::EdgeList out;
  for (const auto& e : g.edges()) out.emplace_back(static_cast<int>(e.from), static_cast<int>(e.to));
  return out;
}

/// Gaussian design with a sparse signal on the first `k` columns.
inline emshs::Observations regression(int n, int p, int k, double signal, double noise,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  emshs::Observations obs;
  obs.x.resize(n, p);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) obs.x(i, j) = z(rng);
  }
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < std::min(k, p); ++j) beta[j] = signal * (j % 2 ? -1.0 : 1.0);
  obs.y = obs.x * beta;
  for (int i = 0; i < n; ++i) obs.y[i] += noise * z(rng);
  return obs;
}

}  // namespace fixtures
