#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace emshs {

/// Undirected edge with `from < to`, 0-based.
struct Edge {
  std::size_t from;
  std::size_t to;

  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Entry of a node's adjacency row: the neighbouring node and the index of
/// the connecting edge in `SparseGraph::edges()`.
struct Neighbor {
  std::size_t node;
  std::size_t edge;
};

/**
 * Known covariate graph over `p` nodes.
 *
 * Edges are kept as a sorted unique list plus CSR-style adjacency offsets so
 * that every Laplacian product touches each edge twice and nothing else.
 * Immutable after construction.
 */
class SparseGraph {
 public:
  SparseGraph() = default;

  /// Validates, canonicalizes (`from < to`) and deduplicates `edges`.
  /// Throws IndexError for ids >= p and FormatError for self-loops.
  SparseGraph(std::size_t p, std::vector<Edge> edges);

  /// Graph with `p` nodes and no edges.
  static SparseGraph empty(std::size_t p) { return SparseGraph(p, {}); }

  std::size_t num_nodes() const { return p_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const std::size_t> degrees() const { return degrees_; }
  std::size_t degree(std::size_t v) const { return degrees_[v]; }
  std::size_t max_degree() const;
  std::span<const Neighbor> neighbors(std::size_t v) const {
    return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
  }
  bool has_edge(std::size_t j, std::size_t k) const;

  /// Number of duplicate edges dropped at construction.
  std::size_t duplicates_merged() const { return duplicates_; }

 private:
  std::size_t p_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> degrees_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adjacency_;
  std::size_t duplicates_ = 0;
};

/// Per-edge precision weights, aligned with `SparseGraph::edges()`.
struct EdgeWeights {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t e) const { return values[e]; }
};

/// Parses a 1-based edge list ("j k" or "j,k" per line, '#' comments).
SparseGraph load_edge_list(std::string_view text, std::size_t p);
SparseGraph read_edge_list_file(const std::string& path, std::size_t p);
/// 1-based text form accepted by load_edge_list.
std::string format_edge_list(const SparseGraph& g);

/// Omega * v, where Omega = I + graph Laplacian weighted by `w`.
Eigen::VectorXd omega_apply(const SparseGraph& g, const EdgeWeights& w, const Eigen::VectorXd& v);

/// (a - m)' Omega (a - m) = sum_j d_j^2 + sum_{edges} w_jk (d_j - d_k)^2 with d = a - m.
/// For a constant m the edge term reduces to w_jk (a_j - a_k)^2.
double omega_quadratic_form(const SparseGraph& g, const EdgeWeights& w, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& m);

/// diag(Omega) = 1 + weighted degree.
Eigen::VectorXd omega_diagonal(const SparseGraph& g, const EdgeWeights& w);

/// Dense Omega; only for small p (dense Newton steps and tests).
Eigen::MatrixXd omega_dense(const SparseGraph& g, const EdgeWeights& w);

}  // namespace emshs
