#include "emshs/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "emshs/errors.hpp"

namespace emshs {

SparseGraph::SparseGraph(std::size_t p, std::vector<Edge> edges) : p_(p), degrees_(p, 0) {
  for (auto& e : edges) {
    if (e.from >= p || e.to >= p) {
      throw IndexError("edge (" + std::to_string(e.from) + ", " + std::to_string(e.to) +
                       ") references a node outside [0, " + std::to_string(p) + ")");
    }
    if (e.from == e.to) {
      throw FormatError("self-loop on node " + std::to_string(e.from));
    }
    if (e.from > e.to) std::swap(e.from, e.to);
  }
  std::sort(edges.begin(), edges.end());
  auto last = std::unique(edges.begin(), edges.end());
  duplicates_ = static_cast<std::size_t>(std::distance(last, edges.end()));
  edges.erase(last, edges.end());
  edges_ = std::move(edges);

  for (const auto& e : edges_) {
    ++degrees_[e.from];
    ++degrees_[e.to];
  }
  offsets_.assign(p_ + 1, 0);
  for (std::size_t v = 0; v < p_; ++v) offsets_[v + 1] = offsets_[v] + degrees_[v];
  adjacency_.resize(2 * edges_.size());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    adjacency_[fill[edges_[e].from]++] = {edges_[e].to, e};
    adjacency_[fill[edges_[e].to]++] = {edges_[e].from, e};
  }
  // has_edge() binary-searches each row.
  for (std::size_t v = 0; v < p_; ++v) {
    std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1],
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
}

std::size_t SparseGraph::max_degree() const {
  return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

bool SparseGraph::has_edge(std::size_t j, std::size_t k) const {
  if (j >= p_ || k >= p_) return false;
  auto row = neighbors(j);
  return std::binary_search(row.begin(), row.end(), Neighbor{k, 0},
                            [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  auto is_sep = [](char c) { return c == ' ' || c == '\t' || c == ',' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

long long parse_node_id(std::string_view tok, std::size_t line_no) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw FormatError("line " + std::to_string(line_no) + ": unparseable node id '" +
                      std::string(tok) + "'");
  }
  return v;
}

}  // namespace

SparseGraph load_edge_list(std::string_view text, std::size_t p) {
  std::vector<Edge> edges;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    auto tokens = split_tokens(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 2) {
      throw FormatError("line " + std::to_string(line_no) + ": expected two node ids, got " +
                        std::to_string(tokens.size()) + " tokens");
    }
    long long a = parse_node_id(tokens[0], line_no);
    long long b = parse_node_id(tokens[1], line_no);
    for (long long id : {a, b}) {
      if (id < 1 || id > static_cast<long long>(p)) {
        throw IndexError("line " + std::to_string(line_no) + ": node id " + std::to_string(id) +
                         " outside [1, " + std::to_string(p) + "]");
      }
    }
    if (a == b) {
      throw FormatError("line " + std::to_string(line_no) + ": self-loop on node " +
                        std::to_string(a));
    }
    edges.push_back({static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)});
  }
  SparseGraph g(p, std::move(edges));
  if (g.duplicates_merged() > 0) {
    spdlog::warn("edge list: merged {} duplicate edge(s)", g.duplicates_merged());
  }
  return g;
}

SparseGraph read_edge_list_file(const std::string& path, std::size_t p) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open edge list '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_edge_list(buf.str(), p);
}

std::string format_edge_list(const SparseGraph& g) {
  std::string out;
  out.reserve(g.num_edges() * 12);
  for (const auto& e : g.edges()) {
    out += std::to_string(e.from + 1);
    out += ' ';
    out += std::to_string(e.to + 1);
    out += '\n';
  }
  return out;
}

namespace {

void check_dims(const SparseGraph& g, const EdgeWeights& w, Eigen::Index len) {
  if (w.size() != g.num_edges()) {
    throw DimensionError("edge weights have length " + std::to_string(w.size()) + ", graph has " +
                         std::to_string(g.num_edges()) + " edges");
  }
  if (static_cast<std::size_t>(len) != g.num_nodes()) {
    throw DimensionError("vector has length " + std::to_string(len) + ", graph has " +
                         std::to_string(g.num_nodes()) + " nodes");
  }
}

}  // namespace

Eigen::VectorXd omega_apply(const SparseGraph& g, const EdgeWeights& w, const Eigen::VectorXd& v) {
  check_dims(g, w, v.size());
  Eigen::VectorXd out = v;
  auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto j = static_cast<Eigen::Index>(edges[e].from);
    const auto k = static_cast<Eigen::Index>(edges[e].to);
    const double diff = w[e] * (v[j] - v[k]);
    out[j] += diff;
    out[k] -= diff;
  }
  return out;
}

double omega_quadratic_form(const SparseGraph& g, const EdgeWeights& w, const Eigen::VectorXd& a,
                            const Eigen::VectorXd& m) {
  check_dims(g, w, a.size());
  if (m.size() != a.size()) throw DimensionError("mean vector length mismatch");
  const Eigen::VectorXd d = a - m;
  double total = d.squaredNorm();
  auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double gap = d[static_cast<Eigen::Index>(edges[e].from)] -
                       d[static_cast<Eigen::Index>(edges[e].to)];
    total += w[e] * gap * gap;
  }
  return total;
}

Eigen::VectorXd omega_diagonal(const SparseGraph& g, const EdgeWeights& w) {
  check_dims(g, w, static_cast<Eigen::Index>(g.num_nodes()));
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(g.num_nodes()));
  auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    diag[static_cast<Eigen::Index>(edges[e].from)] += w[e];
    diag[static_cast<Eigen::Index>(edges[e].to)] += w[e];
  }
  return diag;
}

Eigen::MatrixXd omega_dense(const SparseGraph& g, const EdgeWeights& w) {
  check_dims(g, w, static_cast<Eigen::Index>(g.num_nodes()));
  const auto p = static_cast<Eigen::Index>(g.num_nodes());
  Eigen::MatrixXd omega = Eigen::MatrixXd::Identity(p, p);
  auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto j = static_cast<Eigen::Index>(edges[e].from);
    const auto k = static_cast<Eigen::Index>(edges[e].to);
    omega(j, j) += w[e];
    omega(k, k) += w[e];
    omega(j, k) -= w[e];
    omega(k, j) -= w[e];
  }
  return omega;
}

}  // namespace emshs
