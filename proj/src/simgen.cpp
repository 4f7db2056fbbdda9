#include "emshs/simgen.hpp"

#include <algorithm>
#include <random>
#include <string>
#include <unordered_set>

#include "emshs/errors.hpp"
#include "emshs/rng.hpp"

namespace emshs {

void ScenarioSpec::validate() const {
  if (p == 0 || n == 0) throw ConfigError("p and n must be positive");
  if (independent_tail >= p) throw ConfigError("independent_tail must be < p");
  if (q > structured()) throw ConfigError("q must not exceed the structured block size");
  if (scenario < 1 || scenario > 5) throw ConfigError("scenario must be in 1..5");
  if (p1 < 0.0 || p1 > 1.0) throw ConfigError("p1 must lie in [0, 1]");
  if (mu_path < 2.0) throw ConfigError("mu_path must be >= 2");
  if (!(nb_dispersion > 0.0)) throw ConfigError("nb_dispersion must be > 0");
  if (g_pathways == 0) throw ConfigError("g_pathways must be >= 1");
  if (!(sigma_eps >= 0.0)) throw ConfigError("sigma_eps must be >= 0");
}

std::vector<std::size_t> SyntheticTruth::support() const {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < beta0.size(); ++j) {
    if (beta0[j] != 0.0) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

namespace {

std::uint64_t pair_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

// Connects `members` by a random tree, then adds each remaining pair with probability p1.
void connect_pathway(const std::vector<std::size_t>& members, double p1, std::mt19937_64& rng,
                     std::vector<Edge>& edges) {
  const std::size_t m = members.size();
  if (m < 2) return;
  std::unordered_set<std::uint64_t> local;
  std::vector<std::size_t> unconnected = members;
  std::vector<std::size_t> connected;
  connected.reserve(m);

  auto take = [&](std::size_t pos) {
    const std::size_t node = unconnected[pos];
    unconnected[pos] = unconnected.back();
    unconnected.pop_back();
    return node;
  };
  auto add = [&](std::size_t a, std::size_t b) {
    edges.push_back({std::min(a, b), std::max(a, b)});
    local.insert(pair_key(a, b));
  };

  const std::size_t first = take(std::uniform_int_distribution<std::size_t>(0, m - 1)(rng));
  const std::size_t second =
      take(std::uniform_int_distribution<std::size_t>(0, unconnected.size() - 1)(rng));
  add(first, second);
  connected.push_back(first);
  connected.push_back(second);
  while (!unconnected.empty()) {
    const std::size_t from =
        connected[std::uniform_int_distribution<std::size_t>(0, connected.size() - 1)(rng)];
    const std::size_t to = take(std::uniform_int_distribution<std::size_t>(0, unconnected.size() - 1)(rng));
    add(from, to);
    connected.push_back(to);
  }

  if (p1 <= 0.0) return;
  std::bernoulli_distribution extra(p1);
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      if (local.contains(pair_key(members[a], members[b]))) continue;
      if (extra(rng)) add(members[a], members[b]);
    }
  }
}

std::vector<std::size_t> draw_members(const std::vector<std::size_t>& pool, std::size_t size,
                                      std::mt19937_64& rng) {
  std::vector<std::size_t> scratch = pool;
  size = std::min(size, scratch.size());
  for (std::size_t i = 0; i < size; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, scratch.size() - 1);
    std::swap(scratch[i], scratch[pick(rng)]);
  }
  scratch.resize(size);
  return scratch;
}

}  // namespace

PathwayLayout generate_pathways(const ScenarioSpec& spec) {
  spec.validate();
  auto rng = make_engine(spec.seed, Stream::graph);
  const std::size_t m = spec.structured();
  const bool isolate_important = spec.scenario == 2 || spec.scenario == 4;

  std::vector<std::size_t> pool;
  for (std::size_t v = isolate_important ? spec.q : 0; v < m; ++v) pool.push_back(v);

  PathwayLayout layout;
  std::vector<Edge> edges;
  std::vector<std::size_t> important(spec.q);
  for (std::size_t v = 0; v < spec.q; ++v) important[v] = v;
  connect_pathway(important, spec.p1, rng, edges);
  layout.pathways.push_back(std::move(important));

  // Pathway sizes: Poisson with a gamma-distributed mean (negative binomial).
  std::gamma_distribution<double> rate(spec.nb_dispersion, spec.mu_path / spec.nb_dispersion);
  for (std::size_t k = 1; k < spec.g_pathways; ++k) {
    std::poisson_distribution<std::size_t> count(rate(rng));
    const std::size_t size = std::max<std::size_t>(2, count(rng));
    auto members = draw_members(pool, size, rng);
    connect_pathway(members, spec.p1, rng, edges);
    layout.pathways.push_back(std::move(members));
  }
  layout.graph = SparseGraph(spec.p, std::move(edges));
  return layout;
}

SparseGraph generate_pathway_graph(const ScenarioSpec& spec) { return generate_pathways(spec).graph; }

CovarianceModel build_covariance(const SparseGraph& g0, std::size_t q, std::uint64_t seed,
                                 std::size_t structured) {
  const std::size_t m = structured == 0 ? g0.num_nodes() : structured;
  CovarianceModel cov;
  cov.structured = m;
  cov.tail = g0.num_nodes() - m;

  auto rng = make_engine(seed, Stream::sign);
  std::bernoulli_distribution coin(0.5);
  const auto dim = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim);
  auto edges = g0.edges();
  cov.edge_values.resize(edges.size());
  cov.signs.resize(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [j, k] = edges[e];
    if (k >= m) throw IndexError("true-graph edge leaves the structured block");
    const int s = (j < q && k < q) ? 1 : static_cast<int>(coin(rng));
    const double denom = static_cast<double>(std::max(g0.degree(j), g0.degree(k))) * 1.1 + 0.1;
    const double value = -static_cast<double>(s) / denom;
    cov.signs[e] = s;
    cov.edge_values[e] = value;
    a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = value;
    a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = value;
  }

  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(a);
  if (llt.info() != Eigen::Success) throw Error("Cholesky of the precision matrix failed");
  a.triangularView<Eigen::StrictlyUpper>().setZero();
  cov.precision_chol = std::move(a);

  // diag(A^{-1})_j = |L^{-1} e_j|^2, computed a block of columns at a time; D_j = diag(A^{-1})_j^{-1/2}.
  cov.scale.resize(dim);
  constexpr Eigen::Index kBlock = 256;
  for (Eigen::Index c0 = 0; c0 < dim; c0 += kBlock) {
    const Eigen::Index width = std::min(kBlock, dim - c0);
    const Eigen::Index rows = dim - c0;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(rows, width);
    block.topRows(width).setIdentity();
    cov.precision_chol.bottomRightCorner(rows, rows).triangularView<Eigen::Lower>().solveInPlace(block);
    cov.scale.segment(c0, width) = block.colwise().norm().transpose().cwiseInverse();
  }
  return cov;
}

Eigen::MatrixXd CovarianceModel::covariance() const {
  const auto dim = static_cast<Eigen::Index>(structured);
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(dim, dim);
  precision_chol.triangularView<Eigen::Lower>().solveInPlace(linv);
  Eigen::MatrixXd ainv = linv.transpose() * linv;
  return scale.asDiagonal() * ainv * scale.asDiagonal();
}

Eigen::MatrixXd CovarianceModel::sigma_cholesky() const {
  return covariance().llt().matrixL();
}

SparseGraph derive_working_graph(const SparseGraph& g0, const CovarianceModel& cov, int scenario,
                                 std::uint64_t seed) {
  switch (scenario) {
    case 1:
    case 2:
      return g0;
    case 3:
    case 4: {
      auto rng = make_engine(seed, Stream::working_graph);
      const std::size_t m = cov.structured;
      const std::size_t target = g0.num_edges();
      const std::size_t possible = m * (m - 1) / 2;
      if (target > possible) throw ConfigError("too many edges for a random working graph");
      std::uniform_int_distribution<std::size_t> node(0, m - 1);
      std::unordered_set<std::uint64_t> seen;
      std::vector<Edge> edges;
      edges.reserve(target);
      while (edges.size() < target) {
        const std::size_t a = node(rng);
        const std::size_t b = node(rng);
        if (a == b || !seen.insert(pair_key(a, b)).second) continue;
        edges.push_back({std::min(a, b), std::max(a, b)});
      }
      return SparseGraph(g0.num_nodes(), std::move(edges));
    }
    case 5: {
      std::vector<Edge> kept;
      auto edges = g0.edges();
      for (std::size_t e = 0; e < edges.size(); ++e) {
        if (cov.partial_correlation(e) > 0.5) kept.push_back(edges[e]);
      }
      return SparseGraph(g0.num_nodes(), std::move(kept));
    }
    default:
      throw ConfigError("scenario must be in 1..5");
  }
}

SyntheticTruth build_truth(const ScenarioSpec& spec) {
  spec.validate();
  SyntheticTruth truth;
  truth.scenario = spec.scenario;
  truth.g0 = generate_pathway_graph(spec);
  truth.covariance = build_covariance(truth.g0, spec.q, spec.seed, spec.structured());
  truth.working_graph = derive_working_graph(truth.g0, truth.covariance, spec.scenario, spec.seed);
  truth.beta0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.p));
  truth.beta0.head(static_cast<Eigen::Index>(spec.q)).setOnes();
  return truth;
}

Observations sample_observations(const SyntheticTruth& truth, const ScenarioSpec& spec,
                                 std::size_t n, std::uint64_t seed, std::uint64_t index) {
  auto rng = make_engine(seed, Stream::data, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto rows = static_cast<Eigen::Index>(n);
  const auto m = static_cast<Eigen::Index>(truth.covariance.structured);
  const auto p = static_cast<Eigen::Index>(spec.p);

  // Column-major draws: observation i uses column i of `white`.
  Eigen::MatrixXd white(m, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) white(j, i) = normal(rng);
  }
  truth.covariance.precision_chol.transpose().triangularView<Eigen::Upper>().solveInPlace(white);

  Observations obs;
  obs.x.resize(rows, p);
  obs.x.leftCols(m) = (truth.covariance.scale.asDiagonal() * white).transpose();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = m; j < p; ++j) obs.x(i, j) = normal(rng);
  }
  obs.y = obs.x * truth.beta0;
  for (Eigen::Index i = 0; i < rows; ++i) obs.y[i] += spec.sigma_eps * normal(rng);
  return obs;
}

Splits sample_dataset(const SyntheticTruth& truth, const ScenarioSpec& spec, std::uint64_t split_seed) {
  Splits s;
  s.train = sample_observations(truth, spec, spec.n, split_seed, 0);
  s.valid = sample_observations(truth, spec, spec.n, split_seed, 1);
  s.test = sample_observations(truth, spec, spec.n, split_seed, 2);
  return s;
}

}  // namespace emshs
