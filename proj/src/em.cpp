#include "emshs/em.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include <spdlog/spdlog.h>

#include "emshs/errors.hpp"

namespace emshs {

void Hyperparameters::validate(std::size_t p) const {
  if (mu.empty() || (mu.size() != 1 && mu.size() != p)) {
    throw ConfigError("mu must have length 1 or p = " + std::to_string(p));
  }
  for (double m : mu) {
    if (!std::isfinite(m)) throw ConfigError("mu must be finite");
  }
  if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
  if (!(a_omega > 0.0)) throw ConfigError("a_omega must be > 0");
  if (!(b_omega > 0.0)) throw ConfigError("b_omega must be > 0");
  if (!(a_sigma > 0.0)) throw ConfigError("a_sigma must be > 0");
  if (!(b_sigma > 0.0)) throw ConfigError("b_sigma must be > 0");
  if (!(epsilon_tol > 0.0)) throw ConfigError("epsilon_tol must be > 0");
  if (!(lasso_tol > 0.0)) throw ConfigError("lasso_tol must be > 0");
  if (max_iter < 1) throw ConfigError("max_iter must be >= 1");
  if (newton_inner < 1) throw ConfigError("newton_inner must be >= 1");
}

Eigen::VectorXd Hyperparameters::mu_vector(Eigen::Index p) const {
  if (mu.size() == 1) return Eigen::VectorXd::Constant(p, mu.front());
  return Eigen::Map<const Eigen::VectorXd>(mu.data(), static_cast<Eigen::Index>(mu.size()));
}

namespace {

constexpr double kLowerClamp = 40.0;
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 50;

double residual_sum_of_squares(const Dataset& data, const Eigen::VectorXd& beta) {
  Eigen::VectorXd r = data.y();
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) r.noalias() -= beta[j] * data.x().col(j);
  }
  return r.squaredNorm();
}

double c3_of(const Dataset& data, const Hyperparameters& h) {
  return static_cast<double>(data.n() + data.p()) + 2.0 * h.a_sigma + 2.0;
}

// Alpha block of -Q: F = d'Omega d / (2 nu) - 1'alpha + |beta|'e^alpha / sigma, d = alpha - mu.
struct AlphaObjective {
  const SparseGraph& graph;
  const EdgeWeights& omega;
  const Eigen::VectorXd& mu;
  Eigen::VectorXd abs_beta;
  double sigma;
  double nu;

  double value(const Eigen::VectorXd& alpha) const {
    return omega_quadratic_form(graph, omega, alpha, mu) / (2.0 * nu) - alpha.sum() +
           abs_beta.dot(alpha.array().exp().matrix()) / sigma;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& alpha) const {
    Eigen::VectorXd grad = omega_apply(graph, omega, alpha - mu) / nu;
    grad.array() += -1.0 + abs_beta.array() * alpha.array().exp() / sigma;
    return grad;
  }
};

}  // namespace

EdgeWeights e_step(const Eigen::VectorXd& alpha, const SparseGraph& g, const Hyperparameters& h) {
  const Eigen::VectorXd d = alpha - h.mu_vector(alpha.size());
  EdgeWeights w;
  w.values.resize(g.num_edges());
  const double two_nu = 2.0 * h.nu;
  auto edges = g.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const double gap = d[static_cast<Eigen::Index>(edges[e].from)] -
                       d[static_cast<Eigen::Index>(edges[e].to)];
    w.values[e] = two_nu * h.a_omega / (two_nu * h.b_omega + gap * gap);
  }
  return w;
}

double m_step_sigma(double c1, double c2, double c3) {
  return (c2 + std::sqrt(c2 * c2 + 8.0 * c1 * c3)) / (2.0 * c3);
}

EmState initialize(const Dataset& data, const SparseGraph& g, const Hyperparameters& h) {
  h.validate(static_cast<std::size_t>(data.p()));
  if (g.num_nodes() != static_cast<std::size_t>(data.p())) {
    throw DimensionError("graph has " + std::to_string(g.num_nodes()) + " nodes but data has " +
                         std::to_string(data.p()) + " columns");
  }
  EmState s;
  s.beta = Eigen::VectorXd::Zero(data.p());
  s.sigma = std::sqrt((data.y().squaredNorm() + 2.0 * h.b_sigma) / c3_of(data, h));
  s.alpha = h.mu_vector(data.p());
  s.omega = e_step(s.alpha, g, h);
  s.lasso.beta = s.beta;
  s.q_value = q_objective(s, data, g, h);
  s.logpost = log_marginal_posterior(s, data, g, h);
  return s;
}

AlphaUpdate m_step_alpha(const EmState& state, const SparseGraph& g, const Hyperparameters& h) {
  const Eigen::Index p = state.alpha.size();
  const Eigen::VectorXd mu = h.mu_vector(p);
  const Eigen::VectorXd lower = mu.array() - kLowerClamp;
  const Eigen::VectorXd upper = mu.array() + h.nu;
  AlphaObjective objective{g, state.omega, mu, state.beta.cwiseAbs(), state.sigma, h.nu};

  const bool dense = static_cast<std::size_t>(p) <= h.dense_newton_threshold;
  Eigen::MatrixXd omega_full;
  Eigen::VectorXd omega_diag;
  if (dense) {
    omega_full = omega_dense(g, state.omega);
  } else {
    omega_diag = omega_diagonal(g, state.omega);
  }

  AlphaUpdate out;
  out.alpha = state.alpha.cwiseMax(lower).cwiseMin(upper);
  double f_current = objective.value(out.alpha);

  for (std::size_t step = 0; step < h.newton_inner; ++step) {
    const Eigen::VectorXd grad = objective.gradient(out.alpha);
    const Eigen::ArrayXd curvature = objective.abs_beta.array() * out.alpha.array().exp() / state.sigma;

    // Coordinates pinned at a bound with the gradient pushing outward stay put.
    std::vector<Eigen::Index> free_set;
    free_set.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
      const bool at_upper = out.alpha[j] >= upper[j] - 1e-9 && grad[j] < 0.0;
      const bool at_lower = out.alpha[j] <= lower[j] + 1e-9 && grad[j] > 0.0;
      if (!at_upper && !at_lower) free_set.push_back(j);
    }
    if (free_set.empty()) break;

    double grad_norm = 0.0;
    for (Eigen::Index j : free_set) grad_norm = std::max(grad_norm, std::abs(grad[j]));
    if (grad_norm < 1e-14) break;

    // Newton direction of F; equals -H^{-1} g for the sigma*nu-scaled H and g.
    Eigen::VectorXd direction = Eigen::VectorXd::Zero(p);
    if (dense) {
      const auto m = static_cast<Eigen::Index>(free_set.size());
      Eigen::MatrixXd hess(m, m);
      Eigen::VectorXd rhs(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        const Eigen::Index ja = free_set[static_cast<std::size_t>(a)];
        rhs[a] = -grad[ja];
        for (Eigen::Index b = 0; b < m; ++b) {
          hess(a, b) = omega_full(ja, free_set[static_cast<std::size_t>(b)]) / h.nu;
        }
        hess(a, a) += curvature[ja];
      }
      const Eigen::VectorXd sub = hess.llt().solve(rhs);
      for (Eigen::Index a = 0; a < m; ++a) direction[free_set[static_cast<std::size_t>(a)]] = sub[a];
    } else {
      for (Eigen::Index j : free_set) {
        direction[j] = -grad[j] / (omega_diag[j] / h.nu + curvature[j]);
      }
    }

    double scale = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, scale *= 0.5) {
      Eigen::VectorXd candidate = (out.alpha + scale * direction).cwiseMax(lower).cwiseMin(upper);
      const double predicted = grad.dot(candidate - out.alpha);
      if (predicted >= 0.0) continue;
      const double f_candidate = objective.value(candidate);
      // Below the rounding noise of F the Armijo test carries no information.
      const bool negligible = -predicted < 1e-14 * (1.0 + std::abs(f_current));
      if (negligible || f_candidate <= f_current + kArmijo * predicted) {
        out.lower_clamp_hit |= (candidate.array() <= lower.array()).any();
        out.alpha = std::move(candidate);
        f_current = f_candidate;
        accepted = true;
        ++out.steps_accepted;
        break;
      }
    }
    if (!accepted) {
      out.line_search_failed = true;
      break;
    }
  }
  return out;
}

double q_objective(const EmState& state, const Dataset& data, const SparseGraph& g,
                   const Hyperparameters& h) {
  const double sigma2 = state.sigma * state.sigma;
  const double rss = residual_sum_of_squares(data, state.beta);
  const double penalty = state.beta.cwiseAbs().dot(state.alpha.array().exp().matrix());
  const Eigen::VectorXd mu = h.mu_vector(state.alpha.size());
  return -0.5 * c3_of(data, h) * std::log(sigma2) -
         (rss + 2.0 * state.sigma * penalty + 2.0 * h.b_sigma) / (2.0 * sigma2) + state.alpha.sum() -
         omega_quadratic_form(g, state.omega, state.alpha, mu) / (2.0 * h.nu);
}

double log_marginal_posterior(const EmState& state, const Dataset& data, const SparseGraph& g,
                              const Hyperparameters& h) {
  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  const double sigma2 = state.sigma * state.sigma;
  const double rss = residual_sum_of_squares(data, state.beta);
  const Eigen::VectorXd mu = h.mu_vector(state.alpha.size());
  const Eigen::VectorXd d = state.alpha - mu;

  const double likelihood = -0.5 * n * std::log(2.0 * std::numbers::pi * sigma2) - rss / (2.0 * sigma2);
  const double laplace = state.alpha.sum() - p * std::log(2.0 * state.sigma) -
                         state.beta.cwiseAbs().dot(state.alpha.array().exp().matrix()) / state.sigma;
  const double inv_gamma = h.a_sigma * std::log(h.b_sigma) - std::lgamma(h.a_sigma) -
                           (h.a_sigma + 1.0) * std::log(sigma2) - h.b_sigma / sigma2;
  double alpha_prior = -d.squaredNorm() / (2.0 * h.nu);
  auto edges = g.edges();
  for (const auto& e : edges) {
    const double gap = d[static_cast<Eigen::Index>(e.from)] - d[static_cast<Eigen::Index>(e.to)];
    alpha_prior -= h.a_omega * std::log(h.b_omega + gap * gap / (2.0 * h.nu));
  }
  return likelihood + laplace + inv_gamma + alpha_prior;
}

FitResult fit(const Dataset& data, const SparseGraph& g, const Hyperparameters& h,
              const EmState* warm) {
  const auto started = std::chrono::steady_clock::now();
  EmState state;
  if (warm != nullptr) {
    h.validate(static_cast<std::size_t>(data.p()));
    if (warm->beta.size() != data.p() || warm->alpha.size() != data.p() ||
        g.num_nodes() != static_cast<std::size_t>(data.p())) {
      throw DimensionError("warm start does not match the problem dimensions");
    }
    state = *warm;
    state.iteration = 0;
    const Eigen::VectorXd mu = h.mu_vector(data.p());
    state.alpha = state.alpha.array().max(mu.array() - kLowerClamp).min(mu.array() + h.nu).matrix();
    state.omega = e_step(state.alpha, g, h);
    if (state.lasso.beta.size() != data.p()) state.lasso.beta = state.beta;
    state.q_value = q_objective(state, data, g, h);
    state.logpost = log_marginal_posterior(state, data, g, h);
  } else {
    state = initialize(data, g, h);
  }

  FitResult result;
  result.trace.push_back({state.q_value, state.logpost});
  const double c3 = c3_of(data, h);
  WLassoOptions lasso_opts;
  lasso_opts.tol = h.lasso_tol;
  bool clamp_logged = false;

  for (std::size_t t = 1; t <= h.max_iter; ++t) {
    state.omega = e_step(state.alpha, g, h);
    const double previous_q = state.q_value;

    result.final_penalty = state.penalty();
    state.lasso = solve_weighted_lasso(data, result.final_penalty, &state.lasso, lasso_opts);
    state.beta = state.lasso.beta;

    const double c1 = 0.5 * residual_sum_of_squares(data, state.beta) + h.b_sigma;
    const double c2 = state.beta.cwiseAbs().dot(state.alpha.array().exp().matrix());
    state.sigma = m_step_sigma(c1, c2, c3);

    AlphaUpdate update = m_step_alpha(state, g, h);
    if (update.line_search_failed) {
      ++result.line_search_failures;
      spdlog::debug("EM iteration {}: alpha line search failed, alpha kept", t);
    }
    if (update.lower_clamp_hit && !clamp_logged) {
      spdlog::info("EM iteration {}: alpha reached the lower clamp mu - {}", t, kLowerClamp);
      clamp_logged = true;
    }
    state.alpha = std::move(update.alpha);

    state.iteration = t;
    state.q_value = q_objective(state, data, g, h);
    state.logpost = log_marginal_posterior(state, data, g, h);
    result.trace.push_back({state.q_value, state.logpost});

    // Q_t and Q_{t-1} use different omega, so the change can be negative; a signed
    // test would stop at the first dip.
    const double relative = std::abs(state.q_value - previous_q) / (std::abs(previous_q) + 1.0);
    if (relative < h.epsilon_tol) {
      result.converged = true;
      break;
    }
  }

  // Closing E-step and beta step at the final sigma and alpha, so the returned beta
  // is the lasso solution for the returned penalties. A partial EM step: ascent holds.
  state.omega = e_step(state.alpha, g, h);
  result.final_penalty = state.penalty();
  state.lasso = solve_weighted_lasso(data, result.final_penalty, &state.lasso, lasso_opts);
  state.beta = state.lasso.beta;
  state.q_value = q_objective(state, data, g, h);
  state.logpost = log_marginal_posterior(state, data, g, h);
  result.trace.back() = {state.q_value, state.logpost};

  result.iterations = state.iteration;
  result.beta = state.beta;
  result.alpha = state.alpha;
  result.sigma2 = state.sigma * state.sigma;
  result.omega_final = state.omega;
  for (Eigen::Index j = 0; j < state.beta.size(); ++j) {
    if (state.beta[j] != 0.0) result.selected.push_back(static_cast<std::size_t>(j));
  }
  result.standardization = data.standardization();
  result.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

EmState state_from_fit(const FitResult& fit) {
  EmState s;
  s.beta = fit.beta;
  s.sigma = std::sqrt(fit.sigma2);
  s.alpha = fit.alpha;
  s.omega = fit.omega_final;
  s.iteration = fit.iterations;
  s.lasso.beta = fit.beta;
  return s;
}

double fixed_point_residual(const FitResult& fit, const SparseGraph& g, const Hyperparameters& h) {
  const Eigen::VectorXd mu = h.mu_vector(fit.alpha.size());
  const double sigma = std::sqrt(fit.sigma2);
  const Eigen::VectorXd smoothed = omega_apply(g, fit.omega_final, fit.alpha - mu);
  double worst = 0.0;
  for (Eigen::Index j = 0; j < fit.alpha.size(); ++j) {
    const double lhs = std::abs(fit.beta[j]) * std::exp(fit.alpha[j]);
    const double rhs = sigma / h.nu * (h.nu - smoothed[j]);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

Eigen::VectorXd predict(const FitResult& fit, const Eigen::MatrixXd& x_new) {
  if (x_new.cols() != fit.beta.size()) {
    throw DimensionError("matrix has " + std::to_string(x_new.cols()) + " columns, fit has " +
                         std::to_string(fit.beta.size()));
  }
  Eigen::VectorXd yhat = Eigen::VectorXd::Constant(x_new.rows(), fit.standardization.y_mean);
  const auto& s = fit.standardization;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    if (fit.beta[j] == 0.0) continue;
    yhat.array() += fit.beta[j] * (x_new.col(j).array() - s.column_means[j]) / s.column_scales[j];
  }
  return yhat;
}

}  // namespace emshs
