#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "emshs/dataset.hpp"
#include "emshs/graph.hpp"
#include "emshs/wlasso.hpp"

namespace emshs {

/**
 * Model hyperparameters and EM controls.
 *
 * `mu` holds either one value shared by every coordinate or one value per
 * coordinate. Defaults are the recommended simulation settings
 * (nu = 1.2, a_omega = 4, b_omega = 1, a_sigma = b_sigma = 1, eps = e^-5).
 */
struct Hyperparameters {
  std::vector<double> mu{5.5};
  double nu = 1.2;
  double a_omega = 4.0;
  double b_omega = 1.0;
  double a_sigma = 1.0;
  double b_sigma = 1.0;
  double epsilon_tol = std::exp(-5.0);
  std::size_t max_iter = 1000;
  std::size_t newton_inner = 3;
  std::size_t dense_newton_threshold = 500;
  std::uint64_t seed = 0;
  double lasso_tol = 1e-8;

  /// Throws ConfigError when a constraint fails for a problem with p coefficients.
  void validate(std::size_t p) const;
  Eigen::VectorXd mu_vector(Eigen::Index p) const;
  void set_mu(double value) { mu.assign(1, value); }
};

struct EmState {
  Eigen::VectorXd beta;
  double sigma = 1.0;
  Eigen::VectorXd alpha;
  EdgeWeights omega;
  double q_value = 0.0;
  double logpost = 0.0;
  std::size_t iteration = 0;
  /// Last weighted lasso solution; warm start for the next beta step.
  WLassoSolution lasso;

  /// xi_j = sigma * exp(alpha_j).
  Eigen::VectorXd penalty() const { return sigma * alpha.array().exp().matrix(); }
};

struct TracePoint {
  double q;
  double logpost;
};

struct FitResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;
  double sigma2 = 0.0;
  std::vector<std::size_t> selected;
  EdgeWeights omega_final;
  /// Entry 0 is the initial state, entry t the state after EM iteration t.
  std::vector<TracePoint> trace;
  std::size_t iterations = 0;
  double wall_time = 0.0;
  bool converged = false;
  /// Penalties of the final beta step (sigma and alpha before their last update).
  Eigen::VectorXd final_penalty;
  std::size_t line_search_failures = 0;
  Standardization standardization;
};

EmState initialize(const Dataset& data, const SparseGraph& g, const Hyperparameters& h);

/// Posterior mean of every edge weight given alpha.
EdgeWeights e_step(const Eigen::VectorXd& alpha, const SparseGraph& g, const Hyperparameters& h);

/// Positive root of c3 s^2 - c2 s - 2 c1 = 0.
double m_step_sigma(double c1, double c2, double c3);

struct AlphaUpdate {
  Eigen::VectorXd alpha;
  std::size_t steps_accepted = 0;
  bool line_search_failed = false;
  bool lower_clamp_hit = false;
};

/// Damped Newton steps on the alpha block of Q with beta, sigma and omega held
/// at `state`. Dense Hessian when p <= h.dense_newton_threshold, diagonal otherwise.
AlphaUpdate m_step_alpha(const EmState& state, const SparseGraph& g, const Hyperparameters& h);

/// Expected complete-data log posterior with Omega fixed at state.omega.
double q_objective(const EmState& state, const Dataset& data, const SparseGraph& g,
                   const Hyperparameters& h);

/// Log posterior of (beta, sigma^2, alpha) with the edge weights integrated out.
/// Keeps the likelihood and inverse-gamma constants; drops the
/// -(p/2) log(2 pi nu) normalizer of the alpha prior, which is free of theta.
double log_marginal_posterior(const EmState& state, const Dataset& data, const SparseGraph& g,
                              const Hyperparameters& h);

/// Runs EM to convergence. `warm`, when given, replaces the default start.
FitResult fit(const Dataset& data, const SparseGraph& g, const Hyperparameters& h,
              const EmState* warm = nullptr);

/// State equivalent to the end of `fit`, usable as a warm start.
EmState state_from_fit(const FitResult& fit);

/// max_j | |beta_j| e^{alpha_j} - (sigma/nu)(nu - (Omega (alpha - mu))_j) |.
double fixed_point_residual(const FitResult& fit, const SparseGraph& g, const Hyperparameters& h);

/// Predictions on the original response scale for raw rows `x_new`.
Eigen::VectorXd predict(const FitResult& fit, const Eigen::MatrixXd& x_new);

}  // namespace emshs
