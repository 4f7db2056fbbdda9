#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "emshs/dataset.hpp"
#include "emshs/errors.hpp"

namespace emshs {

struct WLassoOptions {
  double tol = 1e-8;
  std::size_t max_sweeps = 10000;
  /// Store the objective after every sweep (tests only; costs O(n + p) per sweep).
  bool record_objective = false;
};

struct WLassoSolution {
  Eigen::VectorXd beta;
  /// Indices with beta != 0, ascending.
  std::vector<std::size_t> active;
  /// x_j' (y - X beta) for every column.
  Eigen::VectorXd xr_cache;
  /// Sweeps performed, counting full-gradient passes.
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  std::vector<double> objective_trace;
};

class WLassoNonConvergence : public NonConvergenceError {
 public:
  WLassoNonConvergence(WLassoSolution best, double residual);
  const WLassoSolution& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  WLassoSolution best_;
  double residual_;
};

/**
 * Minimizes 1/2 |y - X beta|^2 + sum_j xi_j |beta_j| by cyclic coordinate
 * descent over an active set, with a full gradient pass between rounds to
 * admit KKT violators. Coordinates are visited in ascending index order.
 *
 * A warm start reuses `warm->beta`; if it already satisfies the KKT
 * conditions at `opts.tol` the solve returns after one gradient pass.
 * Throws WLassoNonConvergence when `opts.max_sweeps` is exhausted.
 */
WLassoSolution solve_weighted_lasso(const Dataset& data, const Eigen::VectorXd& xi,
                                    const WLassoSolution* warm = nullptr,
                                    const WLassoOptions& opts = {});

double weighted_lasso_objective(const Dataset& data, const Eigen::VectorXd& beta,
                                const Eigen::VectorXd& xi);

struct KktReport {
  double max_violation = 0.0;
  bool pass = false;
};

/// Active j: |x_j'r - xi_j sign(beta_j)|; inactive j: max(0, |x_j'r| - xi_j).
KktReport check_kkt(const Dataset& data, const Eigen::VectorXd& beta, const Eigen::VectorXd& xi,
                    double tol);

}  // namespace emshs
