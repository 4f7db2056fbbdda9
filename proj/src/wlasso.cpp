#include "emshs/wlasso.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace emshs {

WLassoNonConvergence::WLassoNonConvergence(WLassoSolution best, double residual)
    : NonConvergenceError("weighted lasso: sweep limit reached with KKT residual " +
                          std::to_string(residual)),
      best_(std::move(best)),
      residual_(residual) {}

namespace {

double coordinate_violation(double grad, double beta, double xi) {
  if (beta > 0.0) return std::abs(grad - xi);
  if (beta < 0.0) return std::abs(grad + xi);
  return std::max(0.0, std::abs(grad) - xi);
}

Eigen::VectorXd residual_of(const Dataset& data, const Eigen::VectorXd& beta) {
  Eigen::VectorXd r = data.y();
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) r.noalias() -= beta[j] * data.x().col(j);
  }
  return r;
}

double objective_from_residual(const Eigen::VectorXd& r, const Eigen::VectorXd& beta,
                               const Eigen::VectorXd& xi) {
  return 0.5 * r.squaredNorm() + xi.dot(beta.cwiseAbs());
}

}  // namespace

double weighted_lasso_objective(const Dataset& data, const Eigen::VectorXd& beta,
                                const Eigen::VectorXd& xi) {
  return objective_from_residual(residual_of(data, beta), beta, xi);
}

WLassoSolution solve_weighted_lasso(const Dataset& data, const Eigen::VectorXd& xi,
                                    const WLassoSolution* warm, const WLassoOptions& opts) {
  const Eigen::Index p = data.p();
  if (xi.size() != p) throw DimensionError("penalty vector length differs from p");
  if ((xi.array() < 0.0).any() || !xi.allFinite()) {
    throw ConfigError("penalty weights must be finite and >= 0");
  }
  if (!(opts.tol > 0.0)) throw ConfigError("tol must be > 0");

  const Eigen::MatrixXd& x = data.x();
  const Eigen::VectorXd& sq = data.column_sq_norms();

  WLassoSolution sol;
  if (warm != nullptr && warm->beta.size() == p) {
    sol.beta = warm->beta;
  } else {
    sol.beta = Eigen::VectorXd::Zero(p);
  }
  Eigen::VectorXd r = residual_of(data, sol.beta);

  std::vector<Eigen::Index> working;
  while (true) {
    sol.xr_cache.noalias() = x.transpose() * r;
    ++sol.iterations;

    double worst = 0.0;
    working.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double v = coordinate_violation(sol.xr_cache[j], sol.beta[j], xi[j]);
      worst = std::max(worst, v);
      if (sq[j] > 0.0 && (sol.beta[j] != 0.0 || std::abs(sol.xr_cache[j]) > xi[j])) {
        working.push_back(j);
      }
    }
    sol.kkt_violation = worst;
    if (opts.record_objective) sol.objective_trace.push_back(objective_from_residual(r, sol.beta, xi));
    if (worst <= opts.tol) break;
    if (sol.iterations >= opts.max_sweeps) throw WLassoNonConvergence(sol, worst);

    while (true) {
      double sweep_worst = 0.0;
      for (Eigen::Index j : working) {
        const auto xj = x.col(j);
        const double grad = xj.dot(r);
        const double old = sol.beta[j];
        sweep_worst = std::max(sweep_worst, coordinate_violation(grad, old, xi[j]));
        const double z = grad + sq[j] * old;
        const double mag = std::abs(z) - xi[j];
        const double updated = mag > 0.0 ? std::copysign(mag, z) / sq[j] : 0.0;
        if (updated != old) {
          r.noalias() -= (updated - old) * xj;
          sol.beta[j] = updated;
        }
      }
      ++sol.iterations;
      if (opts.record_objective) {
        sol.objective_trace.push_back(objective_from_residual(r, sol.beta, xi));
      }
      if (sweep_worst <= 0.5 * opts.tol) break;
      if (sol.iterations >= opts.max_sweeps) {
        sol.xr_cache.noalias() = x.transpose() * r;
        double residual = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
          residual = std::max(residual, coordinate_violation(sol.xr_cache[j], sol.beta[j], xi[j]));
        }
        sol.kkt_violation = residual;
        throw WLassoNonConvergence(sol, residual);
      }
    }
  }

  sol.active.clear();
  for (Eigen::Index j = 0; j < p; ++j) {
    if (sol.beta[j] != 0.0) sol.active.push_back(static_cast<std::size_t>(j));
  }
  return sol;
}

KktReport check_kkt(const Dataset& data, const Eigen::VectorXd& beta, const Eigen::VectorXd& xi,
                    double tol) {
  if (beta.size() != data.p() || xi.size() != data.p()) {
    throw DimensionError("beta/xi length differs from p");
  }
  const Eigen::VectorXd grad = data.x().transpose() * residual_of(data, beta);
  KktReport report;
  for (Eigen::Index j = 0; j < data.p(); ++j) {
    report.max_violation =
        std::max(report.max_violation, coordinate_violation(grad[j], beta[j], xi[j]));
  }
  report.pass = report.max_violation <= tol;
  return report;
}

}  // namespace emshs
