#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace emshs {

/// Prior-level parameters for the density constructions below.
struct PriorConfig {
  double mu = 0.0;
  double nu = 1.0;
  double sigma = 1.0;
  double a_omega = 4.0;
  double b_omega = 1.0;

  /// Throws ConfigError on a non-positive nu, sigma, a_omega or b_omega.
  void validate() const;
};

/**
 * Marginal prior density of a single coefficient with its log-shrinkage
 * integrated out by Monte Carlo.
 *
 * Draws lambda_s = exp(mu + sqrt(nu) * Z_s) and averages the Laplace density
 * (lambda / 2 sigma) exp(-lambda |b| / sigma) at each grid point. The normal
 * draws depend only on `seed` and `n_samples`, so calls with different mu or
 * nu share random numbers.
 */
std::vector<double> marginal_beta_density_mc(const PriorConfig& cfg, std::span<const double> grid,
                                             std::size_t n_samples, std::uint64_t seed);

/// Unnormalized joint density of two connected log-shrinkage parameters after
/// integrating out their edge weight.
double pairwise_alpha_density(double a1, double a2, double m1, double m2, double nu,
                              double a_omega, double b_omega);

struct PropernessReport {
  double integral = 0.0;
  double bound = 0.0;
  double error_estimate = 0.0;
  bool proper = false;
};

/// Two-node, one-edge normalizing integral of the edge-weight prior,
/// int_0^inf (1 + 2w)^(-1/2) w^(a-1) exp(-b w) dw, against Gamma(a) / b^a.
/// `quad_points` is the number of panels handed to adaptive Gauss-Kronrod.
PropernessReport properness_bound_check(double a_omega, double b_omega, std::size_t quad_points);

}  // namespace emshs
