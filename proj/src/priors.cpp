#include "emshs/priors.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "emshs/errors.hpp"
#include "emshs/rng.hpp"

namespace emshs {

void PriorConfig::validate() const {
  if (!(nu > 0.0)) throw ConfigError("nu must be > 0");
  if (!(sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (!(a_omega > 0.0)) throw ConfigError("a_omega must be > 0");
  if (!(b_omega > 0.0)) throw ConfigError("b_omega must be > 0");
}

std::vector<double> marginal_beta_density_mc(const PriorConfig& cfg, std::span<const double> grid,
                                             std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw ConfigError("n_samples must be >= 1");
  if (!(cfg.sigma > 0.0)) throw ConfigError("sigma must be > 0");
  if (cfg.nu < 0.0) throw ConfigError("nu must be >= 0");

  auto engine = make_engine(seed, Stream::prior_mc);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> lambda(n_samples);
  const double sd = std::sqrt(cfg.nu);
  for (auto& l : lambda) l = std::exp(cfg.mu + sd * normal(engine));

  std::vector<double> density(grid.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double b = std::abs(grid[i]) / cfg.sigma;
    double acc = 0.0;
    for (double l : lambda) acc += l * std::exp(-l * b);
    density[i] = acc / (2.0 * cfg.sigma * static_cast<double>(n_samples));
  }
  return density;
}

double pairwise_alpha_density(double a1, double a2, double m1, double m2, double nu,
                              double a_omega, double b_omega) {
  const double d1 = a1 - m1;
  const double d2 = a2 - m2;
  const double gap = a1 - a2;
  return std::exp(-(d1 * d1 + d2 * d2) / (2.0 * nu)) *
         std::pow(b_omega + gap * gap / (2.0 * nu), -a_omega);
}

PropernessReport properness_bound_check(double a_omega, double b_omega, std::size_t quad_points) {
  if (!(a_omega > 0.0) || !(b_omega > 0.0)) throw ConfigError("a_omega and b_omega must be > 0");
  if (quad_points < 100) throw ConfigError("quad_points must be >= 100");

  // Beyond upper the gamma kernel has relative mass below 1e-12.
  const double upper = boost::math::gamma_q_inv(a_omega, 1e-12) / b_omega;
  // For a < 1, w = u^(1/a) absorbs the w^(a-1) singularity: w^(a-1) dw = du / a.
  const bool substitute = a_omega < 1.0;
  auto integrand = [a_omega, b_omega, substitute](double v) {
    if (substitute) {
      const double w = std::pow(v, 1.0 / a_omega);
      return std::pow(1.0 + 2.0 * w, -0.5) * std::exp(-b_omega * w) / a_omega;
    }
    return std::pow(1.0 + 2.0 * v, -0.5) * std::exp((a_omega - 1.0) * std::log(v) - b_omega * v);
  };
  const double span = substitute ? std::pow(upper, a_omega) : upper;

  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 15>;
  PropernessReport report;
  // Panel edges cluster quadratically near 0, where w^(a-1) is least smooth.
  const auto panels = static_cast<double>(quad_points);
  double prev = 0.0;
  for (std::size_t i = 1; i <= quad_points; ++i) {
    const double t = static_cast<double>(i) / panels;
    const double next = span * t * t;
    double err = 0.0;
    report.integral += Quadrature::integrate(integrand, prev, next, 15, 1e-13, &err);
    report.error_estimate += err;
    prev = next;
  }
  const double achieved = report.error_estimate / std::max(report.integral, 1e-300);
  if (!std::isfinite(report.integral) || achieved > 1e-8) {
    throw NonConvergenceError("properness quadrature did not converge: relative error " +
                              std::to_string(achieved));
  }
  report.bound = std::exp(std::lgamma(a_omega) - a_omega * std::log(b_omega));
  report.proper = report.integral <= report.bound * (1.0 + 1e-6);
  return report;
}

}  // namespace emshs
