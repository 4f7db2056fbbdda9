#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "emshs/errors.hpp"
#include "emshs/eval.hpp"
#include "emshs/priors.hpp"
#include "oracles.hpp"

using namespace emshs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("marginal beta density") {
  SECTION("degenerate mixing recovers the Laplace density") {
    PriorConfig cfg{.mu = 0.7, .nu = 1e-12, .sigma = 1.3};
    const std::vector<double> grid{-1.0, 0.0, 0.25, 2.0};
    auto dens = marginal_beta_density_mc(cfg, grid, 1000, 5);
    const double lambda = std::exp(cfg.mu);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double expect = lambda / (2.0 * cfg.sigma) * std::exp(-lambda * std::abs(grid[i]) / cfg.sigma);
      CHECK_THAT(dens[i], WithinRel(expect, 1e-5));
    }
  }
  SECTION("exactly symmetric") {
    PriorConfig cfg{.mu = 1.0, .nu = 0.5, .sigma = 1.0};
    const std::vector<double> grid{-0.3, 0.3, -2.0, 2.0};
    auto dens = marginal_beta_density_mc(cfg, grid, 5000, 9);
    CHECK(dens[0] == dens[1]);
    CHECK(dens[2] == dens[3]);
  }
  SECTION("deterministic per seed") {
    PriorConfig cfg{.mu = 1.0, .nu = 0.5, .sigma = 1.0};
    const std::vector<double> grid{0.1};
    CHECK(marginal_beta_density_mc(cfg, grid, 1000, 3) == marginal_beta_density_mc(cfg, grid, 1000, 3));
  }
  SECTION("density at zero grows with mu under common random numbers") {
    const std::vector<double> zero{0.0};
    PriorConfig lo{.mu = 0.3, .nu = 0.1, .sigma = 1.0};
    PriorConfig hi{.mu = 1.0, .nu = 0.1, .sigma = 1.0};
    const double a = marginal_beta_density_mc(lo, zero, 1'000'000, 21)[0];
    const double b = marginal_beta_density_mc(hi, zero, 1'000'000, 21)[0];
    CHECK(b > a);
  }
  SECTION("integrates to one") {
    PriorConfig cfg{.mu = 0.5, .nu = 0.3, .sigma = 1.0};
    const double half = 30.0 * cfg.sigma * std::exp(-cfg.mu + 3.0 * std::sqrt(cfg.nu));
    // sinh spacing: fine near 0 where the density is sharply peaked.
    std::vector<double> grid = linspace(-6.0, 6.0, 4001);
    for (double& g : grid) g = half * std::sinh(g) / std::sinh(6.0);
    auto dens = marginal_beta_density_mc(cfg, grid, 100'000, 2);
    double area = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) area += 0.5 * (dens[i] + dens[i - 1]) * (grid[i] - grid[i - 1]);
    CHECK_THAT(area, WithinAbs(1.0, 1e-2));
  }
  SECTION("rejects zero samples") {
    PriorConfig cfg;
    const std::vector<double> grid{0.0};
    CHECK_THROWS_AS(marginal_beta_density_mc(cfg, grid, 0, 0), ConfigError);
  }
}

TEST_CASE("pairwise alpha density") {
  CHECK_THAT(pairwise_alpha_density(2, 2, 2, 2, 1.2, 4, 1), WithinAbs(1.0, 1e-15));
  CHECK_THAT(pairwise_alpha_density(0, 0, 0, 0, 1.0, 3, 2), WithinRel(std::pow(2.0, -3.0), 1e-14));
  CHECK_THAT(pairwise_alpha_density(0.3, -1.1, 0.5, 0.5, 1.2, 4, 1),
             WithinRel(pairwise_alpha_density(-1.1, 0.3, 0.5, 0.5, 1.2, 4, 1), 1e-15));
  const double expect = std::exp(-0.5) / 1.5;
  CHECK_THAT(pairwise_alpha_density(1, 0, 1, 1, 1, 1, 1), WithinAbs(expect, 1e-14));
  CHECK_THAT(pairwise_alpha_density(1, 0, 1, 1, 1, 1, 1), WithinAbs(0.40438, 1e-4));
  // Along the diagonal the density rises with a_omega and falls with b_omega when b_omega <= 1.
  CHECK(pairwise_alpha_density(0.2, 0.2, 0, 0, 1.0, 5, 0.5) > pairwise_alpha_density(0.2, 0.2, 0, 0, 1.0, 4, 0.5));
  CHECK(pairwise_alpha_density(0.2, 0.2, 0, 0, 1.0, 4, 0.5) > pairwise_alpha_density(0.2, 0.2, 0, 0, 1.0, 4, 0.9));
  CHECK(pairwise_alpha_density(5, -5, 0, 0, 0.1, 4, 1) > 0.0);
}

TEST_CASE("properness bound") {
  SECTION("a = b = 1 against the closed form") {
    auto r = properness_bound_check(1.0, 1.0, 200);
    const double closed = 0.5 * std::exp(0.5) * 2.0 * std::sqrt(2.0 * std::numbers::pi) * oracle::normal_sf(1.0);
    CHECK_THAT(r.integral, WithinAbs(closed, 1e-9));
    CHECK_THAT(r.integral, WithinAbs(0.656, 1e-3));
    CHECK(r.bound == 1.0);
    CHECK(r.proper);
  }
  SECTION("grid of shapes and rates against Simpson") {
    for (double a : {1.0, 4.0}) {
      for (double b : {1.0, 4.0}) {
        auto r = properness_bound_check(a, b, 100);
        CHECK(r.proper);
        CHECK(r.integral <= r.bound);
        CHECK_THAT(r.bound, WithinRel(std::tgamma(a) / std::pow(b, a), 1e-12));
        CHECK_THAT(r.integral, WithinRel(oracle::properness_integral_simpson(a, b), 1e-8));
      }
    }
  }
  SECTION("a = 4, b = 1 is below Gamma(4)") {
    auto r = properness_bound_check(4.0, 1.0, 100);
    CHECK(r.integral <= 6.0);
    CHECK_THAT(r.bound, WithinRel(6.0, 1e-12));
  }
  SECTION("shape below one still converges") {
    auto r = properness_bound_check(0.5, 2.0, 400);
    CHECK(r.proper);
    // int_0^inf (1+2w)^(-1/2) w^(-1/2) e^(-2w) dw = e^(1/2) K_0(1/2) / sqrt(2)
    CHECK_THAT(r.integral, WithinRel(std::exp(0.5) * std::cyl_bessel_k(0.0, 0.5) / std::sqrt(2.0), 1e-9));
  }
  SECTION("input checks") {
    CHECK_THROWS_AS(properness_bound_check(1.0, 1.0, 99), ConfigError);
    CHECK_THROWS_AS(properness_bound_check(0.0, 1.0, 100), ConfigError);
  }
}
