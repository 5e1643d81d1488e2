#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/measurement.hpp"
#include "maxent_tomo/wigner.hpp"
#include "oracles.hpp"

using namespace maxent_tomo;

TEST_CASE("Fock state values at the origin") {
  const FockSpace space(6);
  const auto vac = DensityOperator::from_pure(fock_state(0, space));
  const auto one = DensityOperator::from_pure(fock_state(1, space));
  CHECK(std::abs(wigner_point(vac, 0.0, 0.0) - 2.0) < 1e-14);
  CHECK(std::abs(wigner_point(one, 0.0, 0.0) + 2.0) < 1e-14);
  CHECK(std::abs(wigner_point(vac, 0.6, -0.3) - 2.0 * std::exp(-0.45)) < 1e-14);
}

TEST_CASE("grid evaluation integrates to 2 pi") {
  const FockSpace space(16);
  const auto cat = DensityOperator::from_pure(even_cat_state(std::sqrt(2.0), space));
  const auto g = wigner_eval(cat, {-7, 7, 141, -7, 7, 141});
  CHECK(g.convention == "unnormalized-2pi");
  CHECK(std::abs(g.integral() - 2.0 * std::numbers::pi) < 1e-8);
  CHECK(g.max_imag < 1e-12);
  CHECK(g.warnings.empty());
  CHECK(g.values.minCoeff() < -0.5);
}

TEST_CASE("series agrees with direct integration of the density matrix") {
  std::mt19937_64 rng(17);
  const CMatrix rho = oracle::random_density(6, rng);
  const DensityOperator d(rho);
  for (double q : {-1.7, 0.0, 0.4, 2.2}) {
    for (double p : {-0.9, 0.0, 1.3}) {
      CHECK(std::abs(wigner_point(d, q, p) - oracle::wigner_direct(rho, q, p)) < 1e-10);
    }
  }
}

TEST_CASE("marginals reproduce the quadrature distributions") {
  const FockSpace space(16);
  for (const auto& psi : {superposition_state({1.0, 1.0}, space), even_cat_state(std::sqrt(2.0), space)}) {
    const auto rho = DensityOperator::from_pure(psi);
    const auto g = wigner_eval(rho, {-8, 8, 321, -8, 8, 321});
    for (double theta : {0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4}) {
      const auto m = wigner_marginal(g, theta);
      double worst = 0.0;
      for (Eigen::Index i = 0; i < m.x.size(); ++i) {
        worst = std::max(worst, std::abs(m.density(i) - ideal_quadrature_distribution(rho, theta, m.x(i))));
      }
      CHECK(worst < 1e-3);
    }
  }
}

TEST_CASE("warnings and errors") {
  const FockSpace space(16);
  const auto cat = DensityOperator::from_pure(even_cat_state(std::sqrt(2.0), space));
  const auto narrow = wigner_eval(cat, {-2, 2, 11, -2, 2, 11});
  CHECK(narrow.warnings.size() == 1);
  CHECK_THROWS_AS(wigner_eval(cat, {-2, 2, 1, -2, 2, 11}), InputError);
  CHECK_THROWS_AS(wigner_eval(cat, {2, -2, 11, -2, 2, 11}), InputError);
  CHECK_THROWS_AS(wigner_marginal(narrow, std::numbers::pi), InputError);
  CHECK_THROWS_AS(wigner_marginal(narrow, -0.1), InputError);
}
