#include <atomic>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#include "doctest.h"
#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/parallel.hpp"
#include "maxent_tomo/quadrature.hpp"

using namespace maxent_tomo;

TEST_CASE("Gauss-Hermite integrates even moments exactly") {
  for (int n : {2, 8, 32}) {
    const auto rule = gauss_hermite(n);
    CHECK(std::abs(rule.weights.sum() - std::sqrt(std::numbers::pi)) < 1e-13);
    // int x^{2k} e^{-x^2} = Gamma(k + 1/2), exact for 2k <= 2n - 1.
    for (int k = 0; 2 * k <= 2 * n - 1 && k < 12; ++k) {
      const double got = (rule.weights.array() * rule.nodes.array().pow(2 * k)).sum();
      const double ref = std::tgamma(k + 0.5);
      CHECK(std::abs(got - ref) <= 1e-12 * ref);
    }
    CHECK(std::abs((rule.weights.array() * rule.nodes.array()).sum()) < 1e-13);
  }
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  for (int n : {2, 8, 16}) {
    const auto rule = gauss_legendre(n);
    CHECK(std::abs(rule.weights.sum() - 2.0) < 1e-14);
    CHECK(rule.nodes.minCoeff() > -1.0);
    CHECK(rule.nodes.maxCoeff() < 1.0);
    for (int k = 0; 2 * k <= 2 * n - 1; ++k) {
      const double got = (rule.weights.array() * rule.nodes.array().pow(2 * k)).sum();
      CHECK(std::abs(got - 2.0 / (2 * k + 1)) < 1e-13);
    }
  }
}

TEST_CASE("quadrature rules reject fewer than two nodes") {
  CHECK_THROWS_AS(gauss_hermite(1), QuadratureError);
  CHECK_THROWS_AS(gauss_legendre(0), QuadratureError);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(50, [](std::size_t i) {
                    if (i == 17) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  CHECK(thread_count() >= 1);
}

TEST_CASE("MAXENT_TOMO_THREADS caps the worker count") {
  setenv("MAXENT_TOMO_THREADS", "1", 1);
  CHECK(thread_count() == 1);
  unsetenv("MAXENT_TOMO_THREADS");
}
