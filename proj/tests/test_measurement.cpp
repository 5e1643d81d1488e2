#include <cmath>
#include <numbers>

#include "doctest.h"
#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/measurement.hpp"
#include "oracles.hpp"

using namespace maxent_tomo;

namespace {

const std::vector<double> kQuarterTurns{0.0, std::numbers::pi / 4, std::numbers::pi / 2, 3 * std::numbers::pi / 4};

double expect(const DensityOperator& rho, const HermitianOperator& op) { return rho.expectation(op.matrix()); }

}  // namespace

TEST_CASE("trap config validation") {
  auto cfg = TrapConfig::lattice_defaults();
  CHECK(cfg.validate().empty());
  CHECK(std::abs(cfg.detector_scale() - std::sqrt(2.0) * 11e-3 * 8.7e-3) < 1e-18);
  cfg.dv0 = 20e-3;
  CHECK(cfg.validate().size() == 1);
  cfg.cloud_rms = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("bin grid geometry") {
  const BinGrid g{1e-3, 10e-6, 3};
  CHECK(g.count() == 7);
  CHECK(std::abs(g.lower_edge(-3) - (1e-3 - 35e-6)) < 1e-18);
  CHECK(std::abs(g.upper_edge(3) - (1e-3 + 35e-6)) < 1e-18);
  CHECK_THROWS_AS((BinGrid{0.0, 0.0, 3}.validate()), InputError);
  CHECK_THROWS_AS((BinGrid{0.0, 1e-6, 0}.validate()), InputError);
}

TEST_CASE("covering grid spans the requested number of rms widths") {
  const auto cfg = TrapConfig::lattice_defaults();
  const BinGrid g = covering_grid(cfg, 0.5, 25);
  const double s = cfg.detector_scale();
  const double rms = std::sqrt(2.0 * s * s + 60e-6 * 60e-6);
  CHECK(std::abs(g.upper_edge(25) - 4.0 * rms) < 1e-15);
  CHECK(g.half_count == 25);
  CHECK_THROWS_AS(covering_grid(cfg, -1.0, 25), InputError);
}

TEST_CASE("observation level layout") {
  const auto cfg = TrapConfig::lattice_defaults();
  const FockSpace space(8);
  const BinGrid grid{0.0, 24e-6, 25};
  const auto set = build_observation_level(cfg, grid, kQuarterTurns, 0.5, space, {2.5, {}});
  CHECK(set.size() == 205);
  CHECK(set.number_index() == 204u);
  CHECK(set.entries[204].mean == 0.5);
  CHECK(set.entries[204].weight == 2.5);
  CHECK(set.bin_index(2, -25) == 102u);
  CHECK(set.entries[set.bin_index(3, 7)].rotation == 3);
  CHECK(set.entries[set.bin_index(3, 7)].bin == 7);
  CHECK(set.entries[set.bin_index(3, 7)].label() == "F[3,7]");
  CHECK_FALSE(set.has_means());
  CHECK_THROWS_AS(build_observation_level(cfg, grid, {0.0, 0.5, 0.5}, 0.5, space), DegenerateRotationError);
  CHECK_THROWS_AS(build_observation_level(cfg, grid, {}, 0.5, space), InputError);
  CHECK_THROWS_AS(build_observation_level(cfg, grid, {0.0}, -0.1, space), InputError);
}

TEST_CASE("variance fields set the weights") {
  Observable o{number_operator(FockSpace(3)), ObservableKind::number, -1, 0, 1.0, 1.0, 0.25};
  CHECK(o.effective_weight() == doctest::Approx(16.0));
  o.sigma.reset();
  CHECK(o.effective_weight() == 1.0);
}

TEST_CASE("bin observables are Hermitian with spectrum in [0, 1]") {
  const auto cfg = TrapConfig::lattice_defaults();
  const FockSpace space(16);
  const BinGrid grid{0.0, 24e-6, 25};
  for (double theta : kQuarterTurns) {
    for (int k : {-25, -3, 0, 11, 25}) {
      const auto op = build_be_observable(cfg, grid, theta, k, space);
      CHECK((op.matrix() - op.matrix().adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      Eigen::SelfAdjointEigenSolver<CMatrix> es(op.matrix());
      CHECK(es.eigenvalues().minCoeff() > -1e-12);
      CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-10);
    }
  }
  CHECK_THROWS_AS(build_be_observable(cfg, grid, 0.0, 26, space), InputError);
  CHECK_THROWS_AS(build_be_observable(cfg, grid, 0.0, 0, space, {1, 8}), QuadratureError);
}

TEST_CASE("point cloud vacuum gives bin-integrated Gaussian of rms 1/sqrt2") {
  auto cfg = TrapConfig::lattice_defaults();
  cfg.cloud_rms = 1e-12;
  const FockSpace space(8);
  const BinGrid grid{0.0, 30e-6, 10};
  const auto vac = DensityOperator::from_pure(fock_state(0, space));
  const double s = cfg.detector_scale();
  for (double theta : kQuarterTurns) {
    for (int k = -10; k <= 10; ++k) {
      const double ref = 0.5 * (std::erf(grid.upper_edge(k) / s) - std::erf(grid.lower_edge(k) / s));
      CHECK(std::abs(expect(vac, build_be_observable(cfg, grid, theta, k, space)) - ref) < 1e-12);
    }
  }
}

TEST_CASE("captured probability approaches one as the grid widens") {
  const auto cfg = TrapConfig::lattice_defaults();
  const FockSpace space(16);
  const auto rho = DensityOperator::from_pure(superposition_state({1.0, 1.0}, space));
  double previous = 0.0;
  for (double width : {5e-6, 15e-6, 30e-6, 50e-6}) {
    const BinGrid grid{0.0, width, 25};
    double total = 0.0;
    for (int k = -25; k <= 25; ++k) total += expect(rho, build_be_observable(cfg, grid, 0.3, k, space));
    CHECK(total <= 1.0 + 1e-12);
    CHECK(total >= previous);
    previous = total;
  }
  CHECK(std::abs(previous - 1.0) < 1e-9);
}

TEST_CASE("bin probabilities match direct double integration") {
  const auto cfg = TrapConfig::lattice_defaults();
  const FockSpace space(16);
  const BinGrid grid{0.0, 31e-6, 25};
  const CMatrix sup = superposition_state({1.0, 1.0}, space).projector();
  const CMatrix cat = even_cat_state(std::sqrt(2.0), space).projector();
  for (const CMatrix* rho : {&sup, &cat}) {
    const DensityOperator d(*rho);
    for (double theta : {0.0, 0.804, 2.41}) {
      for (int k : {-17, -4, 0, 9}) {
        const double ours = expect(d, build_be_observable(cfg, grid, theta, k, space));
        CHECK(std::abs(ours - oracle::bin_probability(*rho, cfg, grid, theta, k)) < 1e-8);
      }
    }
  }
}

TEST_CASE("rotation covariance F(theta) = U^dag F(0) U") {
  const auto cfg = TrapConfig::lattice_defaults();
  const FockSpace space(12);
  const BinGrid grid{0.0, 24e-6, 25};
  for (double theta : {0.4, 1.9, 3.0}) {
    CVector phases(12);
    for (int n = 0; n < 12; ++n) phases(n) = std::polar(1.0, -n * theta);
    const CMatrix u = phases.asDiagonal();
    for (int k : {-8, 0, 5}) {
      const CMatrix f0 = build_be_observable(cfg, grid, 0.0, k, space).matrix();
      const CMatrix ft = build_be_observable(cfg, grid, theta, k, space).matrix();
      CHECK((ft - u.adjoint() * f0 * u).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("doubling quadrature nodes changes matrix elements by < 1e-8") {
  const auto cfg = TrapConfig::lattice_defaults();
  const FockSpace space(16);
  const BinGrid grid{0.0, 31e-6, 25};
  for (int k : {-20, -6, 0, 13}) {
    const CMatrix base = build_be_observable(cfg, grid, 0.7, k, space).matrix();
    const CMatrix fine = build_be_observable(cfg, grid, 0.7, k, space, {64, 16}).matrix();
    CHECK((base - fine).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("convolution limit: Richardson extrapolation in the cloud size") {
  auto cfg = TrapConfig::lattice_defaults();
  const FockSpace space(16);
  const BinGrid grid{0.0, 24e-6, 25};
  const auto psi = superposition_state({1.0, 1.0}, space);
  const auto rho = DensityOperator::from_pure(psi);
  const double s = cfg.detector_scale();
  const double theta = 0.6;
  for (int k : {-7, 0, 4}) {
    const double ideal = oracle::integrate(
        [&](double z) { return ideal_quadrature_distribution(rho, theta + std::numbers::pi / 2, z / s) / s; },
        grid.lower_edge(k), grid.upper_edge(k), 20);
    std::vector<double> f;
    for (double sigma : {20e-6, 10e-6, 5e-6}) {
      cfg.cloud_rms = sigma;
      f.push_back(expect(rho, build_be_observable(cfg, grid, theta, k, space)));
    }
    // Leading error is O(sigma^2): two Richardson levels.
    const double r1 = (4 * f[1] - f[0]) / 3;
    const double r2 = (4 * f[2] - f[1]) / 3;
    const double r = (16 * r2 - r1) / 15;
    CHECK(std::abs(f[2] - ideal) < std::abs(f[0] - ideal));
    CHECK(std::abs(r - ideal) < 1e-3 * std::abs(f[0] - ideal) + 1e-12);
  }
}

TEST_CASE("ideal quadrature distribution") {
  const FockSpace space(10);
  const auto vac = fock_state(0, space);
  for (double theta : {0.0, 1.0, 2.5}) {
    for (double x : {-1.5, 0.0, 0.7}) {
      CHECK(std::abs(ideal_quadrature_distribution(State(vac), theta, x) - std::exp(-x * x) / std::sqrt(std::numbers::pi)) <
            1e-14);
    }
  }
  CHECK(std::abs(ideal_quadrature_distribution(State(fock_state(1, space)), 0.3, 0.0)) < 1e-15);

  const auto sup = superposition_state({1.0, 1.0}, space);
  const double mean = oracle::integrate(
      [&](double x) { return x * ideal_quadrature_distribution(State(sup), 0.0, x); }, -12.0, 12.0, 40);
  CHECK(std::abs(mean - 1.0 / std::sqrt(2.0)) < 1e-12);
  const double norm =
      oracle::integrate([&](double x) { return ideal_quadrature_distribution(State(sup), 1.1, x); }, -12.0, 12.0, 40);
  CHECK(std::abs(norm - 1.0) < 1e-12);

  // Mixed-state overload agrees with the pure one.
  const auto rho = DensityOperator::from_pure(sup);
  CHECK(std::abs(ideal_quadrature_distribution(rho, 0.9, 0.4) - ideal_quadrature_distribution(State(sup), 0.9, 0.4)) <
        1e-14);
}

TEST_CASE("rotations from times") {
  const auto cfg = TrapConfig::lattice_defaults();
  const auto r = rotations_from_times(cfg, {0.0, 1.6e-6, 3.2e-6, 4.8e-6});
  CHECK(r[0] == 0.0);
  CHECK(std::abs(r[1] - 2 * std::numbers::pi * 80e3 * 1.6e-6) < 1e-15);
  CHECK(std::abs(r[3] - 2.4127) < 1e-4);
}
