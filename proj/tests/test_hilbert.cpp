#include <cmath>
#include <numbers>

#include "doctest.h"
#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/hilbert.hpp"
#include "oracles.hpp"

using namespace maxent_tomo;

TEST_CASE("Fock space needs at least two levels") {
  CHECK_THROWS_AS(FockSpace(1), InputError);
  CHECK(FockSpace(2).dim() == 2);
}

TEST_CASE("ladder operators") {
  const FockSpace space(8);
  const auto ops = ladder_operators(space);
  const CMatrix comm = ops.annihilation * ops.creation - ops.creation * ops.annihilation;
  for (int i = 0; i < 7; ++i) CHECK(std::abs(comm(i, i) - 1.0) < 1e-14);
  CHECK(std::abs(comm(7, 7) + 7.0) < 1e-13);
  for (int n = 0; n < 8; ++n) CHECK(std::abs(ops.number.matrix()(n, n) - double(n)) < 1e-14);

  // i [z, p] is the identity away from the truncation edge.
  const CMatrix zp = cplx(0, 1) * (ops.position.matrix() * ops.momentum.matrix() -
                                   ops.momentum.matrix() * ops.position.matrix());
  CHECK((zp.topLeftCorner(7, 7) - CMatrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK((number_operator(space).matrix() - ops.number.matrix()).norm() < 1e-13);
}

TEST_CASE("state validation") {
  CHECK_THROWS_AS(PureState::normalized(CVector::Zero(3)), InputError);
  const auto psi = PureState::normalized(CVector::Constant(4, cplx(2.0, 0.0)));
  CHECK(std::abs(psi.amplitudes().norm() - 1.0) < 1e-15);

  CMatrix bad(2, 2);
  bad << 1.0, cplx(0, 1), 0.0, 0.0;
  CHECK_THROWS_AS(HermitianOperator{bad}, InputError);

  CMatrix not_unit = CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(DensityOperator{not_unit}, InputError);
  CMatrix negative(2, 2);
  negative << 1.2, 0.0, 0.0, -0.2;
  CHECK_THROWS_AS(DensityOperator{negative}, InputError);
  CHECK_NOTHROW(DensityOperator(0.5 * CMatrix::Identity(2, 2)));
}

TEST_CASE("state factories") {
  const FockSpace space(16);
  CHECK(std::abs(fock_state(3, space).amplitudes()(3) - 1.0) < 1e-15);
  CHECK_THROWS_AS(fock_state(16, space), TruncationError);

  const auto sup = superposition_state({1.0, 1.0}, space);
  CHECK(std::abs(sup.amplitudes()(0) - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(DensityOperator::from_pure(sup).expectation(number_operator(space).matrix()) - 0.5) < 1e-14);

  // Even cat: nbar = |alpha|^2 tanh |alpha|^2.
  const auto cat = even_cat_state(std::sqrt(2.0), space);
  const double nbar = DensityOperator::from_pure(cat).expectation(number_operator(space).matrix());
  CHECK(std::abs(nbar - 2.0 * std::tanh(2.0)) < 1e-6);
  CHECK(std::abs(nbar - 1.928) < 1e-3);
  for (int n = 1; n < 16; n += 2) CHECK(std::abs(cat.amplitudes()(n)) < 1e-15);
  CHECK_THROWS_AS(even_cat_state(3.0, space), TruncationError);

  const auto th = thermal_state(0.5, FockSpace(32));
  for (int n = 0; n < 10; ++n) {
    CHECK(std::abs(th.matrix()(n, n).real() - std::pow(1.0 / 3.0, n) * 2.0 / 3.0) < 1e-14);
  }
  CHECK_THROWS_AS(thermal_state(2.0, FockSpace(8)), TruncationError);
}

TEST_CASE("make_state dispatches on the spec") {
  const FockSpace space(10);
  CHECK(state_dim(make_state(FockSpec{2}, space)) == 10);
  CHECK(std::holds_alternative<DensityOperator>(make_state(ThermalSpec{0.1}, space)));
  CHECK(std::holds_alternative<PureState>(make_state(EvenCatSpec{1.0}, space)));
}

TEST_CASE("hermitian_expm agrees with the Taylor oracle") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + trial % 8;
    const CMatrix a = oracle::random_hermitian(n, rng, 0.7);
    for (int sign : {-1, 1}) {
      const CMatrix ours = hermitian_expm(a, sign);
      const CMatrix ref = oracle::taylor_expm(a, sign);
      CHECK((ours - ref).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, ref.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("hermitian_unitary is unitary and matches exp(-itA)") {
  std::mt19937_64 rng(5);
  const CMatrix a = oracle::random_hermitian(6, rng);
  const CMatrix u = hermitian_unitary(a, 0.37);
  CHECK((u * u.adjoint() - CMatrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-13);
  const CMatrix ref = oracle::taylor_expm(cplx(0, -0.37) * a, 1);
  CHECK((u - ref).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("harmonic evolution") {
  const FockSpace space(12);
  const auto cat = even_cat_state(1.2, space);
  const auto full = harmonic_evolve(cat, 2.0 * std::numbers::pi);
  CHECK((full.amplitudes() - cat.amplitudes()).norm() < 1e-13);
  const auto twice = harmonic_evolve(harmonic_evolve(cat, 0.3), 0.4);
  CHECK((twice.amplitudes() - harmonic_evolve(cat, 0.7).amplitudes()).norm() < 1e-14);
  const auto rho = harmonic_evolve(DensityOperator::from_pure(cat), 0.7);
  CHECK((rho.matrix() - harmonic_evolve(cat, 0.7).projector()).norm() < 1e-14);
}

TEST_CASE("Hermite functions agree with the explicit polynomial") {
  for (double x : {-4.5, -1.3, 0.0, 0.2, 2.7, 6.0}) {
    const RVector h = hermite_functions(13, x);
    for (int n = 0; n < 13; ++n) {
      const double ref = oracle::hermite_explicit(n, x);
      CHECK(std::abs(h(n) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)));
    }
  }
  // Orthonormality by quadrature.
  for (int m = 0; m < 6; ++m) {
    for (int n = 0; n < 6; ++n) {
      const double ip = oracle::integrate([&](double x) { return hermite_functions(6, x)(m) * hermite_functions(6, x)(n); },
                                          -12.0, 12.0, 40);
      CHECK(std::abs(ip - (m == n ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("momentum wavefunctions carry the (-i)^n phase") {
  for (int n = 0; n < 5; ++n) {
    const cplx expect = std::pow(cplx(0, -1), n) * oracle::hermite_explicit(n, 0.8);
    CHECK(std::abs(wavefunction(n, 0.8, Basis::momentum) - expect) < 1e-13);
    CHECK(std::abs(wavefunction(n, 0.8, Basis::position) - oracle::hermite_explicit(n, 0.8)) < 1e-13);
  }
}

TEST_CASE("entropy, distance and fidelity") {
  const FockSpace space(6);
  const DensityOperator mixed(CMatrix::Identity(6, 6) / 6.0);
  CHECK(std::abs(von_neumann_entropy(mixed) - std::log(6.0)) < 1e-13);
  const auto pure = DensityOperator::from_pure(fock_state(2, space));
  CHECK(std::abs(von_neumann_entropy(pure)) < 1e-12);
  CHECK(delta_rho(mixed, mixed) == 0.0);
  CHECK(std::abs(delta_rho(pure, mixed) - (25.0 / 36.0 + 5.0 / 36.0)) < 1e-14);
  CHECK(std::abs(fidelity(pure, pure) - 1.0) < 1e-12);
  CHECK(std::abs(fidelity(pure, mixed) - 1.0 / 6.0) < 1e-12);

  // Commuting states: (sum sqrt(p q))^2.
  RVector p(3), q(3);
  p << 0.5, 0.3, 0.2;
  q << 0.2, 0.2, 0.6;
  const DensityOperator a(p.cast<cplx>().asDiagonal().toDenseMatrix());
  const DensityOperator b(q.cast<cplx>().asDiagonal().toDenseMatrix());
  const double ref = std::pow((p.array() * q.array()).sqrt().sum(), 2);
  CHECK(std::abs(fidelity(a, b) - ref) < 1e-12);
  CHECK(std::abs(fidelity(b, a) - ref) < 1e-12);

  const auto m = metrics(a, b);
  CHECK(std::abs(m.entropy - von_neumann_entropy(a)) < 1e-15);
  CHECK(std::abs(m.fidelity - ref) < 1e-12);

  const auto psi = superposition_state({1.0, 1.0}, space);
  CHECK(std::abs(fidelity(psi, mixed) - 1.0 / 6.0) < 1e-13);
}
