#pragma once

// Truncated Fock-space algebra for a single harmonic mode.
//
// All quantities are in dimensionless oscillator units:
//   z = (a + a^dag)/sqrt(2),  p = i (a - a^dag)/sqrt(2)
// so the vacuum has rms 1/sqrt(2) in each quadrature. Note that p as defined
// here is the negative of the kinetic momentum; the momentum wavefunctions,
// Wigner p-axis and ballistic-expansion velocities all use the kinetic
// momentum p_kin = -p, whose eigenstates satisfy <p_kin|n> = (-i)^n psi_n.

#include <complex>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace maxent_tomo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kTruncationLeakage = 1e-6;
inline constexpr int kDefaultFockDim = 16;

class FockSpace {
 public:
  explicit FockSpace(int dim);
  int dim() const { return dim_; }
  bool operator==(const FockSpace&) const = default;

 private:
  int dim_;
};

class PureState {
 public:
  // Normalizes the given amplitudes; throws on a zero vector.
  static PureState normalized(CVector amplitudes);

  const CVector& amplitudes() const { return amps_; }
  int dim() const { return static_cast<int>(amps_.size()); }
  CMatrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  explicit PureState(CVector a) : amps_(std::move(a)) {}
  CVector amps_;
};

class HermitianOperator {
 public:
  // Validates Hermiticity within `tol` (max-abs of A - A^dag) and symmetrizes.
  explicit HermitianOperator(CMatrix m, double tol = 1e-10);

  const CMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }

 private:
  CMatrix m_;
};

class DensityOperator {
 public:
  // Validates Hermiticity, unit trace and PSD within `tol`.
  explicit DensityOperator(CMatrix m, double tol = 1e-10);
  static DensityOperator from_pure(const PureState& psi);

  const CMatrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double expectation(const CMatrix& op) const;
  RVector eigenvalues() const;

 private:
  CMatrix m_;
};

using State = std::variant<PureState, DensityOperator>;

DensityOperator to_density(const State& s);
int state_dim(const State& s);

struct LadderOperators {
  CMatrix annihilation;
  CMatrix creation;
  HermitianOperator position;  // (a + a^dag)/sqrt(2)
  HermitianOperator momentum;  // i (a - a^dag)/sqrt(2)
  HermitianOperator number;    // a^dag a
};

LadderOperators ladder_operators(const FockSpace& space);
HermitianOperator number_operator(const FockSpace& space);

// State factories. Each checks that the probability weight the untruncated
// state carries above level N-1 is below kTruncationLeakage.
PureState fock_state(int k, const FockSpace& space);
PureState superposition_state(const std::vector<cplx>& coeffs, const FockSpace& space);
PureState even_cat_state(cplx alpha, const FockSpace& space);
DensityOperator thermal_state(double nbar, const FockSpace& space);

struct FockSpec { int k; };
struct SuperpositionSpec { std::vector<cplx> coeffs; };
struct EvenCatSpec { cplx alpha; };
struct ThermalSpec { double nbar; };
using StateSpec = std::variant<FockSpec, SuperpositionSpec, EvenCatSpec, ThermalSpec>;

State make_state(const StateSpec& spec, const FockSpace& space);

// Free harmonic evolution by phase theta = omega * tau; c_n -> e^{-i n theta} c_n.
PureState harmonic_evolve(const PureState& psi, double theta);
DensityOperator harmonic_evolve(const DensityOperator& rho, double theta);
State harmonic_evolve(const State& s, double theta);

// exp(sign * A) for Hermitian A via eigendecomposition.
CMatrix hermitian_expm(const HermitianOperator& a, int sign);
CMatrix hermitian_expm(const CMatrix& a, int sign);

// exp(-i t A) for Hermitian A via eigendecomposition.
CMatrix hermitian_unitary(const CMatrix& a, double t);

enum class Basis { position, momentum };

// psi_0(x) .. psi_{count-1}(x), normalized Hermite functions.
RVector hermite_functions(int count, double x);
cplx wavefunction(int n, double x, Basis basis);

double von_neumann_entropy(const DensityOperator& rho);
// Squared Hilbert-Schmidt distance sum_mn |(a-b)_mn|^2.
double delta_rho(const DensityOperator& a, const DensityOperator& b);
// <psi|rho|psi> if `a` is pure (rank one), Uhlmann fidelity otherwise.
double fidelity(const DensityOperator& a, const DensityOperator& b);
double fidelity(const PureState& psi, const DensityOperator& rho);

struct StateMetrics {
  double entropy;
  double delta_rho;
  double fidelity;
};

StateMetrics metrics(const DensityOperator& a, const DensityOperator& b);

}  // namespace maxent_tomo
