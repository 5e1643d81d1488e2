#include "maxent_tomo/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "maxent_tomo/errors.hpp"

namespace maxent_tomo {

namespace {

constexpr double kPureThreshold = 1e-10;

void check_dim(int expected, int got, const char* what) {
  if (expected != got) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " + std::to_string(expected) +
                            ", got " + std::to_string(got));
  }
}

Eigen::SelfAdjointEigenSolver<CMatrix> eigh(const CMatrix& m) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(m);
  if (es.info() != Eigen::Success) throw EigError("Hermitian eigendecomposition failed to converge");
  return es;
}

}  // namespace

FockSpace::FockSpace(int dim) : dim_(dim) {
  if (dim < 2) throw InputError("Fock space dimension must be >= 2");
}

PureState PureState::normalized(CVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw InputError("state vector has zero or non-finite norm");
  return PureState(amplitudes / norm);
}

HermitianOperator::HermitianOperator(CMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionMismatch("operator matrix is not square");
  const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol) throw InputError("operator is not Hermitian (deviation " + std::to_string(asym) + ")");
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
}

DensityOperator::DensityOperator(CMatrix m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw DimensionMismatch("density matrix is not square");
  const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (asym > tol) throw InputError("density matrix is not Hermitian");
  m_ = 0.5 * (m_ + m_.adjoint()).eval();
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > tol) throw InputError("density matrix trace is " + std::to_string(tr));
  const RVector ev = eigh(m_).eigenvalues();
  if (ev.minCoeff() < -tol) throw InputError("density matrix has a negative eigenvalue");
}

DensityOperator DensityOperator::from_pure(const PureState& psi) { return DensityOperator(psi.projector()); }

double DensityOperator::expectation(const CMatrix& op) const {
  check_dim(dim(), static_cast<int>(op.rows()), "expectation");
  // Tr(rho op) = sum_ij rho_ij op_ji
  return (m_.transpose().cwiseProduct(op)).sum().real();
}

RVector DensityOperator::eigenvalues() const { return eigh(m_).eigenvalues(); }

DensityOperator to_density(const State& s) {
  if (const auto* psi = std::get_if<PureState>(&s)) return DensityOperator::from_pure(*psi);
  return std::get<DensityOperator>(s);
}

int state_dim(const State& s) {
  return std::visit([](const auto& v) { return v.dim(); }, s);
}

LadderOperators ladder_operators(const FockSpace& space) {
  const int n = space.dim();
  CMatrix a = CMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  CMatrix ad = a.adjoint();
  const double s = 1.0 / std::numbers::sqrt2;
  const cplx i(0.0, 1.0);
  CMatrix z = s * (a + ad);
  CMatrix p = (s * i) * (a - ad);
  CMatrix num = ad * a;
  return {a, ad, HermitianOperator(z), HermitianOperator(p), HermitianOperator(num)};
}

HermitianOperator number_operator(const FockSpace& space) {
  CMatrix num = CMatrix::Zero(space.dim(), space.dim());
  for (int k = 0; k < space.dim(); ++k) num(k, k) = static_cast<double>(k);
  return HermitianOperator(num);
}

PureState fock_state(int k, const FockSpace& space) {
  if (k < 0) throw InputError("Fock index must be non-negative");
  if (k >= space.dim()) {
    throw TruncationError("Fock state |" + std::to_string(k) + "> lies outside the truncated space");
  }
  CVector v = CVector::Zero(space.dim());
  v(k) = 1.0;
  return PureState::normalized(v);
}

PureState superposition_state(const std::vector<cplx>& coeffs, const FockSpace& space) {
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    total += std::norm(coeffs[n]);
    if (static_cast<int>(n) >= space.dim()) outside += std::norm(coeffs[n]);
  }
  if (!(total > 0.0)) throw InputError("superposition has zero norm");
  if (outside / total > kTruncationLeakage) {
    throw TruncationError("superposition has weight " + std::to_string(outside / total) +
                          " above the truncation level");
  }
  CVector v = CVector::Zero(space.dim());
  for (int n = 0; n < space.dim() && n < static_cast<int>(coeffs.size()); ++n) v(n) = coeffs[n];
  return PureState::normalized(v);
}

PureState even_cat_state(cplx alpha, const FockSpace& space) {
  // Untruncated weights |alpha^n/sqrt(n!)|^2 (1+(-1)^n)^2, accumulated in the log domain.
  const double r2 = std::norm(alpha);
  const double log_r2 = r2 > 0.0 ? std::log(r2) : -INFINITY;
  double inside = 0.0;
  double outside = 0.0;
  const int n_max = std::max(space.dim(), static_cast<int>(r2 + 40.0 * std::sqrt(r2 + 1.0) + 40.0));
  for (int n = 0; n < n_max; n += 2) {
    const double w = n == 0 ? 1.0 : std::exp(n * log_r2 - r2 - std::lgamma(n + 1.0));
    (n < space.dim() ? inside : outside) += w;
  }
  if (!(inside > 0.0) || outside / (inside + outside) > kTruncationLeakage) {
    throw TruncationError("even cat state does not fit in the truncated space");
  }
  CVector v = CVector::Zero(space.dim());
  cplx amp = 1.0;
  for (int n = 0; n < space.dim(); ++n) {
    if (n > 0) amp *= alpha / std::sqrt(static_cast<double>(n));
    if (n % 2 == 0) v(n) = amp;
  }
  return PureState::normalized(v);
}

DensityOperator thermal_state(double nbar, const FockSpace& space) {
  if (!(nbar >= 0.0)) throw InputError("thermal mean phonon number must be >= 0");
  const double q = nbar / (1.0 + nbar);
  if (std::pow(q, space.dim()) > kTruncationLeakage) {
    throw TruncationError("thermal state leaks above the truncation level");
  }
  CMatrix m = CMatrix::Zero(space.dim(), space.dim());
  double norm = 0.0;
  double w = 1.0;
  for (int n = 0; n < space.dim(); ++n) {
    m(n, n) = w;
    norm += w;
    w *= q;
  }
  return DensityOperator(m / norm);
}

State make_state(const StateSpec& spec, const FockSpace& space) {
  return std::visit(
      [&](const auto& s) -> State {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FockSpec>) return fock_state(s.k, space);
        else if constexpr (std::is_same_v<T, SuperpositionSpec>) return superposition_state(s.coeffs, space);
        else if constexpr (std::is_same_v<T, EvenCatSpec>) return even_cat_state(s.alpha, space);
        else return thermal_state(s.nbar, space);
      },
      spec);
}

namespace {
CVector rotation_phases(int dim, double theta) {
  CVector ph(dim);
  for (int n = 0; n < dim; ++n) ph(n) = std::polar(1.0, -n * theta);
  return ph;
}
}  // namespace

PureState harmonic_evolve(const PureState& psi, double theta) {
  return PureState::normalized(psi.amplitudes().cwiseProduct(rotation_phases(psi.dim(), theta)));
}

DensityOperator harmonic_evolve(const DensityOperator& rho, double theta) {
  const CVector ph = rotation_phases(rho.dim(), theta);
  CMatrix m = ph.asDiagonal() * rho.matrix() * ph.conjugate().asDiagonal();
  return DensityOperator(m);
}

State harmonic_evolve(const State& s, double theta) {
  return std::visit([&](const auto& v) -> State { return harmonic_evolve(v, theta); }, s);
}

CMatrix hermitian_expm(const CMatrix& a, int sign) {
  if (sign != 1 && sign != -1) throw InputError("hermitian_expm sign must be +1 or -1");
  const auto es = eigh(0.5 * (a + a.adjoint()));
  const RVector e = (static_cast<double>(sign) * es.eigenvalues()).array().exp();
  return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix hermitian_unitary(const CMatrix& a, double t) {
  const auto es = eigh(0.5 * (a + a.adjoint()));
  CVector ph(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < ph.size(); ++i) ph(i) = std::polar(1.0, -t * es.eigenvalues()(i));
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix hermitian_expm(const HermitianOperator& a, int sign) { return hermitian_expm(a.matrix(), sign); }

RVector hermite_functions(int count, double x) {
  RVector psi = RVector::Zero(std::max(count, 0));
  if (count <= 0) return psi;
  psi(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (count > 1) psi(1) = std::numbers::sqrt2 * x * psi(0);
  for (int n = 1; n + 1 < count; ++n) {
    psi(n + 1) = std::sqrt(2.0 / (n + 1)) * x * psi(n) - std::sqrt(static_cast<double>(n) / (n + 1)) * psi(n - 1);
  }
  return psi;
}

cplx wavefunction(int n, double x, Basis basis) {
  if (n < 0) throw InputError("wavefunction level must be non-negative");
  const double v = hermite_functions(n + 1, x)(n);
  if (basis == Basis::position) return v;
  static constexpr cplx kPhase[4] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};  // (-i)^n
  return kPhase[n % 4] * v;
}

double von_neumann_entropy(const DensityOperator& rho) {
  double s = 0.0;
  for (double p : rho.eigenvalues()) {
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double delta_rho(const DensityOperator& a, const DensityOperator& b) {
  check_dim(a.dim(), b.dim(), "delta_rho");
  return (a.matrix() - b.matrix()).squaredNorm();
}

double fidelity(const PureState& psi, const DensityOperator& rho) {
  check_dim(psi.dim(), rho.dim(), "fidelity");
  return (psi.amplitudes().adjoint() * rho.matrix() * psi.amplitudes())(0, 0).real();
}

double fidelity(const DensityOperator& a, const DensityOperator& b) {
  check_dim(a.dim(), b.dim(), "fidelity");
  const auto es = eigh(a.matrix());
  const int top = a.dim() - 1;
  if (es.eigenvalues()(top) > 1.0 - kPureThreshold) {
    const CVector v = es.eigenvectors().col(top);
    return (v.adjoint() * b.matrix() * v)(0, 0).real();
  }
  const RVector sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix root = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();
  const CMatrix inner = root * b.matrix() * root;
  const RVector ev = eigh(0.5 * (inner + inner.adjoint())).eigenvalues();
  const double tr = ev.cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

StateMetrics metrics(const DensityOperator& a, const DensityOperator& b) {
  return {von_neumann_entropy(a), delta_rho(a, b), fidelity(a, b)};
}

}  // namespace maxent_tomo
