#include "maxent_tomo/maxent.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/lbfgs.hpp"

namespace maxent_tomo {

namespace {

constexpr double kConfluent = 1e-12;

void check_lambdas(const LagrangeVector& lambdas, const ObservableSet& set) {
  if (set.entries.empty()) throw InputError("observation level is empty");
  if (lambdas.values.size() != static_cast<Eigen::Index>(set.size())) {
    throw DimensionMismatch("Lagrange vector length does not match the observation level");
  }
  if (!lambdas.values.allFinite()) throw InputError("Lagrange multipliers must be finite");
}

// Observables packed as columns [Re G ; Im G] so that Tr(X G) for Hermitian X
// is a dot product with [Re X ; Im X].
class PackedObservables {
 public:
  explicit PackedObservables(const ObservableSet& set) : dim_(set.dim()), cols_(2 * dim_ * dim_, set.size()) {
    set.validate();
    for (std::size_t i = 0; i < set.size(); ++i) cols_.col(static_cast<Eigen::Index>(i)) = pack(set.entries[i].op.matrix());
  }

  RVector pack(const CMatrix& m) const {
    RVector v(2 * dim_ * dim_);
    v.head(dim_ * dim_) = m.real().reshaped();
    v.tail(dim_ * dim_) = m.imag().reshaped();
    return v;
  }

  CMatrix unpack(const RVector& v) const {
    CMatrix m(dim_, dim_);
    m.real() = v.head(dim_ * dim_).reshaped(dim_, dim_);
    m.imag() = v.tail(dim_ * dim_).reshaped(dim_, dim_);
    return m;
  }

  // Tr(X G_nu) = sum_ij X_ij conj(G_ij) for Hermitian G, real for Hermitian X.
  RVector traces(const CMatrix& x) const { return cols_.transpose() * pack(x); }
  CMatrix combine(const RVector& coeffs) const { return unpack(cols_ * coeffs); }
  int dim() const { return dim_; }

 private:
  int dim_;
  RMatrix cols_;
};

struct Spectral {
  RVector spectrum;
  CMatrix vectors;
  RVector weights;  // exp(-(d_a - d_min)), unnormalized
  double z_shifted = 0.0;
  double d_min = 0.0;
  CMatrix rho;
};

Spectral decompose(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()));
  if (es.info() != Eigen::Success) throw EigError("eigendecomposition of the canonical exponent failed");
  Spectral s;
  s.spectrum = es.eigenvalues();
  s.vectors = es.eigenvectors();
  s.d_min = s.spectrum(0);
  s.weights = (-(s.spectrum.array() - s.d_min)).exp();
  s.z_shifted = s.weights.sum();
  s.rho = s.vectors * (s.weights / s.z_shifted).asDiagonal() * s.vectors.adjoint();
  s.rho = 0.5 * (s.rho + s.rho.adjoint()).eval();
  return s;
}

// Divided differences of x -> exp(-(x - d_min)) on the spectrum.
RMatrix divided_differences(const Spectral& s) {
  const Eigen::Index n = s.spectrum.size();
  RMatrix phi(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      const double gap = std::abs(s.spectrum(a) - s.spectrum(b));
      const double top = std::max(s.weights(a), s.weights(b));
      phi(a, b) = gap < kConfluent ? top : top * (-std::expm1(-gap)) / gap;
    }
  }
  return phi;
}

// V ((V^dag X V) o Phi) V^dag: the Frechet derivative of exp(-A) along X, up to sign.
CMatrix frechet(const Spectral& s, const RMatrix& phi, const CMatrix& x) {
  const CMatrix xt = s.vectors.adjoint() * x * s.vectors;
  return s.vectors * xt.cwiseProduct(phi.cast<cplx>()) * s.vectors.adjoint();
}

struct Evaluation {
  Spectral spectral;
  RVector means;
  RVector residuals;
  double value = 0.0;
};

RVector target_means(const ObservableSet& set) {
  if (!set.has_means()) throw MissingMeans("every observable needs a finite mean value");
  RVector t(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) t(static_cast<Eigen::Index>(i)) = *set.entries[i].mean;
  return t;
}

RVector weights_of(const ObservableSet& set) {
  RVector w(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) w(static_cast<Eigen::Index>(i)) = set.entries[i].effective_weight();
  return w;
}

class Problem {
 public:
  explicit Problem(const ObservableSet& set)
      : packed_(set), targets_(target_means(set)), weights_(weights_of(set)) {}

  double evaluate(const RVector& lambdas, RVector* grad) const {
    Evaluation e;
    e.spectral = decompose(packed_.combine(lambdas));
    e.means = packed_.traces(e.spectral.rho);
    e.residuals = e.means - targets_;
    e.value = (weights_.array() * e.residuals.array().square()).sum();
    if (grad) *grad = gradient(e);
    return e.value;
  }

  RVector gradient(const Evaluation& e) const {
    const RVector c = 2.0 * weights_.cwiseProduct(e.residuals);
    const CMatrix b = packed_.combine(c);
    const CMatrix k = frechet(e.spectral, divided_differences(e.spectral), b);
    return -packed_.traces(k) / e.spectral.z_shifted + c.dot(e.means) * e.means;
  }

  double exponent_norm(const RVector& step) const { return packed_.combine(step).norm(); }

  Evaluation evaluation_at(const CanonicalState& state) const {
    Evaluation e;
    e.spectral.spectrum = state.spectrum;
    e.spectral.vectors = state.eigenvectors;
    e.spectral.d_min = state.spectrum(0);
    e.spectral.weights = (-(state.spectrum.array() - e.spectral.d_min)).exp();
    e.spectral.z_shifted = e.spectral.weights.sum();
    e.spectral.rho = state.rho.matrix();
    e.means = packed_.traces(e.spectral.rho);
    e.residuals = e.means - targets_;
    e.value = (weights_.array() * e.residuals.array().square()).sum();
    return e;
  }

 private:
  PackedObservables packed_;
  RVector targets_;
  RVector weights_;
};

}  // namespace

LagrangeVector LagrangeVector::zeros(const ObservableSet& set) {
  return {RVector::Zero(static_cast<Eigen::Index>(set.size()))};
}

double LagrangeVector::lambda_n(const ObservableSet& set) const {
  const auto idx = set.number_index();
  return idx ? values(static_cast<Eigen::Index>(*idx)) : 0.0;
}

RMatrix LagrangeVector::bins(const ObservableSet& set) const {
  if (!set.grid) throw InputError("observable set has no bin grid");
  RMatrix out = RMatrix::Zero(static_cast<Eigen::Index>(set.rotations.size()), set.grid->count());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto& o = set.entries[i];
    if (o.kind == ObservableKind::bin) out(o.rotation, o.bin + set.grid->half_count) = values(static_cast<Eigen::Index>(i));
  }
  return out;
}

CanonicalState canonical_state(const LagrangeVector& lambdas, const ObservableSet& observables) {
  check_lambdas(lambdas, observables);
  const PackedObservables packed(observables);
  const Spectral s = decompose(packed.combine(lambdas.values));
  return {DensityOperator(s.rho), -s.d_min + std::log(s.z_shifted), lambdas, s.spectrum, s.vectors,
          s.weights / s.z_shifted};
}

RVector model_means(const CanonicalState& state, const ObservableSet& observables) {
  check_lambdas(state.lambdas, observables);
  return PackedObservables(observables).traces(state.rho.matrix());
}

double deviation(const CanonicalState& state, const ObservableSet& observables) {
  check_lambdas(state.lambdas, observables);
  return Problem(observables).evaluation_at(state).value;
}

RVector deviation_gradient(const CanonicalState& state, const ObservableSet& observables) {
  check_lambdas(state.lambdas, observables);
  const Problem problem(observables);
  return problem.gradient(problem.evaluation_at(state));
}

RMatrix mean_jacobian(const CanonicalState& state, const ObservableSet& observables) {
  check_lambdas(state.lambdas, observables);
  const PackedObservables packed(observables);
  Spectral s;
  s.spectrum = state.spectrum;
  s.vectors = state.eigenvectors;
  s.d_min = state.spectrum(0);
  s.weights = (-(state.spectrum.array() - s.d_min)).exp();
  s.z_shifted = s.weights.sum();
  const RMatrix phi = divided_differences(s);
  const RVector means = packed.traces(state.rho.matrix());
  const Eigen::Index m = static_cast<Eigen::Index>(observables.size());
  RMatrix jac(m, m);
  for (Eigen::Index mu = 0; mu < m; ++mu) {
    const CMatrix d = frechet(s, phi, observables.entries[mu].op.matrix());
    jac.col(mu) = -packed.traces(d) / s.z_shifted + means(mu) * means;
  }
  return jac;
}

FitResult fit(const ObservableSet& observables, const FitOptions& options) {
  if (observables.entries.empty()) throw InputError("observation level is empty");
  const Problem problem(observables);

  RVector start = options.initial ? options.initial->values : RVector::Zero(static_cast<Eigen::Index>(observables.size()));
  check_lambdas({start}, observables);

  LbfgsOptions lo;
  lo.memory = options.memory;
  lo.max_iter = options.max_iter;
  lo.grad_tol = options.grad_tol;
  lo.f_tol = options.f_tol;
  lo.on_iterate = options.on_iterate;
  if (options.max_exponent_step > 0.0) {
    lo.step_norm = [&](const RVector& d) { return problem.exponent_norm(d); };
    lo.max_step = options.max_exponent_step;
  }
  const Objective objective = [&](const RVector& x, RVector& g) { return problem.evaluate(x, &g); };

  LbfgsResult best = lbfgs_minimize(objective, start, lo);
  int iterations = best.iterations;
  int evaluations = best.evaluations;
  int restarts = 0;
  std::mt19937_64 rng(options.restart_seed);
  std::normal_distribution<double> normal(0.0, options.restart_jitter);
  while (!best.converged && restarts < options.max_restarts) {
    ++restarts;
    RVector jittered = best.x;
    for (Eigen::Index i = 0; i < jittered.size(); ++i) jittered(i) += normal(rng);
    LbfgsResult trial = lbfgs_minimize(objective, jittered, lo);
    iterations += trial.iterations;
    evaluations += trial.evaluations;
    if (trial.converged || trial.f < best.f) best = std::move(trial);
  }

  FitResult result{canonical_state({best.x}, observables), {}};
  FitReport& rep = result.report;
  const Evaluation e = problem.evaluation_at(result.state);
  rep.delta_f = e.value;
  rep.entropy = von_neumann_entropy(result.state.rho);
  rep.iterations = iterations;
  rep.evaluations = evaluations;
  rep.restarts = restarts;
  rep.converged = best.converged;
  rep.message = best.message;
  rep.residuals = e.residuals;
  for (const auto& o : observables.entries) {
    rep.labels.push_back(o.label());
    if (o.kind == ObservableKind::bin) ++rep.bin_count;
  }
  const FockSpace space(observables.dim());
  rep.nbar_fit = result.state.rho.expectation(number_operator(space).matrix());
  if (const auto idx = observables.number_index()) rep.nbar_residual = e.residuals(static_cast<Eigen::Index>(*idx));
  return result;
}

}  // namespace maxent_tomo
