#pragma once

// Maximum-entropy reconstruction on a finite observation level.
//
// The estimate has the generalized canonical form
//   rho = exp(-A) / Z,   A = sum_nu lambda_nu G_nu,
// and the multipliers are fitted by minimizing the weighted deviation
//   dF = sum_nu w_nu (mean_nu - Tr(rho G_nu))^2.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "maxent_tomo/hilbert.hpp"
#include "maxent_tomo/measurement.hpp"

namespace maxent_tomo {

// One multiplier per entry of the ObservableSet, in the same order.
struct LagrangeVector {
  RVector values;

  static LagrangeVector zeros(const ObservableSet& set);
  double lambda_n(const ObservableSet& set) const;
  // rotations x bins, same layout as MeasurementRecord::values.
  RMatrix bins(const ObservableSet& set) const;
};

struct CanonicalState {
  DensityOperator rho;
  double log_partition = 0.0;  // ln Z for the unshifted A
  LagrangeVector lambdas;
  RVector spectrum;       // eigenvalues of A, ascending
  CMatrix eigenvectors;   // columns are eigenvectors of A
  RVector populations;    // eigenvalues of rho matching `spectrum`
};

CanonicalState canonical_state(const LagrangeVector& lambdas, const ObservableSet& observables);

// Tr(rho G_nu) for each observable.
RVector model_means(const CanonicalState& state, const ObservableSet& observables);

double deviation(const CanonicalState& state, const ObservableSet& observables);

// d dF / d lambda, same layout as LagrangeVector::values.
RVector deviation_gradient(const CanonicalState& state, const ObservableSet& observables);

// J(nu, mu) = d Tr(rho G_nu) / d lambda_mu = -(Kubo-Mori covariance of G_nu, G_mu).
RMatrix mean_jacobian(const CanonicalState& state, const ObservableSet& observables);

struct FitOptions {
  int max_iter = 20000;
  double grad_tol = 1e-9;
  double f_tol = 1e-14;
  int memory = 20;
  // Largest Frobenius-norm change of the exponent A per iteration; <= 0 disables.
  double max_exponent_step = 1.0;
  int max_restarts = 3;
  std::uint64_t restart_seed = 0x5eed;
  double restart_jitter = 0.1;
  std::optional<LagrangeVector> initial;
  // Receives dF of the start point and of every accepted iterate.
  std::function<void(int, double)> on_iterate;
};

struct FitReport {
  double delta_f = 0.0;
  double entropy = 0.0;
  double nbar_fit = 0.0;
  double nbar_residual = 0.0;  // Tr(rho n) - nbar, 0 without a number observable
  int iterations = 0;
  int evaluations = 0;
  int restarts = 0;
  bool converged = false;
  std::string message;
  std::size_t bin_count = 0;
  std::vector<std::string> labels;
  RVector residuals;  // Tr(rho G_nu) - mean_nu
};

struct FitResult {
  CanonicalState state;
  FitReport report;
};

// Quasi-Newton (L-BFGS) minimization of dF with the analytic gradient. On
// non-convergence the best iterate is kept and up to `max_restarts` restarts
// from seeded jittered points are attempted; the returned report then has
// converged = false.
FitResult fit(const ObservableSet& observables, const FitOptions& options = {});

}  // namespace maxent_tomo
