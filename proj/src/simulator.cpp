#include "maxent_tomo/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "maxent_tomo/errors.hpp"

namespace maxent_tomo {

MeasurementRecord simulate_ideal(const DensityOperator& rho, const ObservableSet& observables) {
  if (rho.dim() != observables.dim()) {
    throw DimensionMismatch("state dimension " + std::to_string(rho.dim()) + " does not match observables (" +
                            std::to_string(observables.dim()) + ")");
  }
  if (!observables.grid) throw InputError("observable set has no bin grid");
  MeasurementRecord rec;
  rec.rotations = observables.rotations;
  rec.grid = *observables.grid;
  rec.values = RMatrix::Zero(static_cast<Eigen::Index>(rec.rotations.size()), rec.grid.count());
  rec.provenance = Provenance::ideal;
  for (const auto& o : observables.entries) {
    const double v = rho.expectation(o.op.matrix());
    if (o.kind == ObservableKind::bin) {
      rec.values(o.rotation, o.bin + rec.grid.half_count) = v;
    } else if (o.kind == ObservableKind::number) {
      rec.nbar = v;
    }
  }
  return rec;
}

MeasurementRecord simulate_ideal(const State& state, const ObservableSet& observables) {
  return simulate_ideal(to_density(state), observables);
}

MeasurementRecord add_noise(const MeasurementRecord& record, const NoiseSpec& spec) {
  if (!(spec.eta >= 0.0)) throw InputError("noise parameter eta must be >= 0");
  if (record.provenance != Provenance::ideal) throw InputError("noise can only be added to an ideal record");
  MeasurementRecord out = record;
  out.provenance = Provenance::noisy;
  out.seed = spec.seed;
  out.eta = spec.eta;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index j = 0; j < out.values.rows(); ++j) {
    for (Eigen::Index k = 0; k < out.values.cols(); ++k) {
      const double f = record.values(j, k);
      const double xi = normal(rng);
      if (spec.eta == 0.0) continue;
      out.values(j, k) = std::max(0.0, f + spec.eta * xi * std::sqrt(std::max(f, 0.0)));
    }
  }
  if (spec.nbar_override) {
    if (!(*spec.nbar_override >= 0.0)) throw InputError("noisy mean phonon number must be >= 0");
    out.nbar = *spec.nbar_override;
  }
  return out;
}

ObservableSet with_means(ObservableSet observables, const MeasurementRecord& record) {
  if (!observables.grid || observables.grid->count() != record.grid.count() ||
      observables.rotations.size() != record.rotations.size()) {
    throw DimensionMismatch("record layout does not match the observation level");
  }
  for (auto& o : observables.entries) {
    if (o.kind == ObservableKind::bin) {
      o.mean = record.values(o.rotation, o.bin + record.grid.half_count);
    } else if (o.kind == ObservableKind::number) {
      o.mean = record.nbar;
    }
  }
  return observables;
}

namespace {

CMatrix momentum_squared(int dim) {
  const CMatrix p = ladder_operators(FockSpace(dim)).momentum.matrix();
  return p * p;
}

// Free-flight propagator in a working space large enough that the truncated p^2
// does not affect the result: the weight of `probe` near the working-space edge
// must be negligible.
template <typename Apply>
auto propagate_enlarged(int target_dim, double kappa, Apply apply) {
  constexpr int kEdge = 16;
  constexpr int kMaxDim = 2048;
  int work = std::max(2 * target_dim, target_dim + 64);
  while (true) {
    const CMatrix u = hermitian_unitary(momentum_squared(work), kappa);
    auto [result, edge_weight] = apply(u, work, kEdge);
    if (edge_weight < 1e-14 || work >= kMaxDim) {
      if (edge_weight >= 1e-10) throw TruncationError("free flight does not converge in the working space");
      return result;
    }
    work *= 2;
  }
}

}  // namespace

PureState free_flight(const PureState& initial, double kappa, const FockSpace& space) {
  if (initial.dim() > space.dim()) throw DimensionMismatch("initial state is larger than the target space");
  if (kappa == 0.0) {
    CVector v = CVector::Zero(space.dim());
    v.head(initial.dim()) = initial.amplitudes();
    return PureState::normalized(v);
  }
  const CVector evolved = propagate_enlarged(space.dim(), kappa, [&](const CMatrix& u, int work, int edge) {
    CVector v = CVector::Zero(work);
    v.head(initial.dim()) = initial.amplitudes();
    CVector out = u * v;
    return std::pair{out, out.tail(edge).squaredNorm()};
  });
  const double leak = evolved.tail(evolved.size() - space.dim()).squaredNorm();
  if (leak > kTruncationLeakage) {
    throw TruncationError("free-flight state leaks " + std::to_string(leak) + " above level " +
                          std::to_string(space.dim() - 1));
  }
  return PureState::normalized(evolved.head(space.dim()));
}

PureState prepare_free_expansion(const TrapConfig& cfg, double t1, const FockSpace& space) {
  if (!(t1 >= 0.0)) throw InputError("free-flight time must be >= 0");
  return free_flight(fock_state(0, space), 0.5 * cfg.omega_z * t1, space);
}

double estimate_nbar_heuristic(const TrapConfig& cfg, double t1) {
  if (!(t1 >= 0.0)) throw InputError("free-flight time must be >= 0");
  const double dx = cfg.dv0 * t1;
  return dx * dx / (4.0 * cfg.dz0 * cfg.dz0);
}

State prepare_state(const TrapConfig& cfg, const PrepSpec& spec, const FockSpace& space) {
  if (spec.rotation_time < 0.0 || (spec.free_flight_t1 && *spec.free_flight_t1 < 0.0)) {
    throw InputError("preparation times must be >= 0");
  }
  State state = make_state(spec.initial, space);
  if (spec.free_flight_t1 && *spec.free_flight_t1 > 0.0) {
    const double kappa = 0.5 * cfg.omega_z * *spec.free_flight_t1;
    if (const auto* psi = std::get_if<PureState>(&state)) {
      state = free_flight(*psi, kappa, space);
    } else {
      const CMatrix& rho = std::get<DensityOperator>(state).matrix();
      CMatrix evolved = propagate_enlarged(space.dim(), kappa, [&](const CMatrix& u, int work, int edge) {
        CMatrix big = CMatrix::Zero(work, work);
        big.topLeftCorner(rho.rows(), rho.cols()) = rho;
        CMatrix out = u * big * u.adjoint();
        return std::pair{out, out.diagonal().tail(edge).real().sum()};
      });
      const CMatrix kept = evolved.topLeftCorner(space.dim(), space.dim());
      const double leak = 1.0 - kept.trace().real();
      if (leak > kTruncationLeakage) throw TruncationError("free-flight state leaks above the truncation level");
      state = DensityOperator(kept / kept.trace().real(), 1e-9);
    }
  }
  return harmonic_evolve(state, cfg.omega_z * spec.rotation_time);
}

}  // namespace maxent_tomo
