#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "maxent_tomo/hilbert.hpp"
#include "maxent_tomo/measurement.hpp"

namespace maxent_tomo {

enum class Provenance { ideal, noisy, file };

struct MeasurementRecord {
  std::vector<double> rotations;  // theta_j
  BinGrid grid;
  RMatrix values;  // rotations x bins, bin k at column k + half_count
  double nbar = 0.0;
  Provenance provenance = Provenance::ideal;
  std::uint64_t seed = 0;
  double eta = 0.0;
};

struct NoiseSpec {
  double eta = 0.0;
  std::uint64_t seed = 0;
  // Replaces the record's mean phonon number when set (the "measured" value).
  std::optional<double> nbar_override;
};

MeasurementRecord simulate_ideal(const DensityOperator& rho, const ObservableSet& observables);
MeasurementRecord simulate_ideal(const State& state, const ObservableSet& observables);

// F' = F + eta xi sqrt(F) with xi ~ N(0,1) drawn row-major over (j, k); negative
// results are clamped to zero.
MeasurementRecord add_noise(const MeasurementRecord& record, const NoiseSpec& spec);

// Copies the record's values and nbar into the observable means.
ObservableSet with_means(ObservableSet observables, const MeasurementRecord& record);

// exp(-i kappa p^2)|0> with kappa = omega_z t1 / 2: free flight of duration t1
// starting from the trap ground state.
PureState prepare_free_expansion(const TrapConfig& cfg, double t1, const FockSpace& space);

// Free flight applied to an arbitrary initial state.
PureState free_flight(const PureState& initial, double kappa, const FockSpace& space);

// (dv0 t1)^2 / (4 dz0^2): potential-energy estimate of the phonon number gained in flight.
double estimate_nbar_heuristic(const TrapConfig& cfg, double t1);

struct PrepSpec {
  StateSpec initial;
  std::optional<double> free_flight_t1;  // s
  double rotation_time = 0.0;            // s, in-trap evolution after preparation
};

State prepare_state(const TrapConfig& cfg, const PrepSpec& spec, const FockSpace& space);

}  // namespace maxent_tomo
