#pragma once

// Measurement operators for ballistic-expansion (time-of-flight) imaging of a
// harmonically trapped particle released from a cloud of finite size.
//
// Physical <-> dimensionless conversion (the only place it happens):
//   position  x = z / (sqrt(2) dz0)
//   velocity  u = v / (sqrt(2) dv0)
// After an in-trap rotation theta and free flight T the detected coordinate is
// z = center + xi0 + v T, with xi0 ~ N(0, cloud_rms^2) the initial position in
// the cloud.

#include <optional>
#include <string>
#include <vector>

#include "maxent_tomo/hilbert.hpp"

namespace maxent_tomo {

struct TrapConfig {
  double omega_z = 0.0;    // rad/s
  double dz0 = 0.0;        // ground-state rms size, m
  double dv0 = 0.0;        // ground-state rms velocity, m/s
  double cloud_rms = 0.0;  // rms size of the initial cloud, m
  double be_time = 0.0;    // ballistic expansion time, s

  // Throws InputError unless every field is strictly positive. Returns
  // human-readable warnings (currently: dv0 inconsistent with omega_z * dz0).
  std::vector<std::string> validate() const;

  // sqrt(2) dv0 T: metres of detector z per unit of dimensionless velocity.
  double detector_scale() const;

  // 80 kHz lattice, 22 nm, 11 mm/s, 60 um cloud, 8.7 ms expansion.
  static TrapConfig lattice_defaults();
};

struct BinGrid {
  double center = 0.0;  // m
  double width = 0.0;   // m
  int half_count = 0;   // bins indexed -half_count..half_count

  void validate() const;
  int count() const { return 2 * half_count + 1; }
  double lower_edge(int k) const { return center + (k - 0.5) * width; }
  double upper_edge(int k) const { return center + (k + 0.5) * width; }
  double bin_center(int k) const { return center + k * width; }
};

struct QuadratureOptions {
  int cloud_nodes = 32;  // Gauss-Hermite, cloud convolution
  int bin_nodes = 8;     // Gauss-Legendre, per bin
};

enum class ObservableKind { bin, number, other };

struct Observable {
  HermitianOperator op;
  ObservableKind kind = ObservableKind::other;
  int rotation = -1;  // index into ObservableSet::rotations for bins
  int bin = 0;        // -half_count..half_count for bins
  std::optional<double> mean;
  double weight = 1.0;
  std::optional<double> sigma;  // when set the effective weight is sigma^-2

  double effective_weight() const { return sigma ? 1.0 / (*sigma * *sigma) : weight; }
  std::string label() const;
};

struct ObservableSet {
  std::vector<Observable> entries;
  std::vector<double> rotations;  // theta_j = omega_z tau_j
  std::optional<BinGrid> grid;

  std::size_t size() const { return entries.size(); }
  int dim() const;
  bool has_means() const;
  std::optional<std::size_t> number_index() const;
  // Position of bin observable (rotation j, bin k); bins are stored rotation-major.
  std::size_t bin_index(int rotation, int bin) const;
  // Throws on inconsistent dimensions, non-positive weights, non-Hermitian ops.
  void validate() const;
};

// Hermitian operator whose expectation is the probability of detecting the
// particle in bin k after rotation theta and ballistic expansion.
HermitianOperator build_be_observable(const TrapConfig& cfg, const BinGrid& grid, double theta, int k,
                                      const FockSpace& space, const QuadratureOptions& quad = {});

struct ObservationOptions {
  double w_nbar = 1.0;
  QuadratureOptions quadrature;
};

// (2 N_z + 1) * N_rot bin observables followed by the number operator, whose
// mean is set to `nbar`; bin means are left empty.
ObservableSet build_observation_level(const TrapConfig& cfg, const BinGrid& grid, const std::vector<double>& rotations,
                                      double nbar, const FockSpace& space, const ObservationOptions& opts = {});

// Grid centred on `center` whose 2 half_count + 1 bins span +-sigmas times an
// upper bound on the detected rms width for any state with mean phonon number
// nbar: <x_theta^2> <= 2 nbar + 1, convolved with the cloud.
BinGrid covering_grid(const TrapConfig& cfg, double nbar, int half_count, double sigmas = 4.0, double center = 0.0);

// Rotation angle omega_z * tau for each rotation time.
std::vector<double> rotations_from_times(const TrapConfig& cfg, const std::vector<double>& times);

// Density of the rotated quadrature x_theta = x cos(theta) + p_kin sin(theta).
double ideal_quadrature_distribution(const State& state, double theta, double x);
double ideal_quadrature_distribution(const DensityOperator& rho, double theta, double x);

}  // namespace maxent_tomo
