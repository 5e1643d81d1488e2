#include "maxent_tomo/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/parallel.hpp"
#include "maxent_tomo/quadrature.hpp"

namespace maxent_tomo {

std::vector<std::string> TrapConfig::validate() const {
  for (double v : {omega_z, dz0, dv0, cloud_rms, be_time}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("trap parameters must be strictly positive and finite");
  }
  std::vector<std::string> warnings;
  const double mismatch = std::abs(dv0 - omega_z * dz0) / dv0;
  if (mismatch >= 0.05) {
    std::ostringstream os;
    os << "dv0 differs from omega_z*dz0 by " << 100.0 * mismatch << "%";
    warnings.push_back(os.str());
  }
  return warnings;
}

double TrapConfig::detector_scale() const { return std::numbers::sqrt2 * dv0 * be_time; }

TrapConfig TrapConfig::lattice_defaults() {
  return {2.0 * std::numbers::pi * 80e3, 22e-9, 11e-3, 60e-6, 8.7e-3};
}

void BinGrid::validate() const {
  if (!(width > 0.0)) throw InputError("bin width must be positive");
  if (half_count < 1) throw InputError("bin half count must be >= 1");
}

std::string Observable::label() const {
  switch (kind) {
    case ObservableKind::number: return "n";
    case ObservableKind::bin: return "F[" + std::to_string(rotation) + "," + std::to_string(bin) + "]";
    default: return "G";
  }
}

int ObservableSet::dim() const { return entries.empty() ? 0 : entries.front().op.dim(); }

bool ObservableSet::has_means() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const Observable& o) {
           return o.mean.has_value() && std::isfinite(*o.mean);
         });
}

std::optional<std::size_t> ObservableSet::number_index() const {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].kind == ObservableKind::number) return i;
  }
  return std::nullopt;
}

std::size_t ObservableSet::bin_index(int rotation, int bin) const {
  if (!grid) throw InputError("observable set has no bin grid");
  if (rotation < 0 || rotation >= static_cast<int>(rotations.size()) || std::abs(bin) > grid->half_count) {
    throw InputError("bin index out of range");
  }
  return static_cast<std::size_t>(rotation) * grid->count() + (bin + grid->half_count);
}

void ObservableSet::validate() const {
  const int n = dim();
  for (const auto& o : entries) {
    if (o.op.dim() != n) throw DimensionMismatch("observables have inconsistent dimensions");
    if (!(o.effective_weight() > 0.0) || !std::isfinite(o.effective_weight())) {
      throw InputError("observable weights must be positive and finite");
    }
  }
}

namespace {

// Real symmetric kernel sum_q w_q psi_m(u_q) psi_n(u_q) for the bin, cloud-averaged.
RMatrix be_kernel(const TrapConfig& cfg, const BinGrid& grid, int k, int dim, const QuadratureRule& cloud,
                  const QuadratureRule& bin) {
  const double scale = cfg.detector_scale();
  const double lo = grid.lower_edge(k) - grid.center;
  const double hi = grid.upper_edge(k) - grid.center;
  const double half_du = 0.5 * (hi - lo) / scale;
  const Eigen::Index nq = cloud.nodes.size() * bin.nodes.size();
  RMatrix psi(dim, nq);
  RVector w(nq);
  Eigen::Index q = 0;
  for (Eigen::Index i = 0; i < cloud.nodes.size(); ++i) {
    const double xi = std::numbers::sqrt2 * cfg.cloud_rms * cloud.nodes(i);
    const double mid = 0.5 * (lo + hi - 2.0 * xi) / scale;
    for (Eigen::Index l = 0; l < bin.nodes.size(); ++l, ++q) {
      psi.col(q) = hermite_functions(dim, mid + half_du * bin.nodes(l));
      w(q) = cloud.weights(i) / std::sqrt(std::numbers::pi) * half_du * bin.weights(l);
    }
  }
  return psi * w.asDiagonal() * psi.transpose();
}

// Velocity-basis phase: <m|U^dag|u><u|U|n> = e^{i(m-n)(theta + pi/2)} psi_m(u) psi_n(u).
CMatrix apply_rotation_phase(const RMatrix& kernel, double theta) {
  const Eigen::Index n = kernel.rows();
  CMatrix out(n, n);
  const double phase = theta + 0.5 * std::numbers::pi;
  for (Eigen::Index m = 0; m < n; ++m) {
    for (Eigen::Index c = 0; c < n; ++c) out(m, c) = std::polar(kernel(m, c), static_cast<double>(m - c) * phase);
  }
  return out;
}

}  // namespace

HermitianOperator build_be_observable(const TrapConfig& cfg, const BinGrid& grid, double theta, int k,
                                      const FockSpace& space, const QuadratureOptions& quad) {
  cfg.validate();
  grid.validate();
  if (std::abs(k) > grid.half_count) throw InputError("bin index outside the grid");
  const auto cloud = gauss_hermite(quad.cloud_nodes);
  const auto bin = gauss_legendre(quad.bin_nodes);
  return HermitianOperator(apply_rotation_phase(be_kernel(cfg, grid, k, space.dim(), cloud, bin), theta), 1e-12);
}

ObservableSet build_observation_level(const TrapConfig& cfg, const BinGrid& grid, const std::vector<double>& rotations,
                                      double nbar, const FockSpace& space, const ObservationOptions& opts) {
  cfg.validate();
  grid.validate();
  if (rotations.empty()) throw InputError("at least one rotation is required");
  if (!(nbar >= 0.0)) throw InputError("mean phonon number must be >= 0");
  if (!(opts.w_nbar > 0.0)) throw InputError("w_nbar must be positive");
  for (std::size_t a = 0; a < rotations.size(); ++a) {
    for (std::size_t b = a + 1; b < rotations.size(); ++b) {
      if (std::abs(rotations[a] - rotations[b]) < 1e-12) {
        throw DegenerateRotationError("rotation " + std::to_string(rotations[a]) + " appears more than once");
      }
    }
  }
  const auto cloud = gauss_hermite(opts.quadrature.cloud_nodes);
  const auto bin = gauss_legendre(opts.quadrature.bin_nodes);

  // The kernel does not depend on theta, so it is computed once per bin.
  const int nbins = grid.count();
  std::vector<RMatrix> kernels(nbins);
  parallel_for(nbins, [&](std::size_t i) {
    kernels[i] = be_kernel(cfg, grid, static_cast<int>(i) - grid.half_count, space.dim(), cloud, bin);
  });

  ObservableSet set;
  set.rotations = rotations;
  set.grid = grid;
  set.entries.reserve(rotations.size() * nbins + 1);
  for (std::size_t j = 0; j < rotations.size(); ++j) {
    for (int i = 0; i < nbins; ++i) {
      set.entries.push_back({HermitianOperator(apply_rotation_phase(kernels[i], rotations[j]), 1e-12),
                             ObservableKind::bin, static_cast<int>(j), i - grid.half_count, std::nullopt, 1.0,
                             std::nullopt});
    }
  }
  set.entries.push_back({number_operator(space), ObservableKind::number, -1, 0, nbar, opts.w_nbar, std::nullopt});
  return set;
}

BinGrid covering_grid(const TrapConfig& cfg, double nbar, int half_count, double sigmas, double center) {
  if (!(nbar >= 0.0)) throw InputError("nbar must be non-negative");
  if (half_count < 1 || !(sigmas > 0.0)) throw InputError("covering grid needs half_count >= 1 and sigmas > 0");
  const double s = cfg.detector_scale();
  const double rms = std::sqrt(s * s * (2.0 * nbar + 1.0) + cfg.cloud_rms * cfg.cloud_rms);
  return {center, 2.0 * sigmas * rms / (2 * half_count + 1), half_count};
}

std::vector<double> rotations_from_times(const TrapConfig& cfg, const std::vector<double>& times) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) out.push_back(cfg.omega_z * t);
  return out;
}

double ideal_quadrature_distribution(const DensityOperator& rho, double theta, double x) {
  const RVector psi = hermite_functions(rho.dim(), x);
  const CMatrix& m = rho.matrix();
  double sum = 0.0;
  for (int a = 0; a < rho.dim(); ++a) {
    for (int b = 0; b < rho.dim(); ++b) {
      sum += (std::polar(psi(a) * psi(b), -(a - b) * theta) * m(a, b)).real();
    }
  }
  return sum;
}

double ideal_quadrature_distribution(const State& state, double theta, double x) {
  if (const auto* psi = std::get_if<PureState>(&state)) {
    const RVector h = hermite_functions(psi->dim(), x);
    cplx amp = 0.0;
    for (int n = 0; n < psi->dim(); ++n) amp += psi->amplitudes()(n) * std::polar(h(n), -n * theta);
    return std::norm(amp);
  }
  return ideal_quadrature_distribution(std::get<DensityOperator>(state), theta, x);
}

}  // namespace maxent_tomo
