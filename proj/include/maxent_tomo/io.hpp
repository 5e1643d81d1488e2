#pragma once

// File formats, preprocessing of measured cuts, and run configuration.
//
//   cut CSV        '#key=value' metadata (tau_s, pixel_width_m, center_m), then a
//                  header "z_m,value" or "pixel,value"
//   record CSV     '#key=value' metadata, header "rotation,theta_rad,bin,z_m,value"
//   record JSON    same content as an object
//   density JSON   {"dim": N, "real": [...], "imag": [...]}, row-major
//   Wigner CSV     header "q,p,W"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "maxent_tomo/hilbert.hpp"
#include "maxent_tomo/maxent.hpp"
#include "maxent_tomo/measurement.hpp"
#include "maxent_tomo/simulator.hpp"
#include "maxent_tomo/wigner.hpp"

namespace maxent_tomo {

struct CutFile {
  double tau = 0.0;          // s
  double pixel_width = 0.0;  // m
  std::optional<double> center;
  std::vector<double> positions;  // m, strictly increasing
  std::vector<double> values;

  void validate() const;
};

CutFile parse_cut(std::istream& in, const std::string& name = "<stream>");
CutFile read_cut(const std::filesystem::path& path);
void write_cut(std::ostream& out, const CutFile& cut);
void write_cut(const std::filesystem::path& path, const CutFile& cut);

struct GaussianFit {
  double center = 0.0;
  double rms = 0.0;
  double background = 0.0;
  double amplitude = 0.0;
};

// Least-squares fit of A exp(-(z - zc)^2 / 2 sigma^2) + B (Levenberg-Marquardt).
GaussianFit gaussian_fit_center(const CutFile& cut);

struct PreprocessFlags {
  bool subtract_background = true;
  bool recenter = true;
  bool normalize = true;
  std::optional<double> fixed_center;  // m, overrides recenter
};

// Background subtraction, clamping, centering and overlap-weighted rebinning
// onto `grid`. Returns one row of bin means (bin k at index k + half_count).
RVector preprocess(const CutFile& cut, const BinGrid& grid, const PreprocessFlags& flags = {});

// One cut per rotation; positions are the bin centers.
std::vector<CutFile> record_to_cuts(const MeasurementRecord& record, const std::vector<double>& times);

std::string provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

void write_record_csv(std::ostream& out, const MeasurementRecord& record);
MeasurementRecord read_record_csv(std::istream& in);
std::string record_to_json(const MeasurementRecord& record);
MeasurementRecord record_from_json(const std::string& text);
void write_record(const std::filesystem::path& path, const MeasurementRecord& record);
MeasurementRecord read_record(const std::filesystem::path& path);  // by extension

std::string density_to_json(const DensityOperator& rho);
DensityOperator density_from_json(const std::string& text);
void write_density(const std::filesystem::path& path, const DensityOperator& rho);
DensityOperator read_density(const std::filesystem::path& path);

std::string report_to_json(const FitReport& report, const std::optional<StateMetrics>& reference = std::nullopt);

void write_wigner_csv(std::ostream& out, const WignerGrid& grid);
std::string wigner_to_json(const WignerGrid& grid);

enum class NbarSource { measured, estimated };

struct RunConfig {
  TrapConfig trap = TrapConfig::lattice_defaults();
  int fock_dim = kDefaultFockDim;
  std::vector<double> rotation_times{0.0, 1.6e-6, 3.2e-6, 4.8e-6};
  BinGrid grid{0.0, 24e-6, 25};
  bool auto_bin_width = true;  // bin_width_m=auto: covering_grid from nbar
  std::optional<double> nbar;
  NbarSource nbar_source = NbarSource::measured;
  double w_nbar = 1.0;
  QuadratureOptions quadrature;

  // simulate
  std::optional<std::string> state;  // "fock:1", "superposition:1,1", "cat:1.414", "thermal:0.5"
  std::optional<double> free_flight_t1;
  double eta = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> nbar_noisy;

  // reconstruct
  PreprocessFlags preprocess;
  FitOptions fit;

  WignerGridSpec wigner;

  void set(const std::string& key, const std::string& value);
  BinGrid resolved_grid(double nbar) const;
  std::map<std::string, std::string> entries() const;
};

RunConfig parse_config(std::istream& in);
RunConfig read_config(const std::filesystem::path& path);

// "fock:1", "superposition:c0,c1,...", "cat:alpha", "thermal:nbar".
StateSpec parse_state_spec(const std::string& text);

// Observation level for the config's rotation times, with the number operator
// mean set to `nbar`.
ObservableSet observation_level(const RunConfig& cfg, double nbar);

// Command-line entry point; returns the process exit code (0 success,
// 1 input error, 2 fit did not converge).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace maxent_tomo
