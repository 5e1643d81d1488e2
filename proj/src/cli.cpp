#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/io.hpp"

namespace maxent_tomo {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<int> dim;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key=value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override a configuration key (key=value), repeatable");
  cmd->add_option("--dim", c.dim, "Fock space dimension N");
}

RunConfig load_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : read_config(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.dim) cfg.fock_dim = *c.dim;
  return cfg;
}

void write_config(const fs::path& path, const RunConfig& cfg) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  for (const auto& [k, v] : cfg.entries()) out << k << '=' << v << '\n';
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << '\n';
}

double require_nbar(const RunConfig& cfg, const std::optional<double>& record_nbar) {
  if (cfg.nbar) return *cfg.nbar;
  if (cfg.nbar_source == NbarSource::estimated && cfg.free_flight_t1) {
    return estimate_nbar_heuristic(cfg.trap, *cfg.free_flight_t1);
  }
  if (record_nbar) return *record_nbar;
  throw InputError(
      "the mean phonon number is required for reconstruction: set nbar=... in the config or pass --nbar. "
      "With an incomplete set of observables the mean excitation number fixes the scale of the estimate.");
}

int simulate(const Common& common, const std::optional<std::string>& state, const std::optional<double>& eta,
             const std::optional<std::uint64_t>& seed, const std::optional<double>& nbar, const std::string& out_dir,
             std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(common);
  if (state) cfg.state = *state;
  if (eta) cfg.eta = *eta;
  if (seed) cfg.seed = *seed;
  if (nbar) cfg.nbar_noisy = *nbar;
  if (!cfg.state) throw InputError("simulate needs a state (state=... in the config or --state)");
  print_warnings(cfg.trap.validate(), err);

  const FockSpace space(cfg.fock_dim);
  const State truth = prepare_state(cfg.trap, {parse_state_spec(*cfg.state), cfg.free_flight_t1, 0.0}, space);
  const DensityOperator rho = to_density(truth);
  const ObservableSet obs = observation_level(cfg, rho.expectation(number_operator(space).matrix()));
  MeasurementRecord record = simulate_ideal(truth, obs);
  if (cfg.eta > 0.0 || cfg.nbar_noisy) record = add_noise(record, {cfg.eta, cfg.seed, cfg.nbar_noisy});

  const fs::path dir(out_dir);
  write_record(dir / "record.csv", record);
  write_record(dir / "record.json", record);
  const auto cuts = record_to_cuts(record, cfg.rotation_times);
  for (std::size_t j = 0; j < cuts.size(); ++j) write_cut(dir / "cuts" / ("cut_" + std::to_string(j) + ".csv"), cuts[j]);
  write_density(dir / "state.json", rho);
  write_config(dir / "run_config.txt", cfg);

  out << "state " << *cfg.state << ", N=" << cfg.fock_dim << ", " << record.rotations.size() << " rotations x "
      << record.grid.count() << " bins, nbar=" << record.nbar << ", provenance " << provenance_name(record.provenance)
      << "\nwrote " << dir.string() << '\n';
  return 0;
}

int reconstruct(const Common& common, const std::string& record_path, const std::vector<std::string>& cut_paths,
                const std::optional<double>& nbar, const std::optional<double>& wnbar, bool no_background,
                const std::optional<double>& fixed_center, const std::string& reference, const std::string& out_dir,
                std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(common);
  if (nbar) cfg.nbar = *nbar;
  if (wnbar) cfg.w_nbar = *wnbar;
  if (no_background) cfg.preprocess.subtract_background = false;
  if (fixed_center) cfg.preprocess.fixed_center = *fixed_center;
  print_warnings(cfg.trap.validate(), err);
  const FockSpace space(cfg.fock_dim);

  MeasurementRecord data;
  double target_nbar = 0.0;
  if (!record_path.empty()) {
    data = read_record(record_path);
    target_nbar = require_nbar(cfg, data.nbar);
  } else {
    target_nbar = require_nbar(cfg, std::nullopt);
    data.provenance = Provenance::file;
    const BinGrid grid = cfg.resolved_grid(target_nbar);
    data.grid = {0.0, grid.width, grid.half_count};
    data.values.resize(static_cast<Eigen::Index>(cut_paths.size()), data.grid.count());
    for (std::size_t j = 0; j < cut_paths.size(); ++j) {
      const CutFile cut = read_cut(cut_paths[j]);
      data.rotations.push_back(cfg.trap.omega_z * cut.tau);
      data.values.row(static_cast<Eigen::Index>(j)) = preprocess(cut, grid, cfg.preprocess).transpose();
    }
  }
  data.nbar = target_nbar;

  ObservableSet obs = build_observation_level(cfg.trap, data.grid, data.rotations, target_nbar, space,
                                              {cfg.w_nbar, cfg.quadrature});
  obs = with_means(std::move(obs), data);
  const FitResult result = fit(obs, cfg.fit);

  std::optional<StateMetrics> against;
  if (!reference.empty()) against = metrics(result.state.rho, read_density(reference));

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  {
    std::ofstream rep(dir / "fit_report.json");
    rep << report_to_json(result.report, against) << '\n';
  }
  write_density(dir / "density.json", result.state.rho);
  write_record(dir / "data.csv", data);
  write_config(dir / "run_config.txt", cfg);

  const auto& r = result.report;
  out << std::setprecision(6) << "dF=" << r.delta_f << " S=" << r.entropy << " nbar_fit=" << r.nbar_fit
      << " iterations=" << r.iterations << " converged=" << (r.converged ? "yes" : "no") << " (" << r.message << ")\n";
  if (against) out << "fidelity=" << against->fidelity << " delta_rho=" << against->delta_rho << '\n';
  out << "wrote " << dir.string() << '\n';
  if (!r.converged) {
    err << "error: the fit did not converge; best iterate written\n";
    return 2;
  }
  return 0;
}

int wigner(const Common& common, const std::string& density_path, const std::optional<double>& extent,
           const std::optional<int>& points, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  RunConfig cfg = load_config(common);
  if (extent) {
    cfg.wigner.q_min = cfg.wigner.p_min = -*extent;
    cfg.wigner.q_max = cfg.wigner.p_max = *extent;
  }
  if (points) cfg.wigner.q_points = cfg.wigner.p_points = *points;
  const DensityOperator rho = read_density(density_path);
  const WignerGrid grid = wigner_eval(rho, cfg.wigner);
  print_warnings(grid.warnings, err);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  {
    std::ofstream csv(dir / "wigner.csv");
    write_wigner_csv(csv, grid);
  }
  {
    std::ofstream js(dir / "wigner.json");
    js << wigner_to_json(grid) << '\n';
  }
  out << "grid " << grid.q_axis.size() << "x" << grid.p_axis.size() << ", min W=" << grid.values.minCoeff()
      << ", max W=" << grid.values.maxCoeff() << ", integral=" << grid.integral() << " (convention " << grid.convention
      << ")\nwrote " << dir.string() << '\n';
  return 0;
}

int report(const std::string& density_path, const std::string& reference, const std::string& fit_report,
           std::ostream& out) {
  const DensityOperator rho = read_density(density_path);
  const FockSpace space(rho.dim());
  out << std::setprecision(8);
  out << "dimension " << rho.dim() << '\n';
  out << "nbar " << rho.expectation(number_operator(space).matrix()) << '\n';
  out << "entropy " << von_neumann_entropy(rho) << '\n';
  out << "purity " << (rho.matrix() * rho.matrix()).trace().real() << '\n';
  if (!fit_report.empty()) {
    std::ifstream in(fit_report);
    if (!in) throw InputError("cannot open " + fit_report);
    nlohmann::json j;
    try {
      in >> j;
      out << "delta_f " << j.at("delta_f").get<double>() << '\n';
      out << "converged " << (j.at("converged").get<bool>() ? "yes" : "no") << " after " << j.at("iterations").get<int>()
          << " iterations\n";
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("fit report: ") + e.what());
    }
  }
  if (!reference.empty()) {
    const DensityOperator ref = read_density(reference);
    const StateMetrics m = metrics(rho, ref);
    out << "fidelity " << m.fidelity << '\n';
    out << "delta_rho " << m.delta_rho << '\n';
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Maximum-entropy reconstruction of motional states from ballistic-expansion cuts"};
  app.require_subcommand(1);

  Common sim_common, rec_common, wig_common;
  std::optional<std::string> sim_state;
  std::optional<double> sim_eta, sim_nbar;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "simulate a measurement record from a prepared state");
  add_common(sim, sim_common);
  sim->add_option("--state", sim_state, "fock:k | superposition:c0,c1,... | cat:alpha | thermal:nbar");
  sim->add_option("--eta", sim_eta, "relative noise parameter");
  sim->add_option("--seed", sim_seed, "noise seed");
  sim->add_option("--nbar", sim_nbar, "mean phonon number stored in the record (the 'measured' value)");
  sim->add_option("--out", sim_out, "output directory")->required();

  std::string rec_record, rec_out, rec_reference;
  std::vector<std::string> rec_cuts;
  std::optional<double> rec_nbar, rec_wnbar, rec_center;
  bool rec_no_bg = false;
  auto* rec = app.add_subcommand("reconstruct", "fit the maximum-entropy state to a record or to cut files");
  add_common(rec, rec_common);
  auto* opt_record = rec->add_option("--record", rec_record, "measurement record (.csv or .json)")->check(CLI::ExistingFile);
  auto* opt_cut = rec->add_option("--cut", rec_cuts, "cut file, one per rotation time (repeatable)")->check(CLI::ExistingFile);
  opt_record->excludes(opt_cut);
  rec->add_option("--nbar", rec_nbar, "measured mean phonon number");
  rec->add_option("--wnbar", rec_wnbar, "weight of the phonon-number term");
  rec->add_flag("--no-background-subtraction", rec_no_bg, "keep the fitted background in the cuts");
  rec->add_option("--fixed-center", rec_center, "use this cloud center (m) for every cut instead of fitting it");
  rec->add_option("--reference", rec_reference, "reference density matrix for fidelity")->check(CLI::ExistingFile);
  rec->add_option("--out", rec_out, "output directory")->required();

  std::string wig_density, wig_out;
  std::optional<double> wig_extent;
  std::optional<int> wig_points;
  auto* wig = app.add_subcommand("wigner", "evaluate the Wigner function of a density matrix on a grid");
  add_common(wig, wig_common);
  wig->add_option("--density", wig_density, "density matrix JSON")->required()->check(CLI::ExistingFile);
  wig->add_option("--extent", wig_extent, "grid covers [-extent, extent] in q and p");
  wig->add_option("--points", wig_points, "points per axis");
  wig->add_option("--out", wig_out, "output directory")->required();

  std::string rep_density, rep_reference, rep_fit;
  auto* rep = app.add_subcommand("report", "summarize a density matrix");
  rep->add_option("--density", rep_density, "density matrix JSON")->required()->check(CLI::ExistingFile);
  rep->add_option("--reference", rep_reference, "reference density matrix")->check(CLI::ExistingFile);
  rep->add_option("--fit-report", rep_fit, "fit report JSON from reconstruct")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sim->parsed()) return simulate(sim_common, sim_state, sim_eta, sim_seed, sim_nbar, sim_out, out, err);
    if (rec->parsed()) {
      if (rec_record.empty() && rec_cuts.empty()) throw InputError("reconstruct needs --record or at least one --cut");
      return reconstruct(rec_common, rec_record, rec_cuts, rec_nbar, rec_wnbar, rec_no_bg, rec_center, rec_reference,
                         rec_out, out, err);
    }
    if (wig->parsed()) return wigner(wig_common, wig_density, wig_extent, wig_points, wig_out, out, err);
    if (rep->parsed()) return report(rep_density, rep_reference, rep_fit, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace maxent_tomo
