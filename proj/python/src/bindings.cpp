#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/io.hpp"
#include "maxent_tomo/maxent.hpp"
#include "maxent_tomo/simulator.hpp"
#include "maxent_tomo/wigner.hpp"

namespace py = pybind11;
using namespace maxent_tomo;

namespace {

MeasurementRecord make_record(const RMatrix& values, const std::vector<double>& rotations, const BinGrid& grid,
                              double nbar) {
  MeasurementRecord r;
  r.values = values;
  r.rotations = rotations;
  r.grid = grid;
  r.nbar = nbar;
  r.provenance = Provenance::file;
  return r;
}

py::dict record_dict(const MeasurementRecord& r) {
  py::dict d;
  d["values"] = r.values;
  d["rotations"] = r.rotations;
  d["grid"] = r.grid;
  d["nbar"] = r.nbar;
  return d;
}

}  // namespace

PYBIND11_MODULE(_maxent_tomo, m) {
  m.doc() = "Maximum-entropy reconstruction of motional states from ballistic-expansion data";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);

  py::class_<TrapConfig>(m, "TrapConfig")
      .def(py::init<>())
      .def_static("lattice_defaults", &TrapConfig::lattice_defaults)
      .def_readwrite("omega_z", &TrapConfig::omega_z)
      .def_readwrite("dz0", &TrapConfig::dz0)
      .def_readwrite("dv0", &TrapConfig::dv0)
      .def_readwrite("cloud_rms", &TrapConfig::cloud_rms)
      .def_readwrite("be_time", &TrapConfig::be_time)
      .def("validate", &TrapConfig::validate)
      .def("detector_scale", &TrapConfig::detector_scale);

  py::class_<BinGrid>(m, "BinGrid")
      .def(py::init([](double center, double width, int half_count) { return BinGrid{center, width, half_count}; }),
           py::arg("center"), py::arg("width"), py::arg("half_count"))
      .def_readwrite("center", &BinGrid::center)
      .def_readwrite("width", &BinGrid::width)
      .def_readwrite("half_count", &BinGrid::half_count)
      .def("count", &BinGrid::count)
      .def("bin_center", &BinGrid::bin_center)
      .def("__repr__", [](const BinGrid& g) {
        std::ostringstream os;
        os << "BinGrid(center=" << g.center << ", width=" << g.width << ", half_count=" << g.half_count << ")";
        return os.str();
      });

  m.def("covering_grid", &covering_grid, py::arg("trap"), py::arg("nbar"), py::arg("half_count"),
        py::arg("sigmas") = 4.0, py::arg("center") = 0.0);
  m.def("rotations_from_times", &rotations_from_times, py::arg("trap"), py::arg("times"));

  m.def("make_state",
        [](const std::string& spec, int dim) { return to_density(make_state(parse_state_spec(spec), FockSpace(dim))).matrix(); },
        py::arg("spec"), py::arg("dim"), "Density matrix for 'fock:k', 'superposition:c0,c1,...', 'cat:alpha' or 'thermal:nbar'.");

  m.def(
      "simulate",
      [](const CMatrix& rho, const TrapConfig& trap, const std::vector<double>& rotations, const BinGrid& grid, double eta,
         std::uint64_t seed, std::optional<double> nbar) {
        const DensityOperator d(rho);
        const auto level = build_observation_level(trap, grid, rotations, 0.0, FockSpace(d.dim()));
        auto rec = simulate_ideal(d, level);
        if (eta > 0.0 || nbar) rec = add_noise(rec, {eta, seed, nbar});
        return record_dict(rec);
      },
      py::arg("rho"), py::arg("trap"), py::arg("rotations"), py::arg("grid"), py::arg("eta") = 0.0, py::arg("seed") = 0,
      py::arg("nbar") = py::none(), "Bin probabilities (rotations x bins) for a density matrix.");

  m.def(
      "reconstruct",
      [](const RMatrix& values, const std::vector<double>& rotations, const BinGrid& grid, double nbar, int dim,
         const TrapConfig& trap, double w_nbar, int max_iter, int max_restarts) {
        const auto level = build_observation_level(trap, grid, rotations, nbar, FockSpace(dim), {w_nbar, {}});
        FitOptions opts;
        opts.max_iter = max_iter;
        opts.max_restarts = max_restarts;
        const auto r = fit(with_means(level, make_record(values, rotations, grid, nbar)), opts);
        py::dict d;
        d["rho"] = r.state.rho.matrix();
        d["lambdas"] = r.state.lambdas.values;
        d["delta_f"] = r.report.delta_f;
        d["entropy"] = r.report.entropy;
        d["nbar_fit"] = r.report.nbar_fit;
        d["iterations"] = r.report.iterations;
        d["restarts"] = r.report.restarts;
        d["converged"] = r.report.converged;
        d["message"] = r.report.message;
        return d;
      },
      py::arg("values"), py::arg("rotations"), py::arg("grid"), py::arg("nbar"), py::arg("dim") = kDefaultFockDim,
      py::arg("trap") = TrapConfig::lattice_defaults(), py::arg("w_nbar") = 1.0, py::arg("max_iter") = 20000,
      py::arg("max_restarts") = 3, "Maximum-entropy fit to bin probabilities and the mean phonon number.");

  m.def(
      "wigner",
      [](const CMatrix& rho, double extent, int points) {
        const auto g = wigner_eval(DensityOperator(rho), {-extent, extent, points, -extent, extent, points});
        return py::make_tuple(g.q_axis, g.p_axis, g.values);
      },
      py::arg("rho"), py::arg("extent") = 6.0, py::arg("points") = 257,
      "Wigner function on a square grid; the vacuum peaks at 2 and the integral is 2 pi.");

  m.def("fidelity", [](const CMatrix& a, const CMatrix& b) { return fidelity(DensityOperator(a), DensityOperator(b)); });
  m.def("delta_rho", [](const CMatrix& a, const CMatrix& b) { return delta_rho(DensityOperator(a), DensityOperator(b)); });
  m.def("entropy", [](const CMatrix& a) { return von_neumann_entropy(DensityOperator(a)); });

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "maxent-tomo");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the command-line tool in process; returns (exit code, stdout, stderr).");
}
