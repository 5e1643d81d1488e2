#include "maxent_tomo/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unsupported/Eigen/LevenbergMarquardt>

#include "json.hpp"
#include "maxent_tomo/errors.hpp"

namespace maxent_tomo {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw InputError("cannot parse '" + t + "' as a number for " + what);
  }
  return v;
}

long long parse_int(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  long long v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw InputError("cannot parse '" + t + "' as an integer for " + what);
  }
  return v;
}

std::uint64_t parse_uint(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    throw InputError("cannot parse '" + t + "' as an unsigned integer for " + what);
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  std::string t = trim(text);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw InputError("cannot parse '" + text + "' as a boolean for " + what);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_double(item, what));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
  return s;
}

// Splits "# key = value" metadata lines; returns false for other comments.
bool metadata(const std::string& line, std::string& key, std::string& value) {
  const std::string body = trim(std::string_view(line).substr(1));
  const auto eq = body.find('=');
  if (eq == std::string::npos) return false;
  key = trim(std::string_view(body).substr(0, eq));
  value = trim(std::string_view(body).substr(eq + 1));
  return !key.empty();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InputError("invalid " + what + " JSON: " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- cuts

void CutFile::validate() const {
  if (!(pixel_width > 0.0) || !std::isfinite(pixel_width)) throw InputError("cut pixel width must be positive");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw InputError("cut tau must be finite and non-negative");
  if (positions.size() != values.size()) throw InputError("cut positions and values differ in length");
  if (positions.empty()) throw InputError("cut has no data points");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!std::isfinite(positions[i]) || !std::isfinite(values[i])) throw InputError("cut contains non-finite entries");
    if (i > 0 && !(positions[i] > positions[i - 1])) throw InputError("cut positions must be strictly increasing");
  }
}

CutFile parse_cut(std::istream& in, const std::string& name) {
  CutFile cut;
  std::optional<double> tau;
  std::optional<double> pixel;
  bool header_seen = false;
  bool pixel_index = false;
  std::vector<double> first;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string key, value;
      if (!metadata(t, key, value)) continue;
      if (key == "tau_s") tau = parse_double(value, name + ": tau_s");
      else if (key == "pixel_width_m") pixel = parse_double(value, name + ": pixel_width_m");
      else if (key == "center_m") cut.center = parse_double(value, name + ": center_m");
      continue;
    }
    const auto cols = split(t, ',');
    if (!header_seen) {
      header_seen = true;
      if (cols.size() == 2 && cols[1] == "value" && (cols[0] == "z_m" || cols[0] == "pixel")) {
        pixel_index = cols[0] == "pixel";
        continue;
      }
      throw InputError(name + ": expected header 'z_m,value' or 'pixel,value'");
    }
    if (cols.size() != 2) throw InputError(name + ":" + std::to_string(lineno) + ": expected two columns");
    first.push_back(parse_double(cols[0], name + ":" + std::to_string(lineno)));
    cut.values.push_back(parse_double(cols[1], name + ":" + std::to_string(lineno)));
  }
  if (!tau) throw InputError(name + ": missing '# tau_s=' metadata");
  if (!pixel) throw InputError(name + ": missing '# pixel_width_m=' metadata");
  cut.tau = *tau;
  cut.pixel_width = *pixel;
  cut.positions = std::move(first);
  if (pixel_index) {
    for (double& z : cut.positions) z *= cut.pixel_width;
  }
  cut.validate();
  return cut;
}

CutFile read_cut(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_cut(in, path.string());
}

void write_cut(std::ostream& out, const CutFile& cut) {
  out << "# tau_s=" << fmt(cut.tau) << "\n# pixel_width_m=" << fmt(cut.pixel_width) << "\n";
  if (cut.center) out << "# center_m=" << fmt(*cut.center) << "\n";
  out << "z_m,value\n";
  for (std::size_t i = 0; i < cut.positions.size(); ++i) out << fmt(cut.positions[i]) << ',' << fmt(cut.values[i]) << '\n';
}

void write_cut(const std::filesystem::path& path, const CutFile& cut) {
  auto out = open_out(path);
  write_cut(out, cut);
}

// ---------------------------------------------------------------- gaussian fit

namespace {

// Parameters (A, zc, sigma, B) in units scaled to order one.
struct GaussianResidual : Eigen::DenseFunctor<double> {
  GaussianResidual(const RVector& z, const RVector& y) : DenseFunctor(4, static_cast<int>(z.size())), z_(z), y_(y) {}

  int operator()(const InputType& p, ValueType& r) const {
    const RVector t = (z_.array() - p(1)) / p(2);
    r = p(0) * (-0.5 * t.array().square()).exp() + p(3) - y_.array();
    return 0;
  }

  int df(const InputType& p, JacobianType& j) const {
    const RVector t = (z_.array() - p(1)) / p(2);
    const RVector e = (-0.5 * t.array().square()).exp();
    j.col(0) = e;
    j.col(1) = p(0) * e.array() * t.array() / p(2);
    j.col(2) = p(0) * e.array() * t.array().square() / p(2);
    j.col(3).setOnes();
    return 0;
  }

  RVector z_;
  RVector y_;
};

}  // namespace

GaussianFit gaussian_fit_center(const CutFile& cut) {
  cut.validate();
  const std::size_t n = cut.positions.size();
  if (n < 5) throw InputError("Gaussian fit needs at least 5 data points");

  const auto [lo_it, hi_it] = std::minmax_element(cut.values.begin(), cut.values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double span = cut.positions.back() - cut.positions.front();
  const double yscale = std::max(std::abs(hi), std::abs(lo));
  if (!(hi - lo > 1e-12 * yscale) || yscale == 0.0) throw FitDivergence("cut is flat; no peak to fit");

  // Start from the background-subtracted centroid and rms width, which keep
  // the symmetry of a symmetric profile.
  double w_sum = 0.0, m1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w_sum += cut.values[i] - lo;
    m1 += (cut.values[i] - lo) * cut.positions[i];
  }
  const double centroid = m1 / w_sum;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) m2 += (cut.values[i] - lo) * std::pow(cut.positions[i] - centroid, 2);
  const double width = std::max(std::sqrt(m2 / w_sum), cut.pixel_width);

  // Fit in coordinates scaled by the data span so all parameters are O(1).
  const double z0 = centroid;
  const double zs = span > 0.0 ? span : 1.0;
  RVector z(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z(static_cast<Eigen::Index>(i)) = (cut.positions[i] - z0) / zs;
    y(static_cast<Eigen::Index>(i)) = cut.values[i] / yscale;
  }
  Eigen::VectorXd p(4);
  p << (hi - lo) / yscale, 0.0, width / zs, lo / yscale;

  GaussianResidual fn(z, y);
  Eigen::LevenbergMarquardt<GaussianResidual> lm(fn);
  lm.setXtol(1e-15);
  lm.setFtol(1e-15);
  lm.setGtol(0.0);
  lm.setMaxfev(2000);
  const auto status = lm.minimize(p);

  GaussianFit fit;
  fit.amplitude = p(0) * yscale;
  fit.center = z0 + p(1) * zs;
  fit.rms = std::abs(p(2)) * zs;
  fit.background = p(3) * yscale;
  const bool finite = p.allFinite();
  if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters || !finite || !(fit.amplitude > 0.0) ||
      !(fit.rms > 0.0) || fit.rms > 10.0 * zs || fit.center < cut.positions.front() - span ||
      fit.center > cut.positions.back() + span) {
    throw FitDivergence("Gaussian fit of the cut did not converge to a finite peak");
  }
  return fit;
}

// ---------------------------------------------------------------- preprocessing

RVector preprocess(const CutFile& cut, const BinGrid& grid, const PreprocessFlags& flags) {
  cut.validate();
  grid.validate();
  std::optional<GaussianFit> g;
  if (flags.subtract_background || (flags.recenter && !flags.fixed_center)) g = gaussian_fit_center(cut);

  double center = grid.center;
  if (flags.fixed_center) center = *flags.fixed_center;
  else if (flags.recenter) center = g->center;
  else if (cut.center) center = *cut.center;

  const double background = flags.subtract_background ? g->background : 0.0;
  const double w = grid.width;
  const double pw = cut.pixel_width;
  RVector row = RVector::Zero(grid.count());
  for (std::size_t i = 0; i < cut.positions.size(); ++i) {
    const double v = std::max(cut.values[i] - background, 0.0);
    if (v == 0.0) continue;
    const double a = cut.positions[i] - center - 0.5 * pw;
    const double b = a + pw;
    const int k_lo = std::max(-grid.half_count, static_cast<int>(std::floor(a / w + 0.5)));
    const int k_hi = std::min(grid.half_count, static_cast<int>(std::floor(b / w + 0.5)));
    for (int k = k_lo; k <= k_hi; ++k) {
      const double overlap = std::min(b, (k + 0.5) * w) - std::max(a, (k - 0.5) * w);
      if (overlap > 0.0) row(k + grid.half_count) += v * overlap / pw;
    }
  }
  const double total = row.sum();
  if (!(total > 0.0)) throw EmptyAfterClamp("no signal remains on the bin grid after background subtraction and clamping");
  if (flags.normalize) row /= total;
  return row;
}

std::vector<CutFile> record_to_cuts(const MeasurementRecord& record, const std::vector<double>& times) {
  if (times.size() != record.rotations.size()) throw DimensionMismatch("one rotation time per record row is required");
  std::vector<CutFile> cuts;
  for (std::size_t j = 0; j < times.size(); ++j) {
    CutFile c;
    c.tau = times[j];
    c.pixel_width = record.grid.width;
    c.center = record.grid.center;
    for (int k = -record.grid.half_count; k <= record.grid.half_count; ++k) {
      c.positions.push_back(record.grid.bin_center(k));
      c.values.push_back(record.values(static_cast<Eigen::Index>(j), k + record.grid.half_count));
    }
    cuts.push_back(std::move(c));
  }
  return cuts;
}

// ---------------------------------------------------------------- records

std::string provenance_name(Provenance p) {
  switch (p) {
    case Provenance::ideal: return "ideal";
    case Provenance::noisy: return "noisy";
    case Provenance::file: return "file";
  }
  return "file";
}

Provenance provenance_from_name(const std::string& name) {
  if (name == "ideal") return Provenance::ideal;
  if (name == "noisy") return Provenance::noisy;
  if (name == "file") return Provenance::file;
  throw InputError("unknown provenance '" + name + "'");
}

namespace {

void check_record(const MeasurementRecord& r) {
  r.grid.validate();
  if (r.rotations.empty()) throw InputError("record has no rotations");
  if (r.values.rows() != static_cast<Eigen::Index>(r.rotations.size()) || r.values.cols() != r.grid.count()) {
    throw DimensionMismatch("record values do not match rotations x bins");
  }
  if (!r.values.allFinite()) throw InputError("record values must be finite");
  if (!(r.nbar >= 0.0)) throw InputError("record nbar must be non-negative");
}

}  // namespace

void write_record_csv(std::ostream& out, const MeasurementRecord& r) {
  check_record(r);
  out << "# provenance=" << provenance_name(r.provenance) << "\n# seed=" << r.seed << "\n# eta=" << fmt(r.eta)
      << "\n# nbar=" << fmt(r.nbar) << "\n# bin_center_m=" << fmt(r.grid.center) << "\n# bin_width_m=" << fmt(r.grid.width)
      << "\n# bin_half_count=" << r.grid.half_count << "\nrotation,theta_rad,bin,z_m,value\n";
  for (Eigen::Index j = 0; j < r.values.rows(); ++j) {
    for (int k = -r.grid.half_count; k <= r.grid.half_count; ++k) {
      out << j << ',' << fmt(r.rotations[j]) << ',' << k << ',' << fmt(r.grid.bin_center(k)) << ','
          << fmt(r.values(j, k + r.grid.half_count)) << '\n';
    }
  }
}

MeasurementRecord read_record_csv(std::istream& in) {
  MeasurementRecord r;
  std::map<std::string, std::string> meta;
  struct Row {
    long long j;
    double theta;
    long long k;
    double value;
  };
  std::vector<Row> rows;
  bool header = false;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      std::string key, value;
      if (metadata(t, key, value)) meta[key] = value;
      continue;
    }
    const auto cols = split(t, ',');
    if (!header) {
      if (t != "rotation,theta_rad,bin,z_m,value") throw InputError("record CSV: unexpected header '" + t + "'");
      header = true;
      continue;
    }
    if (cols.size() != 5) throw InputError("record CSV: expected 5 columns in '" + t + "'");
    rows.push_back({parse_int(cols[0], "rotation"), parse_double(cols[1], "theta_rad"), parse_int(cols[2], "bin"),
                    parse_double(cols[4], "value")});
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = meta.find(key);
    if (it == meta.end()) throw InputError("record CSV: missing '# " + key + "=' metadata");
    return it->second;
  };
  r.provenance = provenance_from_name(need("provenance"));
  r.seed = parse_uint(need("seed"), "seed");
  r.eta = parse_double(need("eta"), "eta");
  r.nbar = parse_double(need("nbar"), "nbar");
  r.grid = {parse_double(need("bin_center_m"), "bin_center_m"), parse_double(need("bin_width_m"), "bin_width_m"),
            static_cast<int>(parse_int(need("bin_half_count"), "bin_half_count"))};
  r.grid.validate();
  long long rot_count = 0;
  for (const auto& row : rows) rot_count = std::max(rot_count, row.j + 1);
  if (rot_count == 0) throw InputError("record CSV has no data rows");
  if (static_cast<long long>(rows.size()) != rot_count * r.grid.count()) {
    throw DimensionMismatch("record CSV row count does not match rotations x bins");
  }
  r.rotations.assign(static_cast<std::size_t>(rot_count), std::nan(""));
  r.values = RMatrix::Constant(rot_count, r.grid.count(), std::nan(""));
  for (const auto& row : rows) {
    if (row.j < 0 || row.k < -r.grid.half_count || row.k > r.grid.half_count) throw InputError("record CSV index out of range");
    auto& theta = r.rotations[static_cast<std::size_t>(row.j)];
    if (!std::isnan(theta) && theta != row.theta) throw InputError("record CSV: inconsistent theta for one rotation");
    theta = row.theta;
    r.values(row.j, row.k + r.grid.half_count) = row.value;
  }
  check_record(r);
  return r;
}

std::string record_to_json(const MeasurementRecord& r) {
  check_record(r);
  json j;
  j["provenance"] = provenance_name(r.provenance);
  j["seed"] = r.seed;
  j["eta"] = r.eta;
  j["nbar"] = r.nbar;
  j["grid"] = {{"center_m", r.grid.center}, {"width_m", r.grid.width}, {"half_count", r.grid.half_count}};
  j["rotations_rad"] = r.rotations;
  json rows = json::array();
  for (Eigen::Index i = 0; i < r.values.rows(); ++i) {
    std::vector<double> row(r.values.cols());
    for (Eigen::Index k = 0; k < r.values.cols(); ++k) row[k] = r.values(i, k);
    rows.push_back(row);
  }
  j["values"] = rows;
  return j.dump(2);
}

MeasurementRecord record_from_json(const std::string& text) {
  const json j = parse_json(text, "record");
  MeasurementRecord r;
  try {
    r.provenance = provenance_from_name(j.at("provenance").get<std::string>());
    r.seed = j.at("seed").get<std::uint64_t>();
    r.eta = j.at("eta").get<double>();
    r.nbar = j.at("nbar").get<double>();
    const auto& g = j.at("grid");
    r.grid = {g.at("center_m").get<double>(), g.at("width_m").get<double>(), g.at("half_count").get<int>()};
    r.grid.validate();
    r.rotations = j.at("rotations_rad").get<std::vector<double>>();
    const auto& rows = j.at("values");
    if (!rows.is_array() || rows.size() != r.rotations.size()) throw DimensionMismatch("record JSON: one value row per rotation");
    r.values.resize(static_cast<Eigen::Index>(rows.size()), r.grid.count());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (static_cast<int>(row.size()) != r.grid.count()) throw DimensionMismatch("record JSON: row length differs from bin count");
      for (std::size_t k = 0; k < row.size(); ++k) r.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("record JSON: ") + e.what());
  }
  check_record(r);
  return r;
}

void write_record(const std::filesystem::path& path, const MeasurementRecord& record) {
  auto out = open_out(path);
  if (path.extension() == ".json") out << record_to_json(record) << '\n';
  else write_record_csv(out, record);
}

MeasurementRecord read_record(const std::filesystem::path& path) {
  if (path.extension() == ".json") return record_from_json(slurp(path));
  std::istringstream in(slurp(path));
  return read_record_csv(in);
}

// ---------------------------------------------------------------- density matrices

std::string density_to_json(const DensityOperator& rho) {
  const CMatrix& m = rho.matrix();
  std::vector<double> re, im;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      re.push_back(m(i, k).real());
      im.push_back(m(i, k).imag());
    }
  }
  json j{{"dim", m.rows()}, {"real", re}, {"imag", im}};
  return j.dump();
}

DensityOperator density_from_json(const std::string& text) {
  const json j = parse_json(text, "density matrix");
  try {
    const int dim = j.at("dim").get<int>();
    const auto re = j.at("real").get<std::vector<double>>();
    const auto im = j.at("imag").get<std::vector<double>>();
    if (dim < 1 || re.size() != static_cast<std::size_t>(dim) * dim || im.size() != re.size()) {
      throw DimensionMismatch("density JSON: real/imag must hold dim*dim entries");
    }
    CMatrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
      for (int k = 0; k < dim; ++k) m(i, k) = cplx(re[i * dim + k], im[i * dim + k]);
    }
    return DensityOperator(m, 1e-8);
  } catch (const json::exception& e) {
    throw InputError(std::string("density JSON: ") + e.what());
  }
}

void write_density(const std::filesystem::path& path, const DensityOperator& rho) {
  auto out = open_out(path);
  out << density_to_json(rho) << '\n';
}

DensityOperator read_density(const std::filesystem::path& path) { return density_from_json(slurp(path)); }

// ---------------------------------------------------------------- reports

std::string report_to_json(const FitReport& r, const std::optional<StateMetrics>& reference) {
  json j;
  j["delta_f"] = r.delta_f;
  j["entropy"] = r.entropy;
  j["nbar_fit"] = r.nbar_fit;
  j["nbar_residual"] = r.nbar_residual;
  j["iterations"] = r.iterations;
  j["evaluations"] = r.evaluations;
  j["restarts"] = r.restarts;
  j["converged"] = r.converged;
  j["message"] = r.message;
  j["bin_count"] = r.bin_count;
  j["observable_count"] = r.labels.size();
  json res = json::array();
  for (std::size_t i = 0; i < r.labels.size(); ++i) {
    res.push_back({{"label", r.labels[i]}, {"residual", r.residuals(static_cast<Eigen::Index>(i))}});
  }
  j["residuals"] = res;
  if (reference) {
    j["reference"] = {{"fidelity", reference->fidelity}, {"delta_rho", reference->delta_rho}};
  }
  return j.dump(2);
}

void write_wigner_csv(std::ostream& out, const WignerGrid& g) {
  out << "q,p,W\n";
  for (Eigen::Index i = 0; i < g.q_axis.size(); ++i) {
    for (Eigen::Index k = 0; k < g.p_axis.size(); ++k) {
      out << fmt(g.q_axis(i)) << ',' << fmt(g.p_axis(k)) << ',' << fmt(g.values(i, k)) << '\n';
    }
  }
}

std::string wigner_to_json(const WignerGrid& g) {
  json j;
  j["convention"] = g.convention;
  j["q_axis"] = std::vector<double>(g.q_axis.data(), g.q_axis.data() + g.q_axis.size());
  j["p_axis"] = std::vector<double>(g.p_axis.data(), g.p_axis.data() + g.p_axis.size());
  json rows = json::array();
  for (Eigen::Index i = 0; i < g.values.rows(); ++i) {
    std::vector<double> row(g.values.cols());
    for (Eigen::Index k = 0; k < g.values.cols(); ++k) row[k] = g.values(i, k);
    rows.push_back(row);
  }
  j["values"] = rows;
  j["max_imag"] = g.max_imag;
  j["integral"] = g.integral();
  j["warnings"] = g.warnings;
  return j.dump();
}

// ---------------------------------------------------------------- configuration

void RunConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  auto num = [&] { return parse_double(value, key); };
  auto integer = [&] { return static_cast<int>(parse_int(value, key)); };
  auto flag = [&] { return parse_bool(value, key); };

  if (key == "omega_z_hz") trap.omega_z = 2.0 * std::numbers::pi * num();
  else if (key == "dz0_m") trap.dz0 = num();
  else if (key == "dv0_m_per_s") trap.dv0 = num();
  else if (key == "cloud_rms_m") trap.cloud_rms = num();
  else if (key == "be_time_s") trap.be_time = num();
  else if (key == "fock_dim") fock_dim = integer();
  else if (key == "rotation_times_s") rotation_times = parse_list(value, key);
  else if (key == "bin_center_m") grid.center = num();
  else if (key == "bin_width_m") {
    auto_bin_width = value == "auto";
    if (!auto_bin_width) grid.width = num();
  }
  else if (key == "bin_half_count") grid.half_count = integer();
  else if (key == "nbar") nbar = value.empty() ? std::nullopt : std::optional<double>(num());
  else if (key == "nbar_source") {
    if (value == "measured") nbar_source = NbarSource::measured;
    else if (value == "estimated") nbar_source = NbarSource::estimated;
    else throw InputError("nbar_source must be 'measured' or 'estimated'");
  }
  else if (key == "w_nbar") w_nbar = num();
  else if (key == "cloud_nodes") quadrature.cloud_nodes = integer();
  else if (key == "bin_nodes") quadrature.bin_nodes = integer();
  else if (key == "state") state = value;
  else if (key == "free_flight_t1_s") free_flight_t1 = num();
  else if (key == "eta") eta = num();
  else if (key == "seed") seed = parse_uint(value, key);
  else if (key == "nbar_noisy") nbar_noisy = value.empty() ? std::nullopt : std::optional<double>(num());
  else if (key == "subtract_background") preprocess.subtract_background = flag();
  else if (key == "recenter") preprocess.recenter = flag();
  else if (key == "normalize") preprocess.normalize = flag();
  else if (key == "fixed_center_m") preprocess.fixed_center = value.empty() ? std::nullopt : std::optional<double>(num());
  else if (key == "max_iter") fit.max_iter = integer();
  else if (key == "grad_tol") fit.grad_tol = num();
  else if (key == "max_restarts") fit.max_restarts = integer();
  else if (key == "restart_seed") fit.restart_seed = parse_uint(value, key);
  else if (key == "wigner_extent") {
    const double e = num();
    wigner.q_min = wigner.p_min = -e;
    wigner.q_max = wigner.p_max = e;
  }
  else if (key == "wigner_points") wigner.q_points = wigner.p_points = integer();
  else throw InputError("unknown configuration key '" + key + "'");
}

std::map<std::string, std::string> RunConfig::entries() const {
  std::map<std::string, std::string> e;
  e["omega_z_hz"] = fmt(trap.omega_z / (2.0 * std::numbers::pi));
  e["dz0_m"] = fmt(trap.dz0);
  e["dv0_m_per_s"] = fmt(trap.dv0);
  e["cloud_rms_m"] = fmt(trap.cloud_rms);
  e["be_time_s"] = fmt(trap.be_time);
  e["fock_dim"] = std::to_string(fock_dim);
  e["rotation_times_s"] = join(rotation_times);
  e["bin_center_m"] = fmt(grid.center);
  e["bin_width_m"] = auto_bin_width ? "auto" : fmt(grid.width);
  e["bin_half_count"] = std::to_string(grid.half_count);
  if (nbar) e["nbar"] = fmt(*nbar);
  e["nbar_source"] = nbar_source == NbarSource::measured ? "measured" : "estimated";
  e["w_nbar"] = fmt(w_nbar);
  e["cloud_nodes"] = std::to_string(quadrature.cloud_nodes);
  e["bin_nodes"] = std::to_string(quadrature.bin_nodes);
  if (state) e["state"] = *state;
  if (free_flight_t1) e["free_flight_t1_s"] = fmt(*free_flight_t1);
  e["eta"] = fmt(eta);
  e["seed"] = std::to_string(seed);
  if (nbar_noisy) e["nbar_noisy"] = fmt(*nbar_noisy);
  e["subtract_background"] = preprocess.subtract_background ? "true" : "false";
  e["recenter"] = preprocess.recenter ? "true" : "false";
  e["normalize"] = preprocess.normalize ? "true" : "false";
  if (preprocess.fixed_center) e["fixed_center_m"] = fmt(*preprocess.fixed_center);
  e["max_iter"] = std::to_string(fit.max_iter);
  e["grad_tol"] = fmt(fit.grad_tol);
  e["max_restarts"] = std::to_string(fit.max_restarts);
  e["restart_seed"] = std::to_string(fit.restart_seed);
  return e;
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string t = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key=value");
    cfg.set(t.substr(0, eq), t.substr(eq + 1));
  }
  return cfg;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return parse_config(in);
}

StateSpec parse_state_spec(const std::string& text) {
  const auto colon = text.find(':');
  const std::string kind = trim(text.substr(0, colon));
  const std::string args = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  if (kind == "fock") return FockSpec{static_cast<int>(parse_int(args, "fock state index"))};
  if (kind == "superposition") {
    std::vector<cplx> c;
    for (double v : parse_list(args, "superposition coefficients")) c.emplace_back(v, 0.0);
    return SuperpositionSpec{c};
  }
  if (kind == "cat") return EvenCatSpec{cplx(parse_double(args, "cat amplitude"), 0.0)};
  if (kind == "thermal") return ThermalSpec{parse_double(args, "thermal nbar")};
  throw InputError("unknown state '" + text + "' (use fock:k, superposition:c0,c1,..., cat:alpha, thermal:nbar)");
}

BinGrid RunConfig::resolved_grid(double nbar_value) const {
  return auto_bin_width ? covering_grid(trap, nbar_value, grid.half_count, 4.0, grid.center) : grid;
}

ObservableSet observation_level(const RunConfig& cfg, double nbar) {
  const FockSpace space(cfg.fock_dim);
  return build_observation_level(cfg.trap, cfg.resolved_grid(nbar), rotations_from_times(cfg.trap, cfg.rotation_times), nbar,
                                 space, {cfg.w_nbar, cfg.quadrature});
}

}  // namespace maxent_tomo
