#include "maxent_tomo/wigner.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "maxent_tomo/errors.hpp"
#include "maxent_tomo/parallel.hpp"

namespace maxent_tomo {

namespace {

RVector axis(double lo, double hi, int n) {
  if (n < 2 || !(hi > lo)) throw InputError("Wigner grid axes need at least 2 points and hi > lo");
  return RVector::LinSpaced(n, lo, hi);
}

// Generalized Laguerre L_j^{(k)}(x) for j = 0..count-1.
void laguerre_column(int k, int count, double x, double* out) {
  if (count <= 0) return;
  out[0] = 1.0;
  if (count > 1) out[1] = 1.0 + k - x;
  for (int j = 1; j + 1 < count; ++j) {
    out[j + 1] = ((2.0 * j + 1.0 + k - x) * out[j] - (j + k) * out[j - 1]) / (j + 1.0);
  }
}

// sum_mn rho_mn W_mn(q,p), W_mn for m >= n equal to
//   2 (-1)^n sqrt(n!/m!) (sqrt2 (q - i p))^{m-n} e^{-r^2} L_n^{(m-n)}(2 r^2),
// and W_nm = conj(W_mn).
cplx wigner_complex(const CMatrix& rho, double q, double p, std::vector<double>& lag) {
  const int dim = static_cast<int>(rho.rows());
  const double r2 = q * q + p * p;
  const double gauss = 2.0 * std::exp(-r2);
  const double log_r = r2 > 0.0 ? 0.5 * std::log(2.0 * r2) : -INFINITY;
  const double phi = std::atan2(p, q);
  lag.resize(dim);
  cplx total = 0.0;
  for (int k = 0; k < dim; ++k) {
    if (k > 0 && r2 == 0.0) break;
    laguerre_column(k, dim - k, 2.0 * r2, lag.data());
    const cplx phase = std::polar(1.0, -k * phi);
    for (int n = 0; n + k < dim; ++n) {
      const int m = n + k;
      double mag = gauss * lag[n];
      if (k > 0) mag *= std::exp(0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) + k * log_r);
      if (n % 2 == 1) mag = -mag;
      const cplx w = mag * phase;
      total += rho(m, n) * w;
      if (k > 0) total += rho(n, m) * std::conj(w);
    }
  }
  return total;
}

}  // namespace

double WignerGrid::dq() const { return q_axis(1) - q_axis(0); }
double WignerGrid::dp() const { return p_axis(1) - p_axis(0); }
double WignerGrid::integral() const { return values.sum() * dq() * dp(); }

double wigner_point(const DensityOperator& rho, double q, double p) {
  std::vector<double> lag;
  return wigner_complex(rho.matrix(), q, p, lag).real();
}

WignerGrid wigner_eval(const DensityOperator& rho, const WignerGridSpec& spec) {
  WignerGrid grid;
  grid.q_axis = axis(spec.q_min, spec.q_max, spec.q_points);
  grid.p_axis = axis(spec.p_min, spec.p_max, spec.p_points);
  grid.values.resize(spec.q_points, spec.p_points);

  const double nbar = rho.expectation(number_operator(FockSpace(rho.dim())).matrix());
  const double reach = std::sqrt(2.0 * std::max(nbar, 0.0)) + 3.0;
  if (spec.q_min > -reach || spec.q_max < reach || spec.p_min > -reach || spec.p_max < reach) {
    std::ostringstream os;
    os << "grid does not span +-" << reach << " in both axes; the Wigner function may be clipped";
    grid.warnings.push_back(os.str());
  }

  std::vector<double> row_imag(spec.q_points, 0.0);
  parallel_for(static_cast<std::size_t>(spec.q_points), [&](std::size_t i) {
    std::vector<double> lag;
    for (int j = 0; j < spec.p_points; ++j) {
      const cplx w = wigner_complex(rho.matrix(), grid.q_axis(i), grid.p_axis(j), lag);
      grid.values(static_cast<Eigen::Index>(i), j) = w.real();
      row_imag[i] = std::max(row_imag[i], std::abs(w.imag()));
    }
  });
  for (double v : row_imag) grid.max_imag = std::max(grid.max_imag, v);
  return grid;
}

namespace {

double bilinear(const WignerGrid& g, double q, double p) {
  const double fq = (q - g.q_axis(0)) / g.dq();
  const double fp = (p - g.p_axis(0)) / g.dp();
  const Eigen::Index nq = g.q_axis.size();
  const Eigen::Index np = g.p_axis.size();
  if (fq < 0.0 || fp < 0.0 || fq > nq - 1 || fp > np - 1) return 0.0;
  const Eigen::Index i = std::min<Eigen::Index>(static_cast<Eigen::Index>(fq), nq - 2);
  const Eigen::Index j = std::min<Eigen::Index>(static_cast<Eigen::Index>(fp), np - 2);
  const double tq = fq - i;
  const double tp = fp - j;
  return (1 - tq) * (1 - tp) * g.values(i, j) + tq * (1 - tp) * g.values(i + 1, j) +
         (1 - tq) * tp * g.values(i, j + 1) + tq * tp * g.values(i + 1, j + 1);
}

}  // namespace

Marginal wigner_marginal(const WignerGrid& grid, double theta) {
  if (theta < 0.0 || theta >= std::numbers::pi) throw InputError("marginal angle must lie in [0, pi)");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double ds = std::min(grid.dq(), grid.dp());
  const double reach = std::hypot(std::max(std::abs(grid.q_axis(0)), std::abs(grid.q_axis(grid.q_axis.size() - 1))),
                                  std::max(std::abs(grid.p_axis(0)), std::abs(grid.p_axis(grid.p_axis.size() - 1))));
  const int half = static_cast<int>(std::ceil(reach / ds));

  Marginal out;
  out.x = grid.q_axis;
  out.density.resize(out.x.size());
  for (Eigen::Index i = 0; i < out.x.size(); ++i) {
    const double x = out.x(i);
    double sum = 0.0;
    for (int t = -half; t <= half; ++t) {
      const double u = t * ds;
      sum += bilinear(grid, x * c - u * s, x * s + u * c);
    }
    out.density(i) = sum * ds / (2.0 * std::numbers::pi);
  }
  return out;
}

}  // namespace maxent_tomo
