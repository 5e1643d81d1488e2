#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary. Nothing here calls the library routine it checks.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "maxent_tomo/hilbert.hpp"
#include "maxent_tomo/maxent.hpp"
#include "maxent_tomo/measurement.hpp"

namespace oracle {

using maxent_tomo::CMatrix;
using maxent_tomo::cplx;
using maxent_tomo::RMatrix;
using maxent_tomo::RVector;

// exp(sign * A) by scaling and squaring of a truncated Taylor series.
inline CMatrix taylor_expm(const CMatrix& a, int sign) {
  const CMatrix x = static_cast<double>(sign) * a;
  const double norm = x.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  while (norm / std::ldexp(1.0, squarings) > 0.25) ++squarings;
  const CMatrix y = x / std::ldexp(1.0, squarings);
  CMatrix term = CMatrix::Identity(a.rows(), a.cols());
  CMatrix sum = term;
  for (int k = 1; k <= 30; ++k) {
    term = (term * y / static_cast<double>(k)).eval();
    sum += term;
  }
  for (int i = 0; i < squarings; ++i) sum = (sum * sum).eval();
  return sum;
}

// Normalized Hermite function from the explicit polynomial
//   H_n(x) = n! sum_m (-1)^m (2x)^(n-2m) / (m! (n-2m)!).
inline double hermite_explicit(int n, double xd) {
  const long double x = xd;
  long double h = 0.0L;
  for (int m = 0; 2 * m <= n; ++m) {
    const long double term =
        std::exp(std::lgamma(n + 1.0L) - std::lgamma(m + 1.0L) - std::lgamma(n - 2 * m + 1.0L)) *
        std::pow(2.0L * x, static_cast<long double>(n - 2 * m));
    h += (m % 2 ? -term : term);
  }
  const long double log_norm =
      -0.5L * (n * std::log(2.0L) + std::lgamma(n + 1.0L) + 0.5L * std::log(std::numbers::pi_v<long double>));
  return static_cast<double>(h * std::exp(log_norm - 0.5L * x * x));
}

// Composite Gauss-Legendre on [a, b] with `panels` panels of 8 nodes.
template <class F>
double integrate(F f, double a, double b, int panels) {
  static const double x8[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
  static const double w8[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int i = 0; i < 4; ++i) {
      total += w8[i] * (f(mid - 0.5 * h * x8[i]) + f(mid + 0.5 * h * x8[i]));
    }
  }
  return 0.5 * h * total;
}

// Kinetic-momentum distribution of rho after in-trap rotation theta:
//   P(u) = sum_mn rho_mn e^{-i(m-n) theta} phi_m(u) conj(phi_n(u)),  phi_n = (-i)^n psi_n.
inline double momentum_density(const CMatrix& rho, double theta, double u) {
  const int n = static_cast<int>(rho.rows());
  std::vector<cplx> phi(n);
  const cplx mi(0.0, -1.0);
  for (int k = 0; k < n; ++k) phi[k] = std::pow(mi, k) * std::polar(1.0, -k * theta) * hermite_explicit(k, u);
  cplx total = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) total += rho(a, b) * phi[a] * std::conj(phi[b]);
  }
  return total.real();
}

// Probability of bin k by direct double integration over the bin and the
// Gaussian cloud, with ten times the library's default node counts.
inline double bin_probability(const CMatrix& rho, const maxent_tomo::TrapConfig& cfg, const maxent_tomo::BinGrid& grid,
                              double theta, int k) {
  const double scale = cfg.detector_scale();
  const double sigma = cfg.cloud_rms;
  const double lo = grid.lower_edge(k);
  const double hi = grid.upper_edge(k);
  auto over_bin = [&](double xi) {
    return integrate([&](double z) { return momentum_density(rho, theta, (z - grid.center - xi) / scale) / scale; }, lo,
                     hi, 10);
  };
  auto gauss = [&](double xi) {
    return std::exp(-0.5 * xi * xi / (sigma * sigma)) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  };
  return integrate([&](double xi) { return gauss(xi) * over_bin(xi); }, -8.0 * sigma, 8.0 * sigma, 40);
}

// W(q,p) = int dz <q - z/2|rho|q + z/2> e^{i p z} with real position
// wavefunctions, integrated directly.
inline double wigner_direct(const CMatrix& rho, double q, double p) {
  const int n = static_cast<int>(rho.rows());
  auto integrand_re = [&](double z) {
    cplx s = 0.0;
    for (int a = 0; a < n; ++a) {
      const double pa = hermite_explicit(a, q - 0.5 * z);
      for (int b = 0; b < n; ++b) s += rho(a, b) * pa * hermite_explicit(b, q + 0.5 * z);
    }
    return (s * std::polar(1.0, p * z)).real();
  };
  const double reach = 2.0 * (std::abs(q) + 14.0);
  return integrate(integrand_re, -reach, reach, 96);
}

inline CMatrix random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = cplx(g(rng), g(rng));
  }
  return 0.5 * (m + m.adjoint());
}

inline CMatrix random_density(int n, std::mt19937_64& rng, int rank = -1) {
  if (rank < 0) rank = n;
  std::normal_distribution<double> g(0.0, 1.0);
  CMatrix a(n, rank);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < rank; ++j) a(i, j) = cplx(g(rng), g(rng));
  }
  CMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

// Observation level of random Hermitian operators (no bin grid).
inline maxent_tomo::ObservableSet random_observables(int dim, int count, std::mt19937_64& rng) {
  maxent_tomo::ObservableSet set;
  std::uniform_real_distribution<double> w(0.5, 2.0);
  for (int i = 0; i < count; ++i) {
    set.entries.push_back({maxent_tomo::HermitianOperator(random_hermitian(dim, rng)), maxent_tomo::ObservableKind::other,
                           -1, 0, std::nullopt, w(rng), std::nullopt});
  }
  return set;
}

inline void set_means_from(maxent_tomo::ObservableSet& set, const CMatrix& rho) {
  for (auto& o : set.entries) o.mean = (rho * o.op.matrix()).trace().real();
}

// Central finite-difference gradient of dF with step h.
inline RVector fd_gradient(const maxent_tomo::LagrangeVector& lambdas, const maxent_tomo::ObservableSet& set, double h) {
  RVector g(lambdas.values.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    maxent_tomo::LagrangeVector up = lambdas, down = lambdas;
    up.values(i) += h;
    down.values(i) -= h;
    g(i) = (maxent_tomo::deviation(maxent_tomo::canonical_state(up, set), set) -
            maxent_tomo::deviation(maxent_tomo::canonical_state(down, set), set)) /
           (2.0 * h);
  }
  return g;
}

}  // namespace oracle
