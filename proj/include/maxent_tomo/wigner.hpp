#pragma once

// Wigner function W(q,p) = int dz <q - z/2|rho|q + z/2> e^{i p z}, without the
// 1/(2 pi) prefactor: the vacuum peaks at 2 and the function integrates to 2 pi.
// p is the kinetic momentum.

#include <string>
#include <vector>

#include "maxent_tomo/hilbert.hpp"

namespace maxent_tomo {

inline constexpr const char* kWignerConvention = "unnormalized-2pi";

struct WignerGridSpec {
  double q_min = -6.0;
  double q_max = 6.0;
  int q_points = 257;
  double p_min = -6.0;
  double p_max = 6.0;
  int p_points = 257;
};

struct WignerGrid {
  RVector q_axis;
  RVector p_axis;
  RMatrix values;  // values(i, j) = W(q_i, p_j)
  std::string convention = kWignerConvention;
  double max_imag = 0.0;  // largest imaginary residue of the complex evaluation
  std::vector<std::string> warnings;

  double dq() const;
  double dp() const;
  double integral() const;  // sum W dq dp
};

double wigner_point(const DensityOperator& rho, double q, double p);

WignerGrid wigner_eval(const DensityOperator& rho, const WignerGridSpec& spec = {});

struct Marginal {
  RVector x;
  RVector density;
};

// Distribution of x_theta = q cos(theta) + p sin(theta), integrating W along the
// orthogonal direction with bilinear interpolation, divided by 2 pi.
Marginal wigner_marginal(const WignerGrid& grid, double theta);

}  // namespace maxent_tomo
