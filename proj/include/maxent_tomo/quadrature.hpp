#pragma once

#include <Eigen/Dense>

namespace maxent_tomo {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// Gauss-Hermite rule for the weight exp(-x^2) on the real line (Golub-Welsch).
QuadratureRule gauss_hermite(int n);

// Gauss-Legendre rule on [-1, 1] (Golub-Welsch).
QuadratureRule gauss_legendre(int n);

}  // namespace maxent_tomo
