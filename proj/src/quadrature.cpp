#include "maxent_tomo/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "maxent_tomo/errors.hpp"

namespace maxent_tomo {

namespace {

// Nodes are the eigenvalues of the symmetric Jacobi matrix, weights are mu0 times
// the squared first components of the eigenvectors.
QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
  const Eigen::Index n = offdiag.size() + 1;
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    jacobi(i, i + 1) = offdiag(i);
    jacobi(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) throw QuadratureError("Golub-Welsch eigensolver failed");
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = mu0 * es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

void check_count(int n) {
  if (n < 2) throw QuadratureError("quadrature needs at least 2 nodes, got " + std::to_string(n));
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  check_count(n);
  Eigen::VectorXd b(n - 1);
  for (int k = 1; k < n; ++k) b(k - 1) = std::sqrt(0.5 * k);
  return golub_welsch(b, std::sqrt(std::numbers::pi));
}

QuadratureRule gauss_legendre(int n) {
  check_count(n);
  Eigen::VectorXd b(n - 1);
  for (int k = 1; k < n; ++k) b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(b, 2.0);
}

}  // namespace maxent_tomo
