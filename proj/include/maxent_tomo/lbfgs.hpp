#pragma once

// Limited-memory BFGS with a strong-Wolfe line search.

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace maxent_tomo {

struct LbfgsOptions {
  int memory = 20;
  int max_iter = 20000;
  double grad_tol = 1e-9;  // on the infinity norm of the gradient
  double f_tol = 0.0;      // stop once f drops below this
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search = 40;
  // When set, trial steps are shortened so that step_norm(alpha * d) <= max_step.
  std::function<double(const Eigen::VectorXd&)> step_norm;
  double max_step = 0.0;
  // Called with (iteration, f) for the start point and every accepted iterate.
  std::function<void(int, double)> on_iterate;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd grad;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

// Objective: returns f(x) and writes the gradient into `grad`.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

// Accepted iterates never increase f (Armijo condition).
LbfgsResult lbfgs_minimize(const Objective& fn, Eigen::VectorXd x0, const LbfgsOptions& opts = {});

}  // namespace maxent_tomo
