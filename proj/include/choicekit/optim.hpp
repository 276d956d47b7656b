#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace choicekit {

// Objective: returns f(x) and fills grad. Minimization convention.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct OptimOptions {
  int max_iterations = 200;
  double gradient_tolerance = 1e-6;  // converged when ||g|| <= tol * (1 + |f|)
  double parameter_bound = 1e4;      // |x|_inf beyond this flags divergence
  bool verbose = false;
};

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

// BFGS with a strong-Wolfe line search (bracket + zoom). The objective must
// be smooth; the inverse-Hessian approximation resets to identity if a
// curvature update would break positive definiteness.
OptimResult minimize_bfgs(const Objective& objective, const Eigen::VectorXd& x0,
                          const OptimOptions& options = {});

}  // namespace choicekit
