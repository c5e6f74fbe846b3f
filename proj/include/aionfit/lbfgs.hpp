#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace aionfit {

struct LbfgsOptions {
  /// Initial trial step of every line search (after the first iteration,
  /// where it is additionally capped by 1/|g|).
  double step_scale = 1.0;
  int history = 10;
  /// Stop once the gradient infinity norm falls below this.
  double grad_tol = 1e-7;
  int max_evals_per_iter = 20;
  int max_iterations = 100;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature

  void validate() const;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double f = 0.0;
  /// trace[0] = f(x0), then one value per accepted iteration.
  std::vector<double> trace;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::string message;
};

/// Returns f(x) and writes the gradient into grad (already sized).
using ObjectiveFunction = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

/// Limited-memory BFGS with a strong-Wolfe line search. Only iterates that
/// decrease f are accepted, so the returned trace is non-increasing.
/// Throws InputError when f(x0) or its gradient is not finite.
LbfgsResult lbfgs_minimize(const ObjectiveFunction& f, const Eigen::VectorXd& x0, const LbfgsOptions& opts);

}  // namespace aionfit
