#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace leadtime {

// Returns f(x) and writes the gradient; +inf marks an infeasible point.
using GradientObjective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

enum class LineSearch { kBacktracking, kStrongWolfe };

struct BfgsOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-7;   // max-norm
  double relative_tolerance = 1e-10;  // |f_k - f_{k+1}| / |f_{k+1}|
  LineSearch line_search = LineSearch::kBacktracking;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  // Objective at the start and after every accepted step.
  std::vector<double> trace;
};

BfgsResult minimize_bfgs(const GradientObjective& objective, Eigen::VectorXd x0,
                         const BfgsOptions& options = {});

}  // namespace leadtime
