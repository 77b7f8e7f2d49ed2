#include "optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace leadtime {
namespace {

constexpr double kArmijo = 1e-4;
constexpr double kCurvature = 0.9;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Trial {
  double step = 0.0;
  double value = kInf;
  double slope = 0.0;  // directional derivative along the search direction
  Eigen::VectorXd x;
  Eigen::VectorXd gradient;
};

Trial evaluate(const GradientObjective& objective, const Eigen::VectorXd& x,
               const Eigen::VectorXd& direction, double step) {
  Trial t;
  t.step = step;
  t.x = x + step * direction;
  t.gradient = Eigen::VectorXd::Zero(x.size());
  t.value = objective(t.x, t.gradient);
  if (!std::isfinite(t.value) || !t.gradient.allFinite()) t.value = kInf;
  t.slope = t.gradient.dot(direction);
  return t;
}

bool sufficient_decrease(const Trial& t, const Trial& origin) {
  return t.value <= origin.value + kArmijo * t.step * origin.slope;
}

bool backtracking(const GradientObjective& objective, const Trial& origin,
                  const Eigen::VectorXd& direction, double step, Trial& out) {
  for (int k = 0; k < 60; ++k, step *= 0.5) {
    Trial t = evaluate(objective, origin.x, direction, step);
    if (sufficient_decrease(t, origin)) {
      out = std::move(t);
      return true;
    }
  }
  return false;
}

// Nocedal & Wright, algorithms 3.5 and 3.6. Zoom uses safeguarded
// quadratic interpolation, falling back to bisection.
bool strong_wolfe(const GradientObjective& objective, const Trial& origin,
                  const Eigen::VectorXd& direction, double step, Trial& out) {
  auto zoom = [&](Trial lo, Trial hi) {
    for (int k = 0; k < 50; ++k) {
      double next = 0.5 * (lo.step + hi.step);
      if (std::isfinite(hi.value)) {
        const double span = hi.step - lo.step;
        const double curvature = 2.0 * (hi.value - lo.value - lo.slope * span);
        if (curvature > 0.0) {
          const double q = lo.step - lo.slope * span * span / curvature;
          const double a = std::min(lo.step, hi.step);
          const double b = std::max(lo.step, hi.step);
          if (q > a + 0.1 * (b - a) && q < b - 0.1 * (b - a)) next = q;
        }
      }
      Trial t = evaluate(objective, origin.x, direction, next);
      if (!sufficient_decrease(t, origin) || t.value >= lo.value) {
        hi = std::move(t);
      } else {
        if (std::abs(t.slope) <= -kCurvature * origin.slope) {
          out = std::move(t);
          return true;
        }
        if (t.slope * (hi.step - lo.step) >= 0.0) hi = lo;
        lo = std::move(t);
      }
      if (std::abs(hi.step - lo.step) <= 1e-14 * std::max(1.0, std::abs(lo.step))) break;
    }
    // Accept the best Armijo point found even without the curvature condition.
    if (lo.step > 0.0 && lo.value < origin.value) {
      out = std::move(lo);
      return true;
    }
    return false;
  };

  Trial previous = origin;
  for (int k = 0; k < 40; ++k) {
    Trial t = evaluate(objective, origin.x, direction, step);
    if (!sufficient_decrease(t, origin) || (k > 0 && t.value >= previous.value))
      return zoom(std::move(previous), std::move(t));
    if (std::abs(t.slope) <= -kCurvature * origin.slope) {
      out = std::move(t);
      return true;
    }
    if (t.slope >= 0.0) return zoom(std::move(t), std::move(previous));
    previous = std::move(t);
    step *= 2.0;
  }
  out = std::move(previous);
  return out.step > 0.0;
}

}  // namespace

BfgsResult minimize_bfgs(const GradientObjective& objective, Eigen::VectorXd x0,
                         const BfgsOptions& options) {
  const Eigen::Index dim = x0.size();
  BfgsResult result;
  Trial current;
  current.x = std::move(x0);
  current.gradient = Eigen::VectorXd::Zero(dim);
  current.value = objective(current.x, current.gradient);
  result.x = current.x;
  result.value = current.value;
  result.trace.push_back(current.value);
  if (!std::isfinite(current.value) || !current.gradient.allFinite()) return result;

  Eigen::MatrixXd inverse_hessian = Eigen::MatrixXd::Identity(dim, dim);
  bool scaled = false;
  bool restarted = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (current.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      break;
    }
    Eigen::VectorXd direction = -inverse_hessian * current.gradient;
    current.slope = current.gradient.dot(direction);
    if (!(current.slope < 0.0)) {
      inverse_hessian.setIdentity();
      direction = -current.gradient;
      current.slope = current.gradient.dot(direction);
    }
    const double step =
        scaled ? 1.0 : std::min(1.0, 1.0 / current.gradient.lpNorm<Eigen::Infinity>());

    Trial next;
    const bool found =
        options.line_search == LineSearch::kBacktracking
            ? backtracking(objective, current, direction, step, next)
            : strong_wolfe(objective, current, direction, step, next);
    if (!found || !(next.value <= current.value)) {
      // One steepest-descent restart before giving up.
      if (restarted) break;
      restarted = true;
      inverse_hessian.setIdentity();
      scaled = false;
      continue;
    }
    restarted = false;
    result.iterations = iter + 1;

    const Eigen::VectorXd s = next.x - current.x;
    const Eigen::VectorXd y = next.gradient - current.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        inverse_hessian *= sy / y.squaredNorm();
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd left =
          Eigen::MatrixXd::Identity(dim, dim) - rho * s * y.transpose();
      inverse_hessian = left * inverse_hessian * left.transpose() + rho * s * s.transpose();
    }

    const double change = std::abs(current.value - next.value);
    current = std::move(next);
    result.trace.push_back(current.value);
    if (change <= options.relative_tolerance * std::abs(current.value)) {
      result.converged = true;
      break;
    }
  }
  if (current.gradient.lpNorm<Eigen::Infinity>() < options.gradient_tolerance)
    result.converged = true;
  result.x = current.x;
  result.value = current.value;
  return result;
}

}  // namespace leadtime
