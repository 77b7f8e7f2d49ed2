#pragma once

#include <cstddef>
#include <utility>

#include "composition.hpp"

namespace leadtime {

struct SmoothFit {
  PmfArray fitted_pmf{};
  double edf = 0.0;
  std::size_t k_used = 0;
  double lambda = 0.0;
  bool k_check_passed = true;
};

inline constexpr double kLogShareFloor = 1e-8;
inline constexpr double kLambdaMin = 1e-6;
inline constexpr double kLambdaMax = 1e6;
inline constexpr int kLambdaGrid = 61;

// Cubic B-spline fit to log(x + 1e-8) with a second-difference penalty,
// lambda chosen by REML. k doubles (capped at k_max) while the residual
// check fails. Throws BasisTooSmall when k_init < 4, InvalidArgument when
// k_init > k_max or k_max > 366.
SmoothFit smooth_pmf(const DailyPmf& x, std::size_t k_init = 20, std::size_t k_max = 100);

// One fit on a fixed basis and smoothing parameter; no basis check.
SmoothFit smooth_pmf_fixed(const DailyPmf& x, std::size_t k, double lambda);

// REML criterion (up to a constant) for a basis size and lambda.
double reml_score(const DailyPmf& x, std::size_t k, double lambda);

// Residual check on a fit: lag-1 autocorrelation of working residuals and
// its permutation p-value (199 shuffles). Passes unless rho > 0.2 and p < 0.05.
struct BasisCheck {
  double autocorrelation = 0.0;
  double p_value = 1.0;
  bool passed = true;
};
BasisCheck basis_check(const DailyPmf& x, const SmoothFit& fit);

// In-sample (crps, kld) of the fit against x.
std::pair<double, double> score_smoother(const SmoothFit& fit, const DailyPmf& x);

}  // namespace leadtime
