#include "gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "optimize.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace leadtime {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNightsTailFloor = 1e-12;

// log1p(t) / t and its derivative, with series near t = 0.
double log1p_ratio(double t) {
  if (std::abs(t) < 1e-4) return 1.0 - t / 2.0 + t * t / 3.0 - t * t * t / 4.0;
  return std::log1p(t) / t;
}

double log1p_ratio_slope(double t) {
  if (std::abs(t) < 1e-4) return -0.5 + 2.0 * t / 3.0 - 0.75 * t * t + 0.8 * t * t * t;
  return (t / (1.0 + t) - std::log1p(t)) / (t * t);
}

// Mean negative log-likelihood in (xi, log beta) with its gradient.
double mean_nll(std::span<const double> y, double xi, double log_beta, double* grad) {
  const double beta = std::exp(log_beta);
  if (!std::isfinite(beta) || !(beta > 0.0)) return kInf;
  double log_terms = 0.0, ratio_terms = 0.0;
  double d_xi = 0.0, d_log_beta = 0.0;
  for (double v : y) {
    const double z = v / beta;
    const double t = xi * z;
    if (!(1.0 + t > 0.0)) return kInf;
    log_terms += std::log1p(t);
    ratio_terms += z * log1p_ratio(t);
    if (grad) {
      d_xi += z / (1.0 + t) + z * z * log1p_ratio_slope(t);
      d_log_beta -= (t + z) / (1.0 + t);
    }
  }
  const double n = double(y.size());
  if (grad) {
    grad[0] = d_xi / n;
    grad[1] = 1.0 + d_log_beta / n;
  }
  return log_beta + (log_terms + ratio_terms) / n;
}

bool feasible(std::span<const double> y, double xi, double beta) {
  if (!std::isfinite(xi) || !std::isfinite(beta) || !(beta > 0.0)) return false;
  if (xi >= 0.0) return true;
  const double y_max = *std::max_element(y.begin(), y.end());
  return 1.0 + xi * y_max / beta > 0.0;
}

bool mle(std::span<const double> y, double xi0, double beta0, LineSearch search,
         double& xi, double& beta) {
  if (!feasible(y, xi0, beta0)) return false;
  GradientObjective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& g) {
    double grad[2] = {0.0, 0.0};
    const double v = mean_nll(y, theta[0], theta[1], grad);
    g[0] = grad[0];
    g[1] = grad[1];
    return v;
  };
  BfgsOptions options;
  options.line_search = search;
  const BfgsResult r = minimize_bfgs(objective, Eigen::Vector2d(xi0, std::log(beta0)), options);
  if (!r.converged || !std::isfinite(r.value)) return false;
  xi = r.x[0];
  beta = std::exp(r.x[1]);
  return xi > -1.0 && feasible(y, xi, beta);
}

}  // namespace

std::string_view to_string(GpdEstimator estimator) noexcept {
  switch (estimator) {
    case GpdEstimator::kMleA: return "MLE_A";
    case GpdEstimator::kMleB: return "MLE_B";
    case GpdEstimator::kPwm: return "PWM";
    case GpdEstimator::kMom: return "MOM";
  }
  return "unknown";
}

TailRatioSeries tail_ratio_series(std::span<const PairedDay> days,
                                  std::span<const int> thresholds) {
  for (int u : thresholds)
    if (u < 0 || u > kMaxLead - 1)
      fail(ErrorCode::kThresholdOutOfRange,
           "tail threshold " + std::to_string(u) + " outside [0, 364]");
  TailRatioSeries out;
  out.thresholds.assign(thresholds.begin(), thresholds.end());
  const std::size_t cells = days.size() * thresholds.size();
  out.ratio.assign(cells, kNaN);
  out.gbv_tail.assign(cells, 0.0);
  out.nights_tail.assign(cells, 0.0);
  out.undefined_mask.assign(cells, true);
  for (std::size_t d = 0; d < days.size(); ++d) {
    out.dates.push_back(days[d].date);
    for (std::size_t k = 0; k < thresholds.size(); ++k) {
      const std::size_t i = out.index(d, k);
      out.gbv_tail[i] = tail_mass(days[d].gbv, thresholds[k]);
      out.nights_tail[i] = tail_mass(days[d].nights, thresholds[k]);
      if (out.nights_tail[i] >= kNightsTailFloor) {
        out.ratio[i] = out.gbv_tail[i] / out.nights_tail[i];
        out.undefined_mask[i] = false;
      }
    }
  }
  return out;
}

std::vector<double> draw_leads(std::span<const DailyPmf> pool, std::size_t draws_per_day,
                               std::uint64_t seed, bool jitter) {
  if (draws_per_day == 0) fail(ErrorCode::kInvalidArgument, "draws_per_day must be >= 1");
  std::vector<double> draws(pool.size() * draws_per_day);
  parallel_for(pool.size(), [&](std::size_t d) {
    const PmfArray c = cdf(pool[d]);
    const double total = c.back();
    Rng rng(seed, d);
    double* out = draws.data() + d * draws_per_day;
    for (std::size_t k = 0; k < draws_per_day; ++k) {
      const double target = rng.uniform() * total;
      auto it = std::upper_bound(c.begin(), c.end(), target);
      // target can round up to total
      if (it == c.end()) it = c.end() - 1;
      const int lead = int(it - c.begin());
      double x = double(lead);
      if (jitter) {
        const double lo = std::max(0.0, x - 0.5);
        const double hi = std::min(double(kMaxLead), x + 0.5);
        x = lo + (hi - lo) * rng.uniform();
      }
      out[k] = x;
    }
  });
  return draws;
}

std::vector<double> exceedances_over(std::span<const double> draws, double u) {
  std::vector<double> y;
  for (double x : draws)
    if (x > u) y.push_back(x - u);
  return y;
}

std::vector<double> sample_exceedances(std::span<const DailyPmf> pool, double u,
                                       std::size_t draws_per_day, std::uint64_t seed,
                                       bool jitter) {
  const std::vector<double> draws = draw_leads(pool, draws_per_day, seed, jitter);
  return exceedances_over(draws, u);
}

double gpd_negative_log_likelihood(std::span<const double> exceedances, double xi,
                                   double beta) {
  if (exceedances.empty() || !(beta > 0.0)) return kInf;
  return double(exceedances.size()) * mean_nll(exceedances, xi, std::log(beta), nullptr);
}

std::pair<double, double> gpd_pwm(std::span<const double> exceedances) {
  if (exceedances.empty()) fail(ErrorCode::kInvalidArgument, "PWM needs data");
  std::vector<double> sorted(exceedances.begin(), exceedances.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = double(sorted.size());
  double b0 = 0.0, b1 = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    b0 += sorted[i];
    b1 += (1.0 - (double(i + 1) - 0.35) / n) * sorted[i];
  }
  b0 /= n;
  b1 /= n;
  const double denom = b0 - 2.0 * b1;
  return {2.0 - b0 / denom, 2.0 * b0 * b1 / denom};
}

std::pair<double, double> gpd_mom_from_moments(double mean, double variance) {
  const double xi = 0.5 * (1.0 - mean * mean / variance);
  return {xi, mean * (1.0 - xi)};
}

std::pair<double, double> gpd_mom(std::span<const double> exceedances) {
  if (exceedances.size() < 2) fail(ErrorCode::kInvalidArgument, "MOM needs two values");
  const double n = double(exceedances.size());
  double mean = 0.0;
  for (double v : exceedances) mean += v;
  mean /= n;
  double variance = 0.0;
  for (double v : exceedances) variance += (v - mean) * (v - mean);
  variance /= n - 1.0;
  return gpd_mom_from_moments(mean, variance);
}

GpdFit fit_gpd(std::span<const double> exceedances, double u) {
  if (exceedances.size() < kMinExceedances)
    fail(ErrorCode::kTooFewExceedances,
         std::to_string(exceedances.size()) + " exceedances above " + std::to_string(u) +
             ", need " + std::to_string(kMinExceedances));
  for (double v : exceedances)
    if (!(v > 0.0) || !std::isfinite(v))
      fail(ErrorCode::kInvalidArgument, "exceedances must be positive and finite");

  GpdFit fit;
  fit.threshold = u;
  fit.n_exceed = exceedances.size();
  double mean = 0.0;
  for (double v : exceedances) mean += v;
  mean /= double(exceedances.size());

  const auto [pwm_xi, pwm_beta] = gpd_pwm(exceedances);
  const bool pwm_ok = feasible(exceedances, pwm_xi, pwm_beta);

  double xi = 0.0, beta = mean;
  const double start_xi = pwm_ok && pwm_xi > -0.9 ? pwm_xi : 0.1;
  const double start_beta = pwm_ok && pwm_xi > -0.9 ? pwm_beta : mean;
  if (mle(exceedances, start_xi, start_beta, LineSearch::kBacktracking, xi, beta)) {
    fit.xi = xi;
    fit.beta = beta;
    fit.estimator = GpdEstimator::kMleA;
    return fit;
  }
  if (mle(exceedances, 0.0, mean, LineSearch::kStrongWolfe, xi, beta)) {
    fit.xi = xi;
    fit.beta = beta;
    fit.estimator = GpdEstimator::kMleB;
    return fit;
  }
  if (pwm_ok) {
    fit.xi = pwm_xi;
    fit.beta = pwm_beta;
    fit.estimator = GpdEstimator::kPwm;
    return fit;
  }
  const auto [mom_xi, mom_beta] = gpd_mom(exceedances);
  if (feasible(exceedances, mom_xi, mom_beta)) {
    fit.xi = mom_xi;
    fit.beta = mom_beta;
    fit.estimator = GpdEstimator::kMom;
    return fit;
  }
  fail(ErrorCode::kAllStagesFailed,
       "every GPD estimator failed above threshold " + std::to_string(u));
}

StabilityProfile stability_sweep(std::span<const DailyPmf> pool,
                                 std::span<const int> thresholds,
                                 std::size_t draws_per_day, std::uint64_t seed,
                                 bool jitter) {
  for (std::size_t k = 1; k < thresholds.size(); ++k)
    if (thresholds[k] <= thresholds[k - 1])
      fail(ErrorCode::kInvalidArgument, "stability thresholds must be strictly increasing");
  if (pool.empty()) fail(ErrorCode::kEmptyInput, "no days to sample");
  const std::vector<double> draws = draw_leads(pool, draws_per_day, seed, jitter);

  StabilityProfile profile;
  profile.thresholds.assign(thresholds.begin(), thresholds.end());
  const std::size_t m = thresholds.size();
  profile.xi_by_threshold.assign(m, kNaN);
  profile.n_by_threshold.assign(m, 0);
  profile.fits.assign(m, std::nullopt);
  parallel_for(m, [&](std::size_t k) {
    const std::vector<double> y = exceedances_over(draws, double(thresholds[k]));
    profile.n_by_threshold[k] = y.size();
    if (y.size() < kMinExceedances) return;
    try {
      profile.fits[k] = fit_gpd(y, double(thresholds[k]));
      profile.xi_by_threshold[k] = profile.fits[k]->xi;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kAllStagesFailed) throw;
    }
  });
  return profile;
}

}  // namespace leadtime
