#include "breakpoints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "resampling.hpp"

namespace leadtime {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Bartlett bandwidth from the AR(1) plug-in rule given lag-1 autocorrelation.
std::size_t ar1_bandwidth(double rho, std::size_t n) {
  const std::size_t cap = n >= 2 ? n - 2 : 0;
  if (!std::isfinite(rho) || std::abs(1.0 - rho) < 1e-12 ||
      std::abs(1.0 + rho) < 1e-12)
    return cap;
  const double one_minus = (1.0 - rho) * (1.0 - rho);
  const double one_plus = (1.0 + rho) * (1.0 + rho);
  const double alpha = 4.0 * rho * rho / (one_minus * one_plus);
  const double lag = std::ceil(1.1447 * std::cbrt(alpha * double(n)));
  if (!std::isfinite(lag) || lag >= double(cap)) return cap;
  return lag <= 0.0 ? 0 : std::size_t(lag);
}

// gamma(j) returns the lag-j autocovariance (divisor n).
template <class Autocov>
HacEstimate bartlett_hac(std::size_t n, Autocov&& gamma) {
  const double g0 = gamma(0);
  if (!(g0 > 0.0)) return {0.0, 0.0};
  const std::size_t lag = ar1_bandwidth(gamma(1) / g0, n);
  double lrv = g0;
  for (std::size_t j = 1; j <= lag; ++j)
    lrv += 2.0 * (1.0 - double(j) / double(lag + 1)) * gamma(j);
  return {std::max(lrv, 0.0), double(lag)};
}

std::vector<double> centered(std::span<const double> series) {
  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= double(series.size());
  std::vector<double> z(series.begin(), series.end());
  for (double& v : z) v -= mean;
  return z;
}

// Prefix sums of z and of lagged products z_t z_{t+j}, extended on demand.
class LaggedSums {
 public:
  explicit LaggedSums(std::vector<double> z) : z_(std::move(z)) {
    level_.assign(z_.size() + 1, 0.0);
    for (std::size_t t = 0; t < z_.size(); ++t) level_[t + 1] = level_[t] + z_[t];
  }

  std::size_t size() const { return z_.size(); }

  // sum of z_t for t in [a, b)
  double level(std::size_t a, std::size_t b) const {
    return b > a ? level_[b] - level_[a] : 0.0;
  }

  // sum of z_t z_{t+j} for t in [a, b); requires b + j <= n
  double product(std::size_t j, std::size_t a, std::size_t b) {
    if (b <= a) return 0.0;
    while (lagged_.size() <= j) extend();
    return lagged_[j][b] - lagged_[j][a];
  }

 private:
  void extend() {
    const std::size_t j = lagged_.size();
    const std::size_t n = z_.size();
    std::vector<double> prefix(n - std::min(j, n) + 1, 0.0);
    for (std::size_t t = 0; t + j < n; ++t)
      prefix[t + 1] = prefix[t] + z_[t] * z_[t + j];
    lagged_.push_back(std::move(prefix));
  }

  std::vector<double> z_;
  std::vector<double> level_;
  std::vector<std::vector<double>> lagged_;
};

// Lag-j autocovariance of one-break residuals: mean a on [0, n1), b after.
double split_autocov(LaggedSums& sums, std::size_t n1, double a, double b,
                     std::size_t j) {
  const std::size_t n = sums.size();
  if (j >= n) return 0.0;
  double total = 0.0;
  if (n1 > j) {
    const std::size_t hi = n1 - j;
    total += sums.product(j, 0, hi) - a * (sums.level(0, hi) + sums.level(j, n1)) +
             double(hi) * a * a;
  }
  if (n > n1 + j) {
    const std::size_t hi = n - j;
    total += sums.product(j, n1, hi) -
             b * (sums.level(n1, hi) + sums.level(n1 + j, n)) +
             double(hi - n1) * b * b;
  }
  if (j > 0) {
    const std::size_t lo = n1 > j ? n1 - j : 0;
    const std::size_t hi = std::min(n1, n - j);
    if (hi > lo) {
      total += sums.product(j, lo, hi) - b * sums.level(lo, hi) -
               a * sums.level(lo + j, hi + j) + double(hi - lo) * a * b;
    }
  }
  return total / double(n);
}

}  // namespace

std::vector<std::size_t> BreakModel::segment_ids(std::size_t n) const {
  std::vector<std::size_t> ids(n, 0);
  std::size_t segment = 0;
  for (std::size_t t = 0; t < n; ++t) {
    ids[t] = segment;
    if (segment < break_indices.size() && t == break_indices[segment]) ++segment;
  }
  return ids;
}

std::size_t min_segment(std::size_t n, double trim) {
  if (n == 0 || !(trim > 0.0 && trim < 0.5))
    fail(ErrorCode::kInvalidArgument, "min_segment needs n >= 1 and 0 < trim < 0.5");
  const double raw = trim * double(n);
  const double nearest = std::round(raw);
  const double h = std::abs(raw - nearest) < 1e-9 ? nearest : std::ceil(raw);
  return std::max<std::size_t>(1, std::size_t(h));
}

HacEstimate newey_west(std::span<const double> series) {
  if (series.size() < 20)
    fail(ErrorCode::kSeriesTooShort, "newey_west needs at least 20 observations");
  const std::vector<double> z = centered(series);
  const std::size_t n = z.size();
  return bartlett_hac(n, [&](std::size_t j) {
    double s = 0.0;
    for (std::size_t t = 0; t + j < n; ++t) s += z[t] * z[t + j];
    return s / double(n);
  });
}

BreakModel bai_perron(std::span<const double> series, std::size_t max_breaks,
                      double trim) {
  const std::size_t n = series.size();
  if (n == 0) fail(ErrorCode::kSeriesTooShort, "empty series");
  const std::size_t h = min_segment(n, trim);
  if (n < (max_breaks + 1) * h)
    fail(ErrorCode::kSeriesTooShort,
         "series of length " + std::to_string(n) + " cannot hold " +
             std::to_string(max_breaks + 1) + " segments of length " +
             std::to_string(h));

  const std::vector<double> z = centered(series);
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    s1[t + 1] = s1[t] + z[t];
    s2[t + 1] = s2[t] + z[t] * z[t];
  }
  auto cost = [&](std::size_t a, std::size_t b) {
    const double s = s1[b] - s1[a];
    return std::max(0.0, (s2[b] - s2[a]) - s * s / double(b - a));
  };

  // best[s][j]: minimal SSR of [0, j) in s + 1 segments; from[s][j] the
  // start of the last segment.
  const std::size_t segments = max_breaks + 1;
  std::vector<std::vector<double>> best(segments, std::vector<double>(n + 1, kInf));
  std::vector<std::vector<std::size_t>> from(segments,
                                             std::vector<std::size_t>(n + 1, 0));
  for (std::size_t j = h; j <= n; ++j) best[0][j] = cost(0, j);
  for (std::size_t s = 1; s < segments; ++s) {
    for (std::size_t j = (s + 1) * h; j <= n; ++j) {
      double value = kInf;
      std::size_t arg = 0;
      for (std::size_t i = s * h; i + h <= j; ++i) {
        const double candidate = best[s - 1][i] + cost(i, j);
        if (candidate < value) {
          value = candidate;
          arg = i;
        }
      }
      best[s][j] = value;
      from[s][j] = arg;
    }
  }

  BreakModel model;
  model.min_segment = h;
  const double log_n = std::log(double(n));
  const double ssr_floor = std::max(best[0][n] * 1e-14, 1e-300);
  for (std::size_t m = 0; m < segments; ++m) {
    // Trimming can make an extra break cost SSR, so only rounding noise is clamped.
    double ssr = best[m][n];
    if (m > 0 && ssr > model.ssr_by_m.back() &&
        ssr - model.ssr_by_m.back() <= 1e-12 * std::max(1.0, ssr))
      ssr = model.ssr_by_m.back();
    model.ssr_by_m.push_back(ssr);
    model.bic_by_m.push_back(double(n) * std::log(std::max(ssr, ssr_floor) / double(n)) +
                             double(2 * m + 1) * log_n);
  }
  model.chosen_m = std::size_t(
      std::min_element(model.bic_by_m.begin(), model.bic_by_m.end()) -
      model.bic_by_m.begin());

  std::vector<std::size_t> starts;
  std::size_t end = n;
  for (std::size_t s = model.chosen_m; s > 0; --s) {
    end = from[s][end];
    starts.push_back(end);
  }
  std::reverse(starts.begin(), starts.end());
  std::size_t begin = 0;
  for (std::size_t start : starts) {
    model.break_indices.push_back(start - 1);
    double sum = 0.0;
    for (std::size_t t = begin; t < start; ++t) sum += series[t];
    model.segment_means.push_back(sum / double(start - begin));
    begin = start;
  }
  double sum = 0.0;
  for (std::size_t t = begin; t < n; ++t) sum += series[t];
  model.segment_means.push_back(sum / double(n - begin));
  return model;
}

SupFResult supf_statistic(std::span<const double> series, double trim) {
  const std::size_t n = series.size();
  if (n == 0) fail(ErrorCode::kSeriesTooShort, "empty series");
  const std::size_t h = min_segment(n, trim);
  if (n < 2 * h)
    fail(ErrorCode::kSeriesTooShort, "sup-F needs at least two minimal segments");

  double scale = 0.0;
  for (double v : series) scale += v * v;
  LaggedSums sums(centered(series));
  const double mean = sums.level(0, n) / double(n);
  const double ssr0 = [&] {
    double s = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double d = (sums.level(t, t + 1)) - mean;
      s += d * d;
    }
    return s;
  }();

  SupFResult result;
  result.split = h - 1;
  // Constant series: nothing to detect.
  if (ssr0 <= 1e-20 * scale) return result;

  for (std::size_t n1 = h; n1 + h <= n; ++n1) {
    const double a = sums.level(0, n1) / double(n1);
    const double b = sums.level(n1, n) / double(n - n1);
    const double gain =
        double(n1) * (a - mean) * (a - mean) + double(n - n1) * (b - mean) * (b - mean);
    const HacEstimate hac =
        bartlett_hac(n, [&](std::size_t j) { return split_autocov(sums, n1, a, b, j); });
    double f = 0.0;
    if (hac.long_run_variance > 0.0)
      f = gain / hac.long_run_variance;
    else if (gain > 0.0)
      f = kInf;
    if (f > result.statistic) {
      result.statistic = f;
      result.split = n1 - 1;
    }
  }
  return result;
}

SupFResult sup_f(std::span<const double> series, double trim, const SupFNull& null) {
  if (null.series_length() != series.size() || null.trim() != trim)
    fail(ErrorCode::kInvalidConfig,
         "sup-F null was simulated for a different length or trim");
  SupFResult result = supf_statistic(series, trim);
  result.p_value = null.p_value(result.statistic);
  return result;
}

SupFResult sup_f(std::span<const double> series, double trim, std::size_t null_draws,
                 unsigned long long seed) {
  SupFNullConfig config;
  config.trim = trim;
  config.draws = null_draws;
  config.seed = seed;
  return sup_f(series, trim, simulate_supf_null(series.size(), config));
}

}  // namespace leadtime
