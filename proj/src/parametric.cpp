#include "parametric.hpp"

#include <algorithm>
#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cctype>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "optimize.hpp"

namespace leadtime {
namespace {

using namespace boost::math::policies;
using QuietPolicy =
    policy<domain_error<errno_on_error>, pole_error<errno_on_error>,
           overflow_error<errno_on_error>, evaluation_error<errno_on_error>>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kShapeStep = 1e-5;  // log-shape step for the Gamma shape derivative

// cdf and survival at one bin edge, plus d cdf / d theta.
struct EdgeValue {
  double cdf = 0.0;
  double sf = 1.0;
  double d0 = 0.0;
  double d1 = 0.0;
};

// Evaluates whichever of P and Q is below one half and derives the other,
// so both tails keep relative precision.
double gamma_lower(double shape, double z, bool use_lower) {
  return use_lower ? boost::math::gamma_p(shape, z, QuietPolicy())
                   : boost::math::gamma_q(shape, z, QuietPolicy());
}

EdgeValue gamma_edge(double shape, double rate, double x, bool with_gradient) {
  EdgeValue e;
  const double z = rate * x;
  const bool use_lower = z < shape;
  const double small = gamma_lower(shape, z, use_lower);
  e.cdf = use_lower ? small : 1.0 - small;
  e.sf = use_lower ? 1.0 - small : small;
  if (with_gradient) {
    const double up = gamma_lower(shape * std::exp(kShapeStep), z, use_lower);
    const double down = gamma_lower(shape * std::exp(-kShapeStep), z, use_lower);
    const double d_small = (up - down) / (2.0 * kShapeStep);
    e.d0 = use_lower ? d_small : -d_small;
    e.d1 = z * boost::math::gamma_p_derivative(shape, z, QuietPolicy());
  }
  return e;
}

EdgeValue weibull_edge(double shape, double scale, double x, bool with_gradient) {
  EdgeValue e;
  const double ratio = x / scale;
  const double z = std::pow(ratio, shape);
  e.sf = std::exp(-z);
  e.cdf = -std::expm1(-z);
  if (with_gradient) {
    e.d0 = e.sf * z * shape * std::log(ratio);
    e.d1 = -shape * e.sf * z;
  }
  return e;
}

EdgeValue lognormal_edge(double mu, double sigma, double x, bool with_gradient) {
  EdgeValue e;
  const double w = (std::log(x) - mu) / sigma;
  e.cdf = 0.5 * std::erfc(-w * kInvSqrt2);
  e.sf = 0.5 * std::erfc(w * kInvSqrt2);
  if (with_gradient) {
    const double density = kInvSqrt2Pi * std::exp(-0.5 * w * w);
    e.d0 = -density / sigma;
    e.d1 = -density * w;
  }
  return e;
}

EdgeValue edge_value(const FamilyParams& p, double x, bool with_gradient) {
  switch (p.family) {
    case Family::kGamma: return gamma_edge(p.a, p.b, x, with_gradient);
    case Family::kWeibull: return weibull_edge(p.a, p.b, x, with_gradient);
    case Family::kLognormal: return lognormal_edge(p.a, p.b, x, with_gradient);
  }
  return {};
}

void check_params(const FamilyParams& p) {
  const bool a_ok = p.family == Family::kLognormal ? std::isfinite(p.a)
                                                   : (p.a > 0.0 && std::isfinite(p.a));
  if (!a_ok || !(p.b > 0.0 && std::isfinite(p.b)))
    fail(ErrorCode::kInvalidArgument, "invalid parameters for " +
                                          std::string(to_string(p.family)));
}

struct Bins {
  PmfArray mass{};       // unnormalized bin probabilities
  PmfArray d0{}, d1{};   // their derivatives
  double total = 0.0;    // F(365.5)
  double d0_total = 0.0;
  double d1_total = 0.0;
};

Bins compute_bins(const FamilyParams& p, bool with_gradient) {
  Bins bins;
  EdgeValue previous;  // F(-0.5) = 0
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    const EdgeValue edge = edge_value(p, double(lead) + 0.5, with_gradient);
    const double mass = previous.cdf < 0.5 ? edge.cdf - previous.cdf
                                           : previous.sf - edge.sf;
    bins.mass[lead] = std::max(mass, 0.0);
    bins.d0[lead] = edge.d0 - previous.d0;
    bins.d1[lead] = edge.d1 - previous.d1;
    previous = edge;
  }
  bins.total = previous.cdf;
  bins.d0_total = previous.d0;
  bins.d1_total = previous.d1;
  return bins;
}

double weibull_cv2(double shape) {
  const double r = std::exp(std::lgamma(1.0 + 2.0 / shape) -
                            2.0 * std::lgamma(1.0 + 1.0 / shape));
  return r - 1.0;
}

// Parameters of `family` with the given shape and untruncated mean.
FamilyParams with_shape_and_mean(Family family, double shape, double mean) {
  switch (family) {
    case Family::kGamma: return {family, shape, shape / mean};
    case Family::kWeibull:
      return {family, shape, mean / std::exp(std::lgamma(1.0 + 1.0 / shape))};
    case Family::kLognormal:
      return {family, std::log(mean) - 0.5 * shape * shape, shape};
  }
  return {};
}

double shape_of(const FamilyParams& p) {
  return p.family == Family::kLognormal ? p.b : p.a;
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::kGamma: return "Gamma";
    case Family::kWeibull: return "Weibull";
    case Family::kLognormal: return "Lognormal";
  }
  return "Unknown";
}

std::optional<Family> parse_family(std::string_view name) noexcept {
  for (Family f : kFamilies) {
    const std::string_view canonical = to_string(f);
    if (name.size() != canonical.size()) continue;
    bool same = true;
    for (std::size_t i = 0; i < name.size(); ++i)
      same = same && std::tolower(static_cast<unsigned char>(name[i])) ==
                         std::tolower(static_cast<unsigned char>(canonical[i]));
    if (same) return f;
  }
  return std::nullopt;
}

double family_cdf(const FamilyParams& params, double x) {
  check_params(params);
  if (x <= 0.0) return 0.0;
  return edge_value(params, x, false).cdf;
}

double family_sf(const FamilyParams& params, double x) {
  check_params(params);
  if (x <= 0.0) return 1.0;
  return edge_value(params, x, false).sf;
}

PmfArray induced_pmf(const FamilyParams& params) {
  check_params(params);
  const Bins bins = compute_bins(params, false);
  if (!(bins.total > kProbabilityFloor))
    fail(ErrorCode::kDegenerateMass, "distribution puts no mass on [0, 365.5]");
  PmfArray out{};
  for (std::size_t lead = 0; lead < kSupportSize; ++lead)
    out[lead] = bins.mass[lead] / bins.total;
  return out;
}

double cross_entropy(std::span<const double, kSupportSize> x,
                     std::span<const double, kSupportSize> p) {
  double h = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    if (x[lead] == 0.0) continue;
    h -= x[lead] * std::log(std::max(p[lead], kProbabilityFloor));
  }
  return h;
}

CrossEntropyObjective::CrossEntropyObjective(std::span<const double, kSupportSize> x,
                                             Family family)
    : family_(family) {
  std::copy(x.begin(), x.end(), x_.begin());
}

std::array<double, 2> CrossEntropyObjective::to_theta(const FamilyParams& params) {
  if (params.family == Family::kLognormal) return {params.a, std::log(params.b)};
  return {std::log(params.a), std::log(params.b)};
}

FamilyParams CrossEntropyObjective::from_theta(std::span<const double, 2> theta) const {
  if (family_ == Family::kLognormal) return {family_, theta[0], std::exp(theta[1])};
  return {family_, std::exp(theta[0]), std::exp(theta[1])};
}

double CrossEntropyObjective::operator()(std::span<const double, 2> theta,
                                         std::span<double, 2> gradient) const {
  gradient[0] = gradient[1] = 0.0;
  if (!std::isfinite(theta[0]) || !std::isfinite(theta[1]) ||
      std::abs(theta[0]) > 60.0 || std::abs(theta[1]) > 60.0)
    return kInf;
  const FamilyParams params = from_theta(theta);
  const Bins bins = compute_bins(params, true);
  if (!(bins.total > kProbabilityFloor) || !std::isfinite(bins.total)) return kInf;

  // Edge derivatives are already taken in the unconstrained coordinates.
  double h = 0.0;
  double g0 = 0.0;
  double g1 = 0.0;
  const double dlog_total0 = bins.d0_total / bins.total;
  const double dlog_total1 = bins.d1_total / bins.total;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    const double w = x_[lead];
    if (w == 0.0) continue;
    const double p = bins.mass[lead] / bins.total;
    if (p > kProbabilityFloor) {
      h -= w * std::log(p);
      g0 -= w * (bins.d0[lead] / bins.mass[lead] - dlog_total0);
      g1 -= w * (bins.d1[lead] / bins.mass[lead] - dlog_total1);
    } else {
      h -= w * std::log(kProbabilityFloor);
    }
  }
  gradient[0] = g0;
  gradient[1] = g1;
  if (!std::isfinite(h) || !std::isfinite(g0) || !std::isfinite(g1)) return kInf;
  return h;
}

double CrossEntropyObjective::value(std::span<const double, 2> theta) const {
  if (!std::isfinite(theta[0]) || !std::isfinite(theta[1]) ||
      std::abs(theta[0]) > 60.0 || std::abs(theta[1]) > 60.0)
    return kInf;
  const Bins bins = compute_bins(from_theta(theta), false);
  if (!(bins.total > kProbabilityFloor) || !std::isfinite(bins.total)) return kInf;
  PmfArray p{};
  for (std::size_t lead = 0; lead < kSupportSize; ++lead)
    p[lead] = bins.mass[lead] / bins.total;
  return cross_entropy(x_, p);
}

FamilyParams moment_start(std::span<const double, kSupportSize> x, Family family) {
  double mean = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) mean += double(lead) * x[lead];
  double var = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) {
    const double d = double(lead) - mean;
    var += d * d * x[lead];
  }
  // Guard pmfs concentrated near zero; the interval-censored model still
  // puts bin 0 at (0, 0.5].
  mean = std::max(mean, 0.25);
  var = std::max(var, 1e-6);
  switch (family) {
    case Family::kGamma: return {family, mean * mean / var, mean / var};
    case Family::kWeibull: {
      const double target = var / (mean * mean);
      double lo = 0.1, hi = 10.0;
      if (target >= weibull_cv2(lo)) {
        hi = lo;
      } else if (target <= weibull_cv2(hi)) {
        lo = hi;
      } else {
        for (int k = 0; k < 100; ++k) {
          const double mid = 0.5 * (lo + hi);
          if (weibull_cv2(mid) > target) lo = mid; else hi = mid;
        }
      }
      return with_shape_and_mean(family, 0.5 * (lo + hi), mean);
    }
    case Family::kLognormal: {
      const double sigma2 = std::log1p(var / (mean * mean));
      return {family, std::log(mean) - 0.5 * sigma2, std::sqrt(sigma2)};
    }
  }
  return {};
}

FamilyFit fit_family(std::span<const double, kSupportSize> x, Family family) {
  const double peak = *std::max_element(x.begin(), x.end());
  if (peak > 1.0 - 1e-9)
    fail(ErrorCode::kDegenerateInput,
         "pmf concentrated on a single lead; scale parameter diverges");

  const CrossEntropyObjective objective(x, family);
  const GradientObjective wrapped = [&](const Eigen::VectorXd& theta,
                                        Eigen::VectorXd& gradient) {
    std::array<double, 2> t{theta[0], theta[1]};
    std::array<double, 2> g{};
    const double value = objective(t, g);
    gradient[0] = g[0];
    gradient[1] = g[1];
    return value;
  };

  const FamilyParams base = moment_start(x, family);
  double mean = 0.0;
  for (std::size_t lead = 0; lead < kSupportSize; ++lead) mean += double(lead) * x[lead];
  mean = std::max(mean, 0.25);
  const std::array<FamilyParams, 3> starts = {
      base, with_shape_and_mean(family, 0.5 * shape_of(base), mean),
      with_shape_and_mean(family, 2.0 * shape_of(base), mean)};

  std::optional<BfgsResult> best;
  for (const FamilyParams& start : starts) {
    const auto theta = CrossEntropyObjective::to_theta(start);
    BfgsResult run = minimize_bfgs(wrapped, Eigen::Vector2d(theta[0], theta[1]));
    if (!std::isfinite(run.value)) continue;
    if (!best || run.value < best->value) best = std::move(run);
  }
  if (!best)
    fail(ErrorCode::kDegenerateInput,
         "no starting point gives a finite cross-entropy for " +
             std::string(to_string(family)));

  FamilyFit fit;
  const std::array<double, 2> theta{best->x[0], best->x[1]};
  fit.params = objective.from_theta(theta);
  fit.induced_pmf = induced_pmf(fit.params);
  fit.cross_entropy = cross_entropy(x, fit.induced_pmf);
  fit.converged = best->converged;
  fit.iterations = best->iterations;
  return fit;
}

DayComparison compare_day(const DailyPmf& x) {
  DayComparison out;
  out.date = x.date();
  out.metric = x.metric();
  for (Family f : kFamilies) {
    try {
      out.fits[std::size_t(f)] = fit_family(x, f);
    } catch (const Error& e) {
      out.failures[std::size_t(f)] = e.what();
    }
  }
  for (Family f : kFamilies) {
    const auto& fit = out.fits[std::size_t(f)];
    if (!fit) continue;
    if (!out.winner ||
        fit->cross_entropy < out.fits[std::size_t(*out.winner)]->cross_entropy - kTieTolerance)
      out.winner = f;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto& gamma = out.fits[std::size_t(Family::kGamma)];
  const auto& weibull = out.fits[std::size_t(Family::kWeibull)];
  const auto& lognormal = out.fits[std::size_t(Family::kLognormal)];
  out.ln_minus_gamma =
      gamma && lognormal ? lognormal->cross_entropy - gamma->cross_entropy : nan;
  out.wei_minus_gamma =
      gamma && weibull ? weibull->cross_entropy - gamma->cross_entropy : nan;
  return out;
}

WinTally win_tally(std::span<const DayComparison> comparisons) {
  if (comparisons.empty()) fail(ErrorCode::kEmptyInput, "no comparisons to tally");
  WinTally tally;
  tally.total = comparisons.size();
  for (const DayComparison& c : comparisons) {
    if (c.winner)
      ++tally.counts[std::size_t(*c.winner)];
    else
      ++tally.unresolved;
  }
  for (std::size_t i = 0; i < 3; ++i)
    tally.shares[i] = double(tally.counts[i]) / double(tally.total);
  return tally;
}

}  // namespace leadtime
