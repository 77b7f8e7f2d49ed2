#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "composition.hpp"

namespace leadtime {

enum class Family { kGamma = 0, kWeibull = 1, kLognormal = 2 };

inline constexpr std::array<Family, 3> kFamilies = {Family::kGamma, Family::kWeibull,
                                                    Family::kLognormal};

std::string_view to_string(Family family) noexcept;
std::optional<Family> parse_family(std::string_view name) noexcept;

// Gamma: (shape alpha, rate lambda). Weibull: (shape k, scale lambda).
// Lognormal: (mu, sigma).
struct FamilyParams {
  Family family = Family::kGamma;
  double a = 1.0;
  double b = 1.0;
};

struct FamilyFit {
  FamilyParams params;
  double cross_entropy = 0.0;
  PmfArray induced_pmf{};
  bool converged = false;
  int iterations = 0;
};

struct DayComparison {
  Date date;
  Metric metric = Metric::kNights;
  std::array<std::optional<FamilyFit>, 3> fits;  // indexed by Family
  std::array<std::string, 3> failures;           // non-empty where a fit threw
  std::optional<Family> winner;
  double ln_minus_gamma = 0.0;   // NaN when either fit failed
  double wei_minus_gamma = 0.0;  // NaN when either fit failed
};

struct WinTally {
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> shares{};
  std::size_t unresolved = 0;  // days where every family failed
  std::size_t total = 0;
};

inline constexpr double kProbabilityFloor = 1e-300;
// Cross-entropies closer than this count as tied; ties go to the first
// family in Gamma, Weibull, Lognormal order.
inline constexpr double kTieTolerance = 1e-9;

// Continuous cdf and survival function of a family.
double family_cdf(const FamilyParams& params, double x);
double family_sf(const FamilyParams& params, double x);

// Interval-censored bin probabilities on [l - 0.5, l + 0.5), bin 0 on
// [0, 0.5], truncated to [0, 365.5]. Throws DegenerateMass.
PmfArray induced_pmf(const FamilyParams& params);

// -sum x_l log max(p_l, kProbabilityFloor).
double cross_entropy(std::span<const double, kSupportSize> x,
                     std::span<const double, kSupportSize> p);

// Cross-entropy of x against a family as a function of unconstrained
// coordinates: (log a, log b), or (mu, log sigma) for the lognormal.
class CrossEntropyObjective {
 public:
  CrossEntropyObjective(std::span<const double, kSupportSize> x, Family family);

  // +inf where the parameters put no mass on the support.
  double operator()(std::span<const double, 2> theta, std::span<double, 2> gradient) const;
  double value(std::span<const double, 2> theta) const;

  static std::array<double, 2> to_theta(const FamilyParams& params);
  FamilyParams from_theta(std::span<const double, 2> theta) const;

 private:
  PmfArray x_;
  Family family_;
};

// Throws DegenerateInput when x sits on a single lead. A start that fails to
// converge within 500 iterations still competes; converged reports the
// winning start.
FamilyFit fit_family(std::span<const double, kSupportSize> x, Family family);
inline FamilyFit fit_family(const DailyPmf& x, Family family) {
  return fit_family(x.mass(), family);
}

// Moment-matched starting parameters used by fit_family.
FamilyParams moment_start(std::span<const double, kSupportSize> x, Family family);

DayComparison compare_day(const DailyPmf& x);

WinTally win_tally(std::span<const DayComparison> comparisons);

}  // namespace leadtime
