#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "composition.hpp"
#include "parametric.hpp"

namespace leadtime {

struct Regime {
  std::size_t start = 0;  // first day index using params
  FamilyParams params;
};

struct ScenarioSpec {
  std::size_t n_days = 0;
  Date start_date{2019, 1, 1};
  FamilyParams base_params;       // family taken from here
  double seasonal_amplitude = 0.0;  // relative, period 365 days
  std::vector<Regime> regimes;
  std::size_t noise_draws = 0;  // 0 = noiseless
  int truncate_at = kMaxLead;
  double gbv_shift = 0.0;  // relative mean inflation of the GBV pmf
  std::uint64_t seed = 42;
};

// Throws InvalidSpec.
void validate_spec(const ScenarioSpec& spec);

// Scenario JSON:
//   {"n_days": 1000, "start_date": "2019-01-01", "family": "weibull",
//    "base_params": {"a": 0.85, "b": 54.2}, "seasonal_amplitude": 0.1,
//    "regimes": [{"start": 500, "params": {"a": 0.85, "b": 80}}],
//    "noise_draws": 5000, "truncate_at": 365, "gbv_shift": 0.14, "seed": 7}
// Only n_days, family and base_params are required. Throws InvalidSpec.
ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::string& path);

// Parameters in force on day d: base or regime override, with the
// scale-type parameter stretched by 1 + A sin(2 pi d / 365) and, for GBV,
// by 1 + gbv_shift.
FamilyParams effective_params(const ScenarioSpec& spec, std::size_t day, bool gbv);

// Nights from stream 2d, GBV from stream 2d + 1 of spec.seed.
std::vector<PairedDay> generate_panel(const ScenarioSpec& spec);

// break_points are first indices of each new mean. Throws InvalidSpec.
std::vector<double> generate_break_series(std::size_t n,
                                          std::span<const std::size_t> break_points,
                                          std::span<const double> means, double sigma,
                                          std::uint64_t seed);

}  // namespace leadtime
