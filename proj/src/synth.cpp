#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace leadtime {
namespace {

void check_params(const FamilyParams& p, const std::string& where) {
  const bool ok = p.family == Family::kLognormal
                      ? std::isfinite(p.a) && p.b > 0.0 && std::isfinite(p.b)
                      : p.a > 0.0 && p.b > 0.0 && std::isfinite(p.a) && std::isfinite(p.b);
  if (!ok) fail(ErrorCode::kInvalidSpec, where + ": invalid " + std::string(to_string(p.family)) +
                                             " parameters");
}

// Stretch the scale-type parameter by factor (mean scales with it).
FamilyParams stretch(FamilyParams p, double factor) {
  switch (p.family) {
    case Family::kGamma: p.b /= factor; break;
    case Family::kWeibull: p.b *= factor; break;
    case Family::kLognormal: p.a += std::log(factor); break;
  }
  return p;
}

PmfArray multinomial(const PmfArray& p, std::size_t draws, Rng& rng) {
  PmfArray counts{};
  long long left = (long long)draws;
  double mass_left = 1.0;
  for (std::size_t l = 0; l < kSupportSize && left > 0; ++l) {
    if (l + 1 == kSupportSize || mass_left <= 0.0) {
      counts[l] = double(left);
      break;
    }
    const double q = std::clamp(p[l] / mass_left, 0.0, 1.0);
    const long long k = std::binomial_distribution<long long>(left, q)(rng.engine());
    counts[l] = double(k);
    left -= k;
    mass_left -= p[l];
  }
  for (double& c : counts) c /= double(draws);
  return counts;
}

DailyPmf make_day(const ScenarioSpec& spec, std::size_t day, bool gbv, Date date) {
  const FamilyParams params = effective_params(spec, day, gbv);
  PmfArray p;
  try {
    p = induced_pmf(params);
  } catch (const Error& e) {
    fail(ErrorCode::kInvalidSpec, "day " + std::to_string(day) + ": " + e.what());
  }
  if (spec.noise_draws > 0) {
    Rng rng(spec.seed, 2 * day + (gbv ? 1 : 0));
    p = multinomial(p, spec.noise_draws, rng);
  }
  if (spec.truncate_at < kMaxLead) {
    double total = 0.0;
    for (int l = 0; l < int(kSupportSize); ++l) {
      if (l > spec.truncate_at) p[std::size_t(l)] = 0.0;
      total += p[std::size_t(l)];
    }
    if (!(total > 0.0))
      fail(ErrorCode::kInvalidSpec,
           "day " + std::to_string(day) + " has no mass at or below truncate_at");
    for (double& v : p) v /= total;
  }
  return validate_pmf(p, date, gbv ? Metric::kGbv : Metric::kNights);
}

FamilyParams read_params(const nlohmann::json& j, Family family, const std::string& where) {
  if (!j.is_object() || !j.contains("a") || !j.contains("b"))
    fail(ErrorCode::kInvalidSpec, where + " needs numeric a and b");
  FamilyParams p;
  p.family = family;
  p.a = j.at("a").get<double>();
  p.b = j.at("b").get<double>();
  return p;
}

}  // namespace

void validate_spec(const ScenarioSpec& spec) {
  if (spec.n_days == 0) fail(ErrorCode::kInvalidSpec, "n_days must be positive");
  check_params(spec.base_params, "base_params");
  if (!(spec.seasonal_amplitude >= 0.0 && spec.seasonal_amplitude < 1.0))
    fail(ErrorCode::kInvalidSpec, "seasonal_amplitude must lie in [0, 1)");
  if (!(spec.gbv_shift >= 0.0) || !std::isfinite(spec.gbv_shift))
    fail(ErrorCode::kInvalidSpec, "gbv_shift must be >= 0");
  if (spec.truncate_at < 0 || spec.truncate_at > kMaxLead)
    fail(ErrorCode::kInvalidSpec, "truncate_at must lie in [0, 365]");
  for (std::size_t i = 0; i < spec.regimes.size(); ++i) {
    const Regime& r = spec.regimes[i];
    if (i > 0 && r.start <= spec.regimes[i - 1].start)
      fail(ErrorCode::kInvalidSpec, "regime starts must be strictly increasing");
    if (r.start >= spec.n_days)
      fail(ErrorCode::kInvalidSpec, "regime start beyond the last day");
    if (r.params.family != spec.base_params.family)
      fail(ErrorCode::kInvalidSpec, "regime family differs from the scenario family");
    check_params(r.params, "regime " + std::to_string(i));
  }
}

ScenarioSpec parse_scenario(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidSpec, std::string("scenario JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kInvalidSpec, "scenario must be a JSON object");
  ScenarioSpec spec;
  try {
    for (const char* key : {"n_days", "family", "base_params"})
      if (!j.contains(key)) fail(ErrorCode::kInvalidSpec, std::string("missing ") + key);
    const long long n = j.at("n_days").get<long long>();
    if (n <= 0) fail(ErrorCode::kInvalidSpec, "n_days must be positive");
    spec.n_days = std::size_t(n);
    const auto family = parse_family(j.at("family").get<std::string>());
    if (!family) fail(ErrorCode::kInvalidSpec, "unknown family");
    spec.base_params = read_params(j.at("base_params"), *family, "base_params");
    if (j.contains("start_date")) {
      const auto date = Date::parse(j.at("start_date").get<std::string>());
      if (!date) fail(ErrorCode::kInvalidSpec, "start_date must be YYYY-MM-DD");
      spec.start_date = *date;
    }
    spec.seasonal_amplitude = j.value("seasonal_amplitude", 0.0);
    const long long draws = j.value("noise_draws", 0LL);
    if (draws < 0) fail(ErrorCode::kInvalidSpec, "noise_draws must be >= 0");
    spec.noise_draws = std::size_t(draws);
    spec.truncate_at = j.value("truncate_at", kMaxLead);
    spec.gbv_shift = j.value("gbv_shift", 0.0);
    spec.seed = j.value("seed", std::uint64_t(42));
    if (j.contains("regimes")) {
      for (const auto& r : j.at("regimes")) {
        const long long start = r.at("start").get<long long>();
        if (start < 0) fail(ErrorCode::kInvalidSpec, "regime start must be >= 0");
        spec.regimes.push_back(
            {std::size_t(start), read_params(r.at("params"), *family, "regime params")});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidSpec, std::string("scenario JSON: ") + e.what());
  }
  validate_spec(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot read scenario " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario(buffer.str());
}

FamilyParams effective_params(const ScenarioSpec& spec, std::size_t day, bool gbv) {
  FamilyParams p = spec.base_params;
  for (const Regime& r : spec.regimes)
    if (r.start <= day) p = r.params;
  double factor = 1.0;
  if (spec.seasonal_amplitude > 0.0)
    factor = 1.0 + spec.seasonal_amplitude *
                       std::sin(2.0 * std::numbers::pi * double(day) / 365.0);
  if (gbv) factor *= 1.0 + spec.gbv_shift;
  return factor == 1.0 ? p : stretch(p, factor);
}

std::vector<PairedDay> generate_panel(const ScenarioSpec& spec) {
  validate_spec(spec);
  std::vector<std::optional<PairedDay>> days(spec.n_days);
  parallel_for(spec.n_days, [&](std::size_t d) {
    const Date date = spec.start_date.plus_days(int(d));
    days[d].emplace(make_day(spec, d, false, date), make_day(spec, d, true, date));
  });
  std::vector<PairedDay> out;
  out.reserve(days.size());
  for (auto& d : days) out.push_back(std::move(*d));
  return out;
}

std::vector<double> generate_break_series(std::size_t n,
                                          std::span<const std::size_t> break_points,
                                          std::span<const double> means, double sigma,
                                          std::uint64_t seed) {
  if (means.size() != break_points.size() + 1)
    fail(ErrorCode::kInvalidSpec, "need one more mean than break points");
  if (!(sigma >= 0.0)) fail(ErrorCode::kInvalidSpec, "sigma must be >= 0");
  for (std::size_t i = 0; i < break_points.size(); ++i)
    if (break_points[i] >= n || (i > 0 && break_points[i] <= break_points[i - 1]))
      fail(ErrorCode::kInvalidSpec, "break points must be increasing and inside the series");
  Rng rng(seed);
  std::vector<double> series(n);
  std::size_t segment = 0;
  for (std::size_t t = 0; t < n; ++t) {
    while (segment < break_points.size() && t >= break_points[segment]) ++segment;
    series[t] = means[segment] + (sigma > 0.0 ? sigma * rng.normal() : 0.0);
  }
  return series;
}

}  // namespace leadtime
