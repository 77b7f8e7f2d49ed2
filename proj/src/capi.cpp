#include "leadtime/leadtime.h"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <string_view>
#include <vector>

#include "breakpoints.hpp"
#include "csv_io.hpp"
#include "divergence.hpp"
#include "error.hpp"
#include "gpd.hpp"
#include "pipeline.hpp"
#include "resampling.hpp"
#include "synth.hpp"

struct ltl_config {
  leadtime::RunConfig config;
};

struct ltl_result {
  leadtime::RunOutcome outcome;
};

struct ltl_panel {
  std::vector<leadtime::PairedDay> days;
};

namespace {

thread_local std::string last_error;

ltl_status set_error(ltl_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs fn, mapping exceptions to status codes.
template <class Fn>
ltl_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return LTL_OK;
  } catch (const leadtime::Error& e) {
    return set_error(static_cast<ltl_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(LTL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(LTL_ERR_INTERNAL, e.what());
  }
}

void require(bool ok, const char* message) {
  if (!ok) leadtime::fail(leadtime::ErrorCode::kInvalidArgument, message);
}

template <class T>
T parse_value(std::string_view text, const std::string& key) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    leadtime::fail(leadtime::ErrorCode::kInvalidConfig,
                   "invalid value '" + std::string(text) + "' for " + key);
  return value;
}

std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

std::vector<int> parse_int_list(std::string_view text, const std::string& key) {
  std::vector<int> out;
  for (std::string_view item : split_list(text)) out.push_back(parse_value<int>(item, key));
  return out;
}

std::span<const double, leadtime::kSupportSize> support(const double* p) {
  return std::span<const double, leadtime::kSupportSize>(p, leadtime::kSupportSize);
}

}  // namespace

extern "C" {

const char* ltl_version(void) { return "0.1.0"; }

const char* ltl_last_error(void) { return last_error.c_str(); }

const char* ltl_status_name(ltl_status status) {
  if (status == LTL_OK) return "Ok";
  if (status == LTL_ERR_INTERNAL) return "Internal";
  static thread_local std::string name;
  name = std::string(leadtime::to_string(static_cast<leadtime::ErrorCode>(status)));
  return name.c_str();
}

ltl_status ltl_config_create(ltl_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new ltl_config();
  });
}

void ltl_config_destroy(ltl_config* config) { delete config; }

ltl_status ltl_config_set(ltl_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    leadtime::RunConfig& c = config->config;
    const std::string k = key;
    const std::string_view v = value;
    if (k == "input") {
      c.input_path = v;
    } else if (k == "output") {
      c.output_dir = v;
    } else if (k == "scenario") {
      c.scenario_path = v;
    } else if (k == "stages") {
      c.stages.clear();
      for (std::string_view name : split_list(v)) {
        const auto stage = leadtime::parse_stage(name);
        if (!stage)
          leadtime::fail(leadtime::ErrorCode::kInvalidConfig,
                         "unknown stage '" + std::string(name) + "'");
        c.stages.push_back(*stage);
      }
    } else if (k == "seed") {
      c.seed = parse_value<std::uint64_t>(v, k);
    } else if (k == "tail-thresholds") {
      c.tail_thresholds = parse_int_list(v, k);
    } else if (k == "gpd-thresholds") {
      c.gpd_thresholds = parse_int_list(v, k);
    } else if (k == "replicates") {
      c.bootstrap_replicates = parse_value<std::size_t>(v, k);
    } else if (k == "max-breaks") {
      c.max_breaks = parse_value<std::size_t>(v, k);
    } else if (k == "trim") {
      c.trim = parse_value<double>(v, k);
    } else if (k == "draws-per-day") {
      c.draws_per_day = parse_value<std::size_t>(v, k);
    } else if (k == "supf-null-draws") {
      c.supf_null_draws = parse_value<std::size_t>(v, k);
    } else if (k == "jitter") {
      if (v == "true" || v == "1") {
        c.jitter = true;
      } else if (v == "false" || v == "0") {
        c.jitter = false;
      } else {
        leadtime::fail(leadtime::ErrorCode::kInvalidConfig, "jitter must be true or false");
      }
    } else {
      leadtime::fail(leadtime::ErrorCode::kInvalidConfig, "unknown config key '" + k + "'");
    }
  });
}

ltl_status ltl_run(const ltl_config* config, ltl_result** out) {
  return guarded([&] {
    require(config && out, "null argument");
    *out = new ltl_result{leadtime::run_pipeline(config->config)};
  });
}

int ltl_result_exit_code(const ltl_result* result) {
  return result ? result->outcome.exit_code : -1;
}

const char* ltl_result_failed_stage(const ltl_result* result) {
  return result ? result->outcome.failed_stage.c_str() : "";
}

const char* ltl_result_message(const ltl_result* result) {
  return result ? result->outcome.message.c_str() : "";
}

size_t ltl_result_diagnostic_count(const ltl_result* result) {
  return result ? result->outcome.diagnostics.size() : 0;
}

const char* ltl_result_diagnostic(const ltl_result* result, size_t index) {
  if (!result || index >= result->outcome.diagnostics.size()) return nullptr;
  return result->outcome.diagnostics[index].c_str();
}

size_t ltl_result_stage_count(const ltl_result* result) {
  return result ? result->outcome.completed_stages.size() : 0;
}

const char* ltl_result_stage(const ltl_result* result, size_t index) {
  if (!result || index >= result->outcome.completed_stages.size()) return nullptr;
  return result->outcome.completed_stages[index].c_str();
}

void ltl_result_destroy(ltl_result* result) { delete result; }

ltl_status ltl_simulate(const char* scenario_path, const char* output_csv, uint64_t seed,
                        int has_seed) {
  return guarded([&] {
    require(scenario_path && output_csv, "null argument");
    leadtime::ScenarioSpec spec = leadtime::load_scenario(scenario_path);
    if (has_seed) spec.seed = seed;
    const auto days = leadtime::generate_panel(spec);
    leadtime::write_file_atomic(output_csv, leadtime::panel_to_csv(days));
  });
}

ltl_status ltl_panel_read(const char* path, ltl_panel** out) {
  return guarded([&] {
    require(path && out, "null argument");
    leadtime::PanelRead read = leadtime::read_panel_csv(path);
    if (!read.ok()) {
      std::string message = "input validation failed";
      for (const auto& d : read.diagnostics)
        message += "\n" + (d.line ? "line " + std::to_string(d.line) + ": " : std::string()) +
                   d.message;
      leadtime::fail(leadtime::ErrorCode::kParse, message);
    }
    *out = new ltl_panel{std::move(read.days)};
  });
}

size_t ltl_panel_day_count(const ltl_panel* panel) { return panel ? panel->days.size() : 0; }

ltl_status ltl_panel_date(const ltl_panel* panel, size_t day, char out[11]) {
  return guarded([&] {
    require(panel && out && day < panel->days.size(), "invalid panel, day or buffer");
    const std::string iso = panel->days[day].date.iso();
    std::memcpy(out, iso.c_str(), std::min<std::size_t>(iso.size() + 1, 11));
  });
}

ltl_status ltl_panel_pmf(const ltl_panel* panel, size_t day, ltl_metric metric,
                         double out[LTL_SUPPORT_SIZE]) {
  return guarded([&] {
    require(panel && out && day < panel->days.size(), "invalid panel, day or buffer");
    const auto& d = panel->days[day];
    const auto& mass = metric == LTL_METRIC_GBV ? d.gbv.mass() : d.nights.mass();
    std::memcpy(out, mass.data(), sizeof(double) * leadtime::kSupportSize);
  });
}

void ltl_panel_destroy(ltl_panel* panel) { delete panel; }

ltl_status ltl_wasserstein1(const double* p, const double* q, double* out) {
  return guarded([&] {
    require(p && q && out, "null argument");
    *out = leadtime::wasserstein1(support(p), support(q));
  });
}

ltl_status ltl_kld(const double* x, const double* xhat, double* out) {
  return guarded([&] {
    require(x && xhat && out, "null argument");
    *out = leadtime::kld(support(x), support(xhat));
  });
}

ltl_status ltl_tail_mass(const double* pmf, int u, double* out) {
  return guarded([&] {
    require(pmf && out, "null argument");
    *out = leadtime::tail_mass(support(pmf), u);
  });
}

ltl_status ltl_block_bootstrap_mean(const double* series, size_t n, size_t replicates,
                                    uint64_t seed, double out[3]) {
  return guarded([&] {
    require(series && out, "null argument");
    const auto r =
        leadtime::block_bootstrap_mean(std::span<const double>(series, n), replicates, seed);
    out[0] = r.point;
    out[1] = r.ci_low;
    out[2] = r.ci_high;
  });
}

ltl_status ltl_newey_west(const double* series, size_t n, double* long_run_variance,
                          double* bandwidth) {
  return guarded([&] {
    require(series && long_run_variance, "null argument");
    const auto h = leadtime::newey_west(std::span<const double>(series, n));
    *long_run_variance = h.long_run_variance;
    if (bandwidth) *bandwidth = h.bandwidth;
  });
}

ltl_status ltl_fit_gpd(const double* exceedances, size_t n, double u, double out[2],
                       int* estimator) {
  return guarded([&] {
    require(exceedances && out, "null argument");
    const auto fit = leadtime::fit_gpd(std::span<const double>(exceedances, n), u);
    out[0] = fit.xi;
    out[1] = fit.beta;
    if (estimator) *estimator = static_cast<int>(fit.estimator);
  });
}

}  // extern "C"
