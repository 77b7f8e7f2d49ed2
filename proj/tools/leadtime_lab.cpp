// leadtime-lab command line. Talks to the library only through the C API.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "leadtime/leadtime.h"

namespace {

constexpr int kExitUsage = 2;
constexpr std::size_t kMaxDiagnostics = 50;

std::string join(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string exact(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

bool set(ltl_config* config, const char* key, const std::string& value) {
  if (ltl_config_set(config, key, value.c_str()) == LTL_OK) return true;
  std::fprintf(stderr, "leadtime-lab: %s\n", ltl_last_error());
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lead-time composition analysis"};
  app.set_version_flag("--version", std::string(ltl_version()));
  app.require_subcommand(1);

  std::string input, output, stages, scenario;
  std::uint64_t seed = 42;
  std::vector<int> tail_thresholds{7, 30, 60, 90, 180};
  std::vector<int> gpd_thresholds{60, 90, 120, 150, 180, 210, 240, 270};
  std::size_t replicates = 1000, max_breaks = 5, draws_per_day = 1000;
  std::size_t supf_null_draws = 1000;
  double trim = 0.05;
  bool no_jitter = false;

  CLI::App* run = app.add_subcommand("run", "Run analysis stages on a panel");
  run->add_option("--input", input, "Input panel CSV");
  run->add_option("--output", output, "Output directory")->required();
  run->add_option("--stages", stages,
                  "Comma-separated subset of simulate,divergence,breaks,tails,gpd,fit,smooth,score")
      ->required();
  run->add_option("--seed", seed, "Random seed")->capture_default_str();
  run->add_option("--scenario", scenario, "Scenario JSON for the simulate stage");
  run->add_option("--tail-thresholds", tail_thresholds)->delimiter(',')->capture_default_str();
  run->add_option("--gpd-thresholds", gpd_thresholds)->delimiter(',')->capture_default_str();
  run->add_option("--replicates", replicates, "Bootstrap replicates")->capture_default_str();
  run->add_option("--max-breaks", max_breaks)->capture_default_str();
  run->add_option("--trim", trim, "Minimum regime fraction")->capture_default_str();
  run->add_option("--draws-per-day", draws_per_day)->capture_default_str();
  run->add_option("--supf-null-draws", supf_null_draws)->capture_default_str();
  run->add_flag("--no-jitter", no_jitter, "Integer leads in GPD sampling");

  std::string sim_output;
  std::uint64_t sim_seed = 0;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic panel");
  simulate->add_option("--scenario", scenario, "Scenario JSON")->required();
  simulate->add_option("--output", sim_output, "Output CSV")->required();
  CLI::Option* seed_option = simulate->add_option("--seed", sim_seed, "Overrides the scenario seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (simulate->parsed()) {
    if (ltl_simulate(scenario.c_str(), sim_output.c_str(), sim_seed,
                     seed_option->count() > 0) != LTL_OK) {
      std::fprintf(stderr, "leadtime-lab: %s\n", ltl_last_error());
      return kExitUsage;
    }
    return 0;
  }

  ltl_config* config = nullptr;
  if (ltl_config_create(&config) != LTL_OK) {
    std::fprintf(stderr, "leadtime-lab: %s\n", ltl_last_error());
    return 1;
  }
  const bool ok = set(config, "output", output) && set(config, "stages", stages) &&
                  (input.empty() || set(config, "input", input)) &&
                  (scenario.empty() || set(config, "scenario", scenario)) &&
                  set(config, "seed", std::to_string(seed)) &&
                  set(config, "tail-thresholds", join(tail_thresholds)) &&
                  set(config, "gpd-thresholds", join(gpd_thresholds)) &&
                  set(config, "replicates", std::to_string(replicates)) &&
                  set(config, "max-breaks", std::to_string(max_breaks)) &&
                  set(config, "trim", exact(trim)) &&
                  set(config, "draws-per-day", std::to_string(draws_per_day)) &&
                  set(config, "supf-null-draws", std::to_string(supf_null_draws)) &&
                  set(config, "jitter", no_jitter ? "false" : "true");
  if (!ok) {
    ltl_config_destroy(config);
    return kExitUsage;
  }

  ltl_result* result = nullptr;
  if (ltl_run(config, &result) != LTL_OK) {
    std::fprintf(stderr, "leadtime-lab: %s\n", ltl_last_error());
    ltl_config_destroy(config);
    return 1;
  }
  const int code = ltl_result_exit_code(result);
  for (std::size_t i = 0; i < ltl_result_stage_count(result); ++i)
    std::fprintf(stderr, "stage %s: done\n", ltl_result_stage(result, i));
  if (code != 0) {
    const std::string stage = ltl_result_failed_stage(result);
    if (!stage.empty())
      std::fprintf(stderr, "leadtime-lab: stage %s failed: %s\n", stage.c_str(),
                   ltl_result_message(result));
    else
      std::fprintf(stderr, "leadtime-lab: %s\n", ltl_result_message(result));
    const std::size_t n = ltl_result_diagnostic_count(result);
    for (std::size_t i = 0; i < n && i < kMaxDiagnostics; ++i)
      std::fprintf(stderr, "  %s\n", ltl_result_diagnostic(result, i));
    if (n > kMaxDiagnostics)
      std::fprintf(stderr, "  ... %zu more\n", n - kMaxDiagnostics);
  }
  ltl_result_destroy(result);
  ltl_config_destroy(config);
  return code;
}
