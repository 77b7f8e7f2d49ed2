#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "breakpoints.hpp"
#include "composition.hpp"
#include "divergence.hpp"
#include "gpd.hpp"
#include "parametric.hpp"
#include "resampling.hpp"
#include "smoother.hpp"

namespace leadtime {

// Declaration order is execution order.
enum class Stage { kSimulate, kDivergence, kBreaks, kTails, kGpd, kFit, kSmooth, kScore };

inline constexpr std::array<Stage, 8> kStages = {
    Stage::kSimulate, Stage::kDivergence, Stage::kBreaks, Stage::kTails,
    Stage::kGpd,      Stage::kFit,        Stage::kSmooth, Stage::kScore};

std::string_view to_string(Stage stage) noexcept;
std::optional<Stage> parse_stage(std::string_view name) noexcept;

struct RunConfig {
  std::string input_path;
  std::string output_dir;
  std::string scenario_path;  // simulate stage only
  std::uint64_t seed = 42;
  std::vector<Stage> stages;
  std::vector<int> tail_thresholds{7, 30, 60, 90, 180};
  std::vector<int> gpd_thresholds{60, 90, 120, 150, 180, 210, 240, 270};
  std::size_t bootstrap_replicates = 1000;
  std::size_t max_breaks = 5;
  double trim = 0.05;
  std::size_t draws_per_day = 1000;
  bool jitter = true;
  std::size_t supf_null_draws = 1000;
};

// Throws InvalidConfig.
void validate_config(const RunConfig& config);

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitStageFailed = 3;

struct RunOutcome {
  int exit_code = kExitOk;
  std::string failed_stage;
  std::string message;
  std::vector<std::string> diagnostics;
  std::vector<std::string> completed_stages;
};

// Never throws; failures are reported through the outcome.
RunOutcome run_pipeline(const RunConfig& config);

struct GpdReport {
  Metric metric = Metric::kNights;
  StabilityProfile profile;
};

// In-memory results the plot bundles draw on; empty where a stage did not run.
struct StageOutputs {
  std::optional<PooledPmf> pooled_nights;
  std::optional<PooledPmf> pooled_gbv;
  std::optional<DivergenceSeries> divergence;
  std::optional<BreakModel> breaks;
  std::optional<TailRatioSeries> tails;
  std::optional<std::vector<GpdReport>> gpd;
  std::optional<std::vector<DayComparison>> comparisons;
};

inline constexpr double kHistogramLow = -0.05;
inline constexpr double kHistogramHigh = 0.25;
inline constexpr double kHistogramWidth = 0.005;

// Bin of v on the cross-entropy histogram: -1 below range, 60 at or above.
int histogram_bin(double v);

// Bundle name -> CSV text. Bundles: pooled_pmf, w1_breaks, tail_ratio,
// xi_stability, ce_difference_hist. Throws MissingStageOutput when a bundle's
// source is absent.
std::map<std::string, std::string> emit_plot_data(const StageOutputs& outputs,
                                                  const std::vector<std::string>& bundles);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

}  // namespace leadtime
