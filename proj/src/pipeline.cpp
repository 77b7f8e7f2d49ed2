#include "pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <tuple>

#include "csv_io.hpp"
#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "synth.hpp"

namespace leadtime {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kHistogramBins = 60;

ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

// Results shared between stages, computed on first use so that a stage's
// output never depends on which other stages were requested.
class Context {
 public:
  Context(const RunConfig& config, std::vector<PairedDay> days)
      : config_(config), days_(std::move(days)) {}

  const RunConfig& config() const { return config_; }
  const std::vector<PairedDay>& days() const { return days_; }
  StageOutputs& outputs() { return outputs_; }

  const DivergenceSeries& divergence() {
    if (!divergence_) divergence_ = divergence_series(days_);
    return *divergence_;
  }

  const BreakModel& breaks() {
    if (!breaks_) {
      const std::vector<double>& w1 = divergence().w1;
      BreakModel model = bai_perron(w1, config_.max_breaks, config_.trim);
      if (w1.size() >= 40) {
        SupFNullConfig null_config;
        null_config.trim = config_.trim;
        null_config.draws = config_.supf_null_draws;
        null_config.seed = substream_seed(config_.seed, 2);
        const SupFResult supf =
            sup_f(w1, config_.trim, simulate_supf_null(w1.size(), null_config));
        model.supf = supf.statistic;
        model.supf_p = supf.p_value;
        supf_split_ = supf.split;
      }
      breaks_ = std::move(model);
    }
    return *breaks_;
  }

  std::optional<std::size_t> supf_split() const { return supf_split_; }

  // Index 2d for nights, 2d + 1 for GBV.
  const std::vector<DayComparison>& comparisons() {
    if (!comparisons_) {
      std::vector<std::optional<DayComparison>> slots(2 * days_.size());
      parallel_for(slots.size(), [&](std::size_t i) {
        const PairedDay& day = days_[i / 2];
        slots[i] = compare_day(i % 2 == 0 ? day.nights : day.gbv);
      });
      std::vector<DayComparison> out;
      out.reserve(slots.size());
      for (auto& s : slots) out.push_back(std::move(*s));
      comparisons_ = std::move(out);
    }
    return *comparisons_;
  }

  const std::vector<SmoothFit>& smooth() {
    if (!smooth_) {
      std::vector<SmoothFit> out(2 * days_.size());
      parallel_for(out.size(), [&](std::size_t i) {
        const PairedDay& day = days_[i / 2];
        out[i] = smooth_pmf(i % 2 == 0 ? day.nights : day.gbv);
      });
      smooth_ = std::move(out);
    }
    return *smooth_;
  }

  const DailyPmf& pmf(std::size_t i) const {
    return i % 2 == 0 ? days_[i / 2].nights : days_[i / 2].gbv;
  }

 private:
  const RunConfig& config_;
  std::vector<PairedDay> days_;
  StageOutputs outputs_;
  std::optional<DivergenceSeries> divergence_;
  std::optional<BreakModel> breaks_;
  std::optional<std::size_t> supf_split_;
  std::optional<std::vector<DayComparison>> comparisons_;
  std::optional<std::vector<SmoothFit>> smooth_;
};

using Files = std::vector<std::pair<std::string, std::string>>;

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

Files run_divergence(Context& ctx) {
  const DivergenceSeries& series = ctx.divergence();
  ctx.outputs().divergence = series;
  std::string csv = "date,w1\n";
  for (std::size_t i = 0; i < series.dates.size(); ++i)
    csv += series.dates[i].iso() + "," + format_double(series.w1[i]) + "\n";

  ordered_json summary;
  summary["n_days"] = series.w1.size();
  summary["mean_w1"] = number(std::accumulate(series.w1.begin(), series.w1.end(), 0.0) /
                              double(series.w1.size()));
  if (series.w1.size() >= 2) {
    const BootstrapResult boot = block_bootstrap_mean(
        series.w1, ctx.config().bootstrap_replicates, substream_seed(ctx.config().seed, 1));
    summary["ci_low"] = number(boot.ci_low);
    summary["ci_high"] = number(boot.ci_high);
    summary["replicates"] = boot.replicates;
    summary["block_len"] = boot.block_len;
  } else {
    summary["ci_low"] = nullptr;
    summary["ci_high"] = nullptr;
  }
  return {{"divergence.csv", csv}, {"divergence_summary.json", dump(summary)}};
}

Files run_breaks(Context& ctx) {
  const DivergenceSeries& series = ctx.divergence();
  const BreakModel& model = ctx.breaks();
  ctx.outputs().divergence = series;
  ctx.outputs().breaks = model;
  const std::size_t n = series.w1.size();

  ordered_json report;
  report["n"] = n;
  report["max_breaks"] = ctx.config().max_breaks;
  report["trim"] = ctx.config().trim;
  report["min_segment"] = model.min_segment;
  report["chosen_m"] = model.chosen_m;
  ordered_json breaks = ordered_json::array();
  for (std::size_t b = 0; b < model.break_indices.size(); ++b) {
    const std::size_t start = model.break_indices[b] + 1;
    breaks.push_back({{"date", series.dates[start].iso()},
                      {"index", start},
                      {"segment_mean", number(model.segment_means[b + 1])}});
  }
  report["breaks"] = breaks;
  ordered_json segments = ordered_json::array();
  std::size_t begin = 0;
  for (std::size_t s = 0; s < model.segment_means.size(); ++s) {
    const std::size_t end = s < model.break_indices.size() ? model.break_indices[s] : n - 1;
    segments.push_back({{"start_date", series.dates[begin].iso()},
                        {"end_date", series.dates[end].iso()},
                        {"days", end - begin + 1},
                        {"mean", number(model.segment_means[s])}});
    begin = end + 1;
  }
  report["segments"] = segments;
  report["supf"] = number(model.supf);
  report["supf_p"] = number(model.supf_p);
  if (auto split = ctx.supf_split())
    report["supf_split_date"] = series.dates[*split + 1].iso();
  else
    report["supf_split_date"] = nullptr;
  report["supf_null_draws"] = ctx.config().supf_null_draws;
  ordered_json bic = ordered_json::array(), ssr = ordered_json::array();
  for (double v : model.bic_by_m) bic.push_back(number(v));
  for (double v : model.ssr_by_m) ssr.push_back(number(v));
  report["bic"] = bic;
  report["ssr"] = ssr;

  const std::vector<std::size_t> ids = model.segment_ids(n);
  std::string csv = "date,segment_id\n";
  for (std::size_t t = 0; t < n; ++t)
    csv += series.dates[t].iso() + "," + std::to_string(ids[t]) + "\n";

  Files files = {{"breaks.json", dump(report)}, {"segments.csv", csv}};
  for (auto& [name, text] : emit_plot_data(ctx.outputs(), {"w1_breaks"}))
    files.emplace_back("plots/" + name + ".csv", text);
  return files;
}

Files run_tails(Context& ctx) {
  const auto& days = ctx.days();
  const TailRatioSeries series = tail_ratio_series(days, ctx.config().tail_thresholds);
  ctx.outputs().tails = series;
  ctx.outputs().pooled_nights = pool_days(select_metric(days, Metric::kNights));
  ctx.outputs().pooled_gbv = pool_days(select_metric(days, Metric::kGbv));

  std::string csv = "date,threshold,nights_tail,gbv_tail,ratio,defined\n";
  for (std::size_t d = 0; d < series.dates.size(); ++d) {
    for (std::size_t k = 0; k < series.thresholds.size(); ++k) {
      const std::size_t i = series.index(d, k);
      csv += series.dates[d].iso() + "," + std::to_string(series.thresholds[k]) + "," +
             format_double(series.nights_tail[i]) + "," + format_double(series.gbv_tail[i]) +
             "," + format_double(series.ratio[i]) + "," +
             (series.undefined_mask[i] ? "false" : "true") + "\n";
    }
  }

  ordered_json summary = ordered_json::array();
  for (std::size_t k = 0; k < series.thresholds.size(); ++k) {
    double ratio_sum = 0.0, nights_sum = 0.0, gbv_sum = 0.0;
    std::size_t defined = 0;
    for (std::size_t d = 0; d < series.dates.size(); ++d) {
      const std::size_t i = series.index(d, k);
      nights_sum += series.nights_tail[i];
      gbv_sum += series.gbv_tail[i];
      if (!series.undefined_mask[i]) {
        ratio_sum += series.ratio[i];
        ++defined;
      }
    }
    const double n = double(series.dates.size());
    summary.push_back({{"threshold", series.thresholds[k]},
                       {"mean_nights_tail", number(nights_sum / n)},
                       {"mean_gbv_tail", number(gbv_sum / n)},
                       {"mean_ratio", number(defined ? ratio_sum / double(defined) : kNaN)},
                       {"defined_days", defined}});
  }

  Files files = {{"tails.csv", csv}, {"tail_summary.json", dump(summary)}};
  for (auto& [name, text] : emit_plot_data(ctx.outputs(), {"pooled_pmf", "tail_ratio"}))
    files.emplace_back("plots/" + name + ".csv", text);
  return files;
}

Files run_gpd(Context& ctx) {
  std::vector<GpdReport> reports;
  for (Metric metric : {Metric::kNights, Metric::kGbv}) {
    const std::vector<DailyPmf> pool = select_metric(ctx.days(), metric);
    const std::uint64_t seed = substream_seed(ctx.config().seed, metric == Metric::kNights ? 3 : 4);
    reports.push_back({metric, stability_sweep(pool, ctx.config().gpd_thresholds,
                                               ctx.config().draws_per_day, seed,
                                               ctx.config().jitter)});
  }
  std::string csv = "metric,threshold,xi,beta,n_exceed,estimator\n";
  for (const GpdReport& r : reports) {
    for (std::size_t k = 0; k < r.profile.thresholds.size(); ++k) {
      const auto& fit = r.profile.fits[k];
      csv += std::string(to_string(r.metric)) + "," + std::to_string(r.profile.thresholds[k]) +
             "," + format_double(fit ? fit->xi : kNaN) + "," +
             format_double(fit ? fit->beta : kNaN) + "," +
             std::to_string(r.profile.n_by_threshold[k]) + "," +
             (fit ? std::string(to_string(fit->estimator)) : std::string("NA")) + "\n";
    }
  }
  ctx.outputs().gpd = std::move(reports);
  Files files = {{"gpd.csv", csv}};
  for (auto& [name, text] : emit_plot_data(ctx.outputs(), {"xi_stability"}))
    files.emplace_back("plots/" + name + ".csv", text);
  return files;
}

Files run_fit(Context& ctx) {
  const std::vector<DayComparison>& comparisons = ctx.comparisons();
  ctx.outputs().comparisons = comparisons;
  std::string fits = "date,metric,family,a,b,cross_entropy,converged\n";
  std::string compare = "date,metric,winner,ln_minus_gamma,wei_minus_gamma\n";
  for (const DayComparison& c : comparisons) {
    const std::string prefix = c.date.iso() + "," + std::string(to_string(c.metric)) + ",";
    for (Family family : kFamilies) {
      const auto& fit = c.fits[std::size_t(family)];
      fits += prefix + std::string(to_string(family)) + ",";
      if (fit)
        fits += format_double(fit->params.a) + "," + format_double(fit->params.b) + "," +
                format_double(fit->cross_entropy) + "," + (fit->converged ? "true" : "false");
      else
        fits += "NA,NA,NA,false";
      fits += "\n";
    }
    compare += prefix + (c.winner ? std::string(to_string(*c.winner)) : std::string("NA")) +
               "," + format_double(c.ln_minus_gamma) + "," + format_double(c.wei_minus_gamma) +
               "\n";
  }

  ordered_json tally;
  for (Metric metric : {Metric::kNights, Metric::kGbv}) {
    std::vector<DayComparison> subset;
    for (const DayComparison& c : comparisons)
      if (c.metric == metric) subset.push_back(c);
    const WinTally t = win_tally(subset);
    ordered_json entry;
    for (Family family : kFamilies) {
      entry[std::string(to_string(family))] = {
          {"wins", t.counts[std::size_t(family)]},
          {"share", number(t.shares[std::size_t(family)])}};
    }
    entry["unresolved"] = t.unresolved;
    entry["total"] = t.total;
    tally[std::string(to_string(metric))] = entry;
  }

  Files files = {{"fits.csv", fits}, {"comparison.csv", compare}, {"win_tally.json", dump(tally)}};
  for (auto& [name, text] : emit_plot_data(ctx.outputs(), {"ce_difference_hist"}))
    files.emplace_back("plots/" + name + ".csv", text);
  return files;
}

Files run_smooth(Context& ctx) {
  const std::vector<SmoothFit>& fits = ctx.smooth();
  std::string csv = "date,metric,k_used,edf,lambda,crps,kld,k_check_passed\n";
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const DailyPmf& x = ctx.pmf(i);
    const auto [c, k] = score_smoother(fits[i], x);
    csv += x.date().iso() + "," + std::string(to_string(x.metric())) + "," +
           std::to_string(fits[i].k_used) + "," + format_double(fits[i].edf) + "," +
           format_double(fits[i].lambda) + "," + format_double(c) + "," + format_double(k) +
           "," + (fits[i].k_check_passed ? "true" : "false") + "\n";
  }
  return {{"smoother.csv", csv}};
}

Files run_score(Context& ctx) {
  const std::vector<DayComparison>& comparisons = ctx.comparisons();
  const std::vector<SmoothFit>& smooth = ctx.smooth();
  const std::array<std::string, 4> models = {"gamma", "weibull", "lognormal", "smoother"};
  // sums[metric][model] of crps and kld, with counts
  std::array<std::array<double, 4>, 2> crps_sum{}, kld_sum{};
  std::array<std::array<std::size_t, 4>, 2> counts{};

  std::string csv = "date,metric,model,crps,kld,in_sample\n";
  for (std::size_t i = 0; i < comparisons.size(); ++i) {
    const DailyPmf& x = ctx.pmf(i);
    const std::size_t m = x.metric() == Metric::kNights ? 0 : 1;
    const std::string prefix = x.date().iso() + "," + std::string(to_string(x.metric())) + ",";
    for (std::size_t model = 0; model < 4; ++model) {
      double c = kNaN, k = kNaN;
      if (model < 3) {
        const auto& fit = comparisons[i].fits[model];
        if (fit) {
          c = crps(cdf(fit->induced_pmf), x);
          k = kld(x.mass(), fit->induced_pmf);
        }
      } else {
        std::tie(c, k) = score_smoother(smooth[i], x);
      }
      if (std::isfinite(c) && std::isfinite(k)) {
        crps_sum[m][model] += c;
        kld_sum[m][model] += k;
        ++counts[m][model];
      }
      csv += prefix + models[model] + "," + format_double(c) + "," + format_double(k) +
             ",true\n";
    }
  }

  ordered_json summary;
  summary["in_sample"] = true;
  for (Metric metric : {Metric::kNights, Metric::kGbv}) {
    const std::size_t m = metric == Metric::kNights ? 0 : 1;
    ordered_json entry;
    for (std::size_t model = 0; model < 4; ++model) {
      const double n = double(counts[m][model]);
      entry[models[model]] = {{"mean_crps", number(n > 0 ? crps_sum[m][model] / n : kNaN)},
                              {"mean_kld", number(n > 0 ? kld_sum[m][model] / n : kNaN)},
                              {"days", counts[m][model]}};
    }
    summary[std::string(to_string(metric))] = entry;
  }
  return {{"scores.csv", csv}, {"score_summary.json", dump(summary)}};
}

ordered_json config_json(const RunConfig& config) {
  ordered_json stages = ordered_json::array();
  for (Stage s : config.stages) stages.push_back(std::string(to_string(s)));
  ordered_json j;
  j["input"] = config.input_path;
  j["scenario"] = config.scenario_path;
  j["stages"] = stages;
  j["seed"] = config.seed;
  j["tail_thresholds"] = config.tail_thresholds;
  j["gpd_thresholds"] = config.gpd_thresholds;
  j["replicates"] = config.bootstrap_replicates;
  j["max_breaks"] = config.max_breaks;
  j["trim"] = config.trim;
  j["draws_per_day"] = config.draws_per_day;
  j["jitter"] = config.jitter;
  j["supf_null_draws"] = config.supf_null_draws;
  return j;
}

void write_outputs(const fs::path& dir, const Files& files, ordered_json& stage_entry) {
  ordered_json names = ordered_json::array();
  for (const auto& [name, text] : files) {
    const fs::path path = dir / name;
    fs::create_directories(path.parent_path());
    write_file_atomic(path, text);
    names.push_back(name);
  }
  stage_entry["outputs"] = names;
}

}  // namespace

std::string_view to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::kSimulate: return "simulate";
    case Stage::kDivergence: return "divergence";
    case Stage::kBreaks: return "breaks";
    case Stage::kTails: return "tails";
    case Stage::kGpd: return "gpd";
    case Stage::kFit: return "fit";
    case Stage::kSmooth: return "smooth";
    case Stage::kScore: return "score";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) noexcept {
  for (Stage s : kStages)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

void validate_config(const RunConfig& config) {
  auto bad = [](const std::string& message) { fail(ErrorCode::kInvalidConfig, message); };
  if (config.stages.empty()) bad("no stages requested");
  if (config.output_dir.empty()) bad("--output is required");
  const bool simulate =
      std::find(config.stages.begin(), config.stages.end(), Stage::kSimulate) !=
      config.stages.end();
  if (simulate && config.scenario_path.empty()) bad("the simulate stage needs --scenario");
  if (!simulate && config.input_path.empty()) bad("--input is required");
  for (int u : config.tail_thresholds)
    if (u < 0 || u > kMaxLead - 1) bad("tail thresholds must lie in [0, 364]");
  if (config.tail_thresholds.empty()) bad("no tail thresholds");
  if (config.gpd_thresholds.empty()) bad("no GPD thresholds");
  for (std::size_t i = 0; i < config.gpd_thresholds.size(); ++i) {
    if (config.gpd_thresholds[i] < 0 || config.gpd_thresholds[i] > kMaxLead)
      bad("GPD thresholds must lie in [0, 365]");
    if (i > 0 && config.gpd_thresholds[i] <= config.gpd_thresholds[i - 1])
      bad("GPD thresholds must be strictly increasing");
  }
  if (config.bootstrap_replicates < 100) bad("--replicates must be at least 100");
  if (!(config.trim > 0.0 && config.trim < 0.5)) bad("--trim must lie in (0, 0.5)");
  if (config.draws_per_day < 1) bad("--draws-per-day must be at least 1");
  if (config.supf_null_draws < 200) bad("sup-F null needs at least 200 draws");
}

int histogram_bin(double v) {
  if (v < kHistogramLow) return -1;
  if (v >= kHistogramHigh) return kHistogramBins;
  const int bin = int(std::floor(v * 200.0 + 1e-9)) + 10;
  return std::clamp(bin, 0, kHistogramBins - 1);
}

std::map<std::string, std::string> emit_plot_data(const StageOutputs& outputs,
                                                  const std::vector<std::string>& bundles) {
  auto missing = [](const std::string& bundle, const char* source) {
    fail(ErrorCode::kMissingStageOutput,
         "plot bundle " + bundle + " needs the " + source + " stage output");
  };
  std::map<std::string, std::string> out;
  for (const std::string& bundle : bundles) {
    std::string csv;
    if (bundle == "pooled_pmf") {
      if (!outputs.pooled_nights || !outputs.pooled_gbv) missing(bundle, "tails");
      csv = "lead,nights,gbv\n";
      for (std::size_t l = 0; l < kSupportSize; ++l)
        csv += std::to_string(l) + "," + format_double(outputs.pooled_nights->mass[l]) + "," +
               format_double(outputs.pooled_gbv->mass[l]) + "\n";
    } else if (bundle == "w1_breaks") {
      if (!outputs.divergence || !outputs.breaks) missing(bundle, "breaks");
      const auto& series = *outputs.divergence;
      const auto ids = outputs.breaks->segment_ids(series.w1.size());
      csv = "date,w1,segment_id,segment_mean,regime_start\n";
      for (std::size_t t = 0; t < series.w1.size(); ++t) {
        const bool start = t > 0 && ids[t] != ids[t - 1];
        csv += series.dates[t].iso() + "," + format_double(series.w1[t]) + "," +
               std::to_string(ids[t]) + "," +
               format_double(outputs.breaks->segment_means[ids[t]]) + "," +
               (start ? "true" : "false") + "\n";
      }
    } else if (bundle == "tail_ratio") {
      if (!outputs.tails) missing(bundle, "tails");
      const auto& s = *outputs.tails;
      csv = "date,threshold,ratio\n";
      for (std::size_t d = 0; d < s.dates.size(); ++d)
        for (std::size_t k = 0; k < s.thresholds.size(); ++k)
          csv += s.dates[d].iso() + "," + std::to_string(s.thresholds[k]) + "," +
                 format_double(s.ratio[s.index(d, k)]) + "\n";
    } else if (bundle == "xi_stability") {
      if (!outputs.gpd) missing(bundle, "gpd");
      csv = "metric,threshold,xi,n_exceed\n";
      for (const GpdReport& r : *outputs.gpd)
        for (std::size_t k = 0; k < r.profile.thresholds.size(); ++k)
          csv += std::string(to_string(r.metric)) + "," +
                 std::to_string(r.profile.thresholds[k]) + "," +
                 format_double(r.profile.xi_by_threshold[k]) + "," +
                 std::to_string(r.profile.n_by_threshold[k]) + "\n";
    } else if (bundle == "ce_difference_hist") {
      if (!outputs.comparisons) missing(bundle, "fit");
      csv = "metric,difference,bin,lower,upper,count\n";
      for (Metric metric : {Metric::kNights, Metric::kGbv}) {
        for (int which = 0; which < 2; ++which) {
          std::vector<std::size_t> counts(kHistogramBins + 2, 0);
          for (const DayComparison& c : *outputs.comparisons) {
            if (c.metric != metric) continue;
            const double v = which == 0 ? c.ln_minus_gamma : c.wei_minus_gamma;
            if (std::isnan(v)) continue;
            ++counts[std::size_t(histogram_bin(v) + 1)];
          }
          const std::string prefix = std::string(to_string(metric)) + "," +
                                     (which == 0 ? "ln_minus_gamma" : "wei_minus_gamma") + ",";
          csv += prefix + "underflow,-Inf," + format_double(kHistogramLow) + "," +
                 std::to_string(counts[0]) + "\n";
          for (int b = 0; b < kHistogramBins; ++b) {
            const double lower = kHistogramLow + b * kHistogramWidth;
            csv += prefix + std::to_string(b) + "," + format_double(lower) + "," +
                   format_double(lower + kHistogramWidth) + "," +
                   std::to_string(counts[std::size_t(b + 1)]) + "\n";
          }
          csv += prefix + "overflow," + format_double(kHistogramHigh) + ",Inf," +
                 std::to_string(counts[kHistogramBins + 1]) + "\n";
        }
      }
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown plot bundle " + bundle);
    }
    out[bundle] = std::move(csv);
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::kIo, "SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

RunOutcome run_pipeline(const RunConfig& raw_config) {
  RunOutcome outcome;
  RunConfig config = raw_config;
  std::sort(config.stages.begin(), config.stages.end());
  config.stages.erase(std::unique(config.stages.begin(), config.stages.end()),
                      config.stages.end());
  try {
    validate_config(config);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitInvalidInput;
    outcome.message = e.what();
    return outcome;
  }

  const fs::path dir = config.output_dir;
  ordered_json manifest;
  manifest["tool"] = "leadtime-lab";
  manifest["version"] = "0.1.0";
  manifest["config"] = config_json(config);
  manifest["seed"] = config.seed;
  ordered_json stage_entries = ordered_json::array();
  auto finish = [&](const std::string& status) {
    manifest["status"] = status;
    manifest["failed_stage"] =
        outcome.failed_stage.empty() ? ordered_json(nullptr) : ordered_json(outcome.failed_stage);
    manifest["stages"] = stage_entries;
    try {
      write_file_atomic(dir / "manifest.json", dump(manifest));
    } catch (const std::exception& e) {
      if (outcome.message.empty()) outcome.message = e.what();
      if (outcome.exit_code == kExitOk) outcome.exit_code = kExitStageFailed;
    }
  };

  try {
    fs::create_directories(dir);
  } catch (const std::exception& e) {
    outcome.exit_code = kExitInvalidInput;
    outcome.message = std::string("cannot create output directory: ") + e.what();
    return outcome;
  }

  std::vector<PairedDay> days;
  std::string input_text;
  auto stage_it = config.stages.begin();
  if (*stage_it == Stage::kSimulate) {
    ++stage_it;
    const auto start = std::chrono::steady_clock::now();
    ordered_json entry;
    entry["name"] = "simulate";
    try {
      const std::string scenario_text = read_file(config.scenario_path);
      ScenarioSpec spec = parse_scenario(scenario_text);
      spec.seed = config.seed;
      days = generate_panel(spec);
      input_text = panel_to_csv(days);
      manifest["scenario"] = {{"path", config.scenario_path},
                              {"sha256", sha256_hex(scenario_text)}};
      write_outputs(dir, {{"panel.csv", input_text}}, entry);
    } catch (const Error& e) {
      outcome.failed_stage = "simulate";
      outcome.message = e.what();
      outcome.exit_code =
          e.code() == ErrorCode::kInvalidSpec || e.code() == ErrorCode::kIo ? kExitInvalidInput
                                                                             : kExitStageFailed;
      finish("failed");
      return outcome;
    }
    entry["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stage_entries.push_back(entry);
    outcome.completed_stages.push_back("simulate");
    // The simulated panel goes through the same parser as any input file.
    PanelRead read = parse_panel_csv(input_text);
    days = std::move(read.days);
  } else {
    PanelRead read;
    try {
      input_text = read_file(config.input_path);
      read = parse_panel_csv(input_text);
    } catch (const std::exception& e) {
      outcome.exit_code = kExitInvalidInput;
      outcome.message = e.what();
      return outcome;
    }
    if (!read.ok()) {
      outcome.exit_code = kExitInvalidInput;
      outcome.message = "input validation failed with " +
                        std::to_string(read.diagnostics.size()) + " problem(s)";
      for (const RowDiagnostic& d : read.diagnostics)
        outcome.diagnostics.push_back(
            d.line > 0 ? "line " + std::to_string(d.line) + ": " + d.message : d.message);
      return outcome;
    }
    days = std::move(read.days);
    manifest["input_renormalized_days"] = read.renormalized_days;
  }
  manifest["input_sha256"] = sha256_hex(input_text);
  manifest["input_days"] = days.size();

  Context ctx(config, std::move(days));
  for (; stage_it != config.stages.end(); ++stage_it) {
    const Stage stage = *stage_it;
    const auto start = std::chrono::steady_clock::now();
    ordered_json entry;
    entry["name"] = std::string(to_string(stage));
    try {
      Files files;
      switch (stage) {
        case Stage::kSimulate: break;
        case Stage::kDivergence: files = run_divergence(ctx); break;
        case Stage::kBreaks: files = run_breaks(ctx); break;
        case Stage::kTails: files = run_tails(ctx); break;
        case Stage::kGpd: files = run_gpd(ctx); break;
        case Stage::kFit: files = run_fit(ctx); break;
        case Stage::kSmooth: files = run_smooth(ctx); break;
        case Stage::kScore: files = run_score(ctx); break;
      }
      write_outputs(dir, files, entry);
    } catch (const std::exception& e) {
      outcome.exit_code = kExitStageFailed;
      outcome.failed_stage = std::string(to_string(stage));
      outcome.message = e.what();
      finish("failed");
      return outcome;
    }
    entry["wall_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    stage_entries.push_back(entry);
    outcome.completed_stages.emplace_back(to_string(stage));
  }
  finish("ok");
  return outcome;
}

}  // namespace leadtime
