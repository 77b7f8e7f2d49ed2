#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "composition.hpp"

namespace leadtime {

struct RowDiagnostic {
  std::size_t line = 0;  // 1-based; 0 for whole-file or per-day problems
  std::string message;
};

struct PanelRead {
  std::vector<PairedDay> days;  // sorted by date
  std::vector<RowDiagnostic> diagnostics;
  std::size_t renormalized_days = 0;

  bool ok() const { return diagnostics.empty(); }
};

// Long-format panel: header `date,lead,nights_share,gbv_share`, one row per
// (date, lead), missing leads read as 0. Problems are collected rather than
// thrown; days with any diagnostic are dropped.
PanelRead parse_panel_csv(std::string_view text);

// Throws Io when the file cannot be read.
std::string read_file(const std::filesystem::path& path);
PanelRead read_panel_csv(const std::filesystem::path& path);

// Rows with a nonzero share only, shares in shortest round-trip form.
std::string panel_to_csv(std::span<const PairedDay> days);

// Write to a sibling temporary file and rename over the target. Throws Io.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Shortest round-trip formatting used by every CSV and JSON writer.
std::string format_double(double value);

}  // namespace leadtime
