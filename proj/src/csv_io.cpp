#include "csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "error.hpp"

namespace leadtime {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

bool parse_number(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_integer(std::string_view s, long long& out) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct DayRows {
  std::vector<double> nights = std::vector<double>(kSupportSize, 0.0);
  std::vector<double> gbv = std::vector<double>(kSupportSize, 0.0);
  std::vector<std::size_t> line_of = std::vector<std::size_t>(kSupportSize, 0);
  bool row_error = false;  // already reported against a line
};

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  if (value == 0.0) return "0";
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

PanelRead parse_panel_csv(std::string_view text) {
  PanelRead out;
  auto diagnose = [&](std::size_t line, std::string message) {
    out.diagnostics.push_back({line, std::move(message)});
  };

  std::map<Date, DayRows> days;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() != 4 || fields[0] != "date" || fields[1] != "lead" ||
          fields[2] != "nights_share" || fields[3] != "gbv_share") {
        diagnose(line_no, "header must be date,lead,nights_share,gbv_share");
        return out;
      }
      continue;
    }
    if (fields.size() != 4) {
      diagnose(line_no, "expected 4 fields, found " + std::to_string(fields.size()));
      continue;
    }
    const auto date = Date::parse(fields[0]);
    if (!date) {
      diagnose(line_no, "invalid date '" + std::string(fields[0]) + "'");
      continue;
    }
    long long lead = 0;
    if (!parse_integer(fields[1], lead)) {
      diagnose(line_no, "invalid lead '" + std::string(fields[1]) + "'");
      continue;
    }
    if (lead < 0 || lead > kMaxLead) {
      diagnose(line_no, "lead " + std::to_string(lead) + " outside 0-365");
      continue;
    }
    double nights = 0.0, gbv = 0.0;
    if (!parse_number(fields[2], nights)) {
      diagnose(line_no, "invalid nights_share '" + std::string(fields[2]) + "'");
      continue;
    }
    if (!parse_number(fields[3], gbv)) {
      diagnose(line_no, "invalid gbv_share '" + std::string(fields[3]) + "'");
      continue;
    }
    DayRows& rows = days[*date];
    if (!(nights >= -kNegativeTolerance) || !(gbv >= -kNegativeTolerance)) {
      const bool gbv_bad = nights >= -kNegativeTolerance;
      diagnose(line_no, std::string(gbv_bad ? "negative gbv_share " : "negative nights_share ") +
                            format_double(gbv_bad ? gbv : nights));
      rows.row_error = true;
      continue;
    }
    const std::size_t l = std::size_t(lead);
    if (rows.line_of[l] != 0) {
      diagnose(line_no, "duplicate row for " + date->iso() + " lead " +
                            std::to_string(lead) + " (first at line " +
                            std::to_string(rows.line_of[l]) + ")");
      continue;
    }
    rows.line_of[l] = line_no;
    rows.nights[l] = nights;
    rows.gbv[l] = gbv;
  }
  if (!header_seen) {
    diagnose(0, "empty input: header required");
    return out;
  }

  for (auto& [date, rows] : days) {
    if (rows.row_error) continue;
    std::string problem;
    try {
      DailyPmf nights = validate_pmf(rows.nights, date, Metric::kNights);
      try {
        DailyPmf gbv = validate_pmf(rows.gbv, date, Metric::kGbv);
        out.renormalized_days += (nights.renormalized() || gbv.renormalized()) ? 1 : 0;
        out.days.emplace_back(std::move(nights), std::move(gbv));
      } catch (const Error& e) {
        problem = "gbv: " + std::string(e.what());
      }
    } catch (const Error& e) {
      problem = "nights: " + std::string(e.what());
    }
    if (!problem.empty()) diagnose(0, date.iso() + " " + problem);
  }
  if (out.days.empty() && out.diagnostics.empty()) diagnose(0, "no data rows");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

PanelRead read_panel_csv(const std::filesystem::path& path) {
  return parse_panel_csv(read_file(path));
}

std::string panel_to_csv(std::span<const PairedDay> days) {
  std::string out = "date,lead,nights_share,gbv_share\n";
  for (const PairedDay& day : days) {
    const std::string date = day.date.iso();
    for (std::size_t l = 0; l < kSupportSize; ++l) {
      if (day.nights[l] == 0.0 && day.gbv[l] == 0.0) continue;
      out += date;
      out += ',';
      out += std::to_string(l);
      out += ',';
      out += format_double(day.nights[l]);
      out += ',';
      out += format_double(day.gbv[l]);
      out += '\n';
    }
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + temp.string());
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (!out) fail(ErrorCode::kIo, "write failed for " + temp.string());
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp, ec);
    fail(ErrorCode::kIo, "cannot move " + temp.string() + " into place");
  }
}

}  // namespace leadtime
