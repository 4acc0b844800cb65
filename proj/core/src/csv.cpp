#include "latpred/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace latpred {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

}  // namespace

LoadReport load_csv(const std::string& path, const ColumnMap& schema) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);

  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error("empty CSV file: " + path);
  const auto header_cells = split_line(header);

  const std::array<const char*, 5> canonical = {
      columns::kClientFrameSize, columns::kArrivalRateCl, columns::kArrivalRateAll,
      columns::kUtilization, columns::kDelay};
  std::array<std::size_t, 5> col_index{};
  for (std::size_t c = 0; c < canonical.size(); ++c) {
    const std::string wanted = schema.resolve(canonical[c]);
    bool found = false;
    for (std::size_t i = 0; i < header_cells.size(); ++i) {
      if (trim(header_cells[i]) == wanted) {
        col_index[c] = i;
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("missing column '" + wanted + "' in " + path);
  }

  LoadReport report;
  report.data.provenance = path;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_line(line);

    TelemetrySample s;
    double* fields[5] = {&s.client_frame_size, &s.arrival_rate_cl, &s.arrival_rate_all,
                         &s.utilization, &s.delay};
    bool ok = true;
    std::string reason;
    for (std::size_t c = 0; c < 5 && ok; ++c) {
      if (col_index[c] >= cells.size()) {
        ok = false;
        reason = "too few cells";
      } else if (!parse_double(cells[col_index[c]], *fields[c])) {
        ok = false;
        reason = std::string("non-numeric cell in column ") + canonical[c];
      }
    }
    if (ok && !sample_valid(s)) {
      ok = false;
      reason = "invariant violation (negative feature or non-positive delay)";
    }
    if (ok) {
      report.data.samples.push_back(s);
    } else {
      report.rejected.push_back({row, reason});
    }
  }

  if (report.data.samples.empty()) {
    throw std::runtime_error("no valid rows in " + path);
  }
  return report;
}

void save_csv(const std::string& path, const SampleSet& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write CSV file: " + path);
  out << columns::kClientFrameSize << ',' << columns::kArrivalRateCl << ','
      << columns::kArrivalRateAll << ',' << columns::kUtilization << ',' << columns::kDelay
      << '\n';
  for (const auto& s : data.samples) {
    out << format_double(s.client_frame_size) << ',' << format_double(s.arrival_rate_cl) << ','
        << format_double(s.arrival_rate_all) << ',' << format_double(s.utilization) << ','
        << format_double(s.delay) << '\n';
  }
}

}  // namespace latpred
