#pragma once

#include <map>
#include <string>
#include <vector>

#include "latpred/telemetry.hpp"

namespace latpred {

// Maps canonical column names to the header names actually present in a file.
// Identity by default.
struct ColumnMap {
  std::map<std::string, std::string> names;

  std::string resolve(const std::string& canonical) const {
    auto it = names.find(canonical);
    return it == names.end() ? canonical : it->second;
  }
};

struct RejectedRow {
  std::size_t row;  // 1-based data-row number (header excluded)
  std::string reason;
};

struct LoadReport {
  SampleSet data;
  std::vector<RejectedRow> rejected;
};

// Reads a comma-delimited UTF-8 file with a header row. Rows whose cells fail
// to parse or whose values violate the sample invariants are skipped and
// reported; a missing file, a missing mapped column, or zero valid rows throw.
LoadReport load_csv(const std::string& path, const ColumnMap& schema = {});

// Writes the canonical five-column schema. Values are emitted with
// shortest-round-trip formatting, so a reload reproduces the samples exactly.
void save_csv(const std::string& path, const SampleSet& data);

}  // namespace latpred
