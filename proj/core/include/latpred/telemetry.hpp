#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace latpred {

// Canonical feature / column names shared by CSV files, scaling specs and
// model files.
namespace columns {
inline constexpr const char* kClientFrameSize = "Client_Frame_Size";
inline constexpr const char* kArrivalRateCl = "Arrival_rate_Cl";
inline constexpr const char* kArrivalRateAll = "Arrival_rate_All";
inline constexpr const char* kUtilization = "Utilization";
inline constexpr const char* kDelay = "Delay";
}  // namespace columns

// One monitored observation on a network segment.
struct TelemetrySample {
  double client_frame_size = 0.0;  // bytes
  double arrival_rate_cl = 0.0;    // packets/s, client interface only
  double arrival_rate_all = 0.0;   // packets/s, all devices on the segment
  double utilization = 0.0;        // link utilization as recorded; may exceed 100
  double delay = 0.0;              // end-to-end delay in seconds (target)
};

inline bool sample_valid(const TelemetrySample& s) {
  const bool finite = std::isfinite(s.client_frame_size) && std::isfinite(s.arrival_rate_cl) &&
                      std::isfinite(s.arrival_rate_all) && std::isfinite(s.utilization) &&
                      std::isfinite(s.delay);
  return finite && s.client_frame_size >= 0.0 && s.arrival_rate_cl >= 0.0 &&
         s.arrival_rate_all >= 0.0 && s.utilization >= 0.0 && s.delay > 0.0;
}

// Ordered collection of samples; row order is stable.
struct SampleSet {
  std::vector<TelemetrySample> samples;
  std::string provenance;  // source path or "generator:seed=N"

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

inline double feature_value(const TelemetrySample& s, const std::string& name) {
  if (name == columns::kClientFrameSize) return s.client_frame_size;
  if (name == columns::kArrivalRateCl) return s.arrival_rate_cl;
  if (name == columns::kArrivalRateAll) return s.arrival_rate_all;
  if (name == columns::kUtilization) return s.utilization;
  if (name == columns::kDelay) return s.delay;
  throw std::invalid_argument("unknown feature name: " + name);
}

}  // namespace latpred
