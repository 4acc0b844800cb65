#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "latpred/telemetry.hpp"

namespace latpred {

// Per-feature divisors applied before fitting. The spec used at fit time is
// stored inside the model file and reapplied verbatim at predict time.
struct ScalingSpec {
  std::map<std::string, double> divisors;

  static ScalingSpec defaults();

  double divisor(const std::string& feature) const;

  bool operator==(const ScalingSpec&) const = default;
};

// Rows of (x1, x2, x3) = rescaled (Client_Frame_Size, Utilization,
// Arrival_rate_All), plus the target vector in seconds.
struct FeatureMatrix {
  std::vector<std::array<double, 3>> x;
  std::vector<double> y;
  std::vector<std::string> features;  // retained raw-feature names

  std::size_t rows() const { return x.size(); }
};

// Pearson product-moment correlation. Throws on length mismatch, fewer than
// two points, or zero variance in either vector.
double pearson(std::span<const double> xs, std::span<const double> ys);

// Drops the lower-priority member of every raw-feature pair whose |pearson|
// exceeds the threshold (strict). The default drop order mirrors the campus
// dataset's choice: Arrival_rate_Cl goes first.
std::vector<std::string> select_features(
    const SampleSet& data, double threshold = 0.95,
    const std::vector<std::string>& drop_priority = {
        columns::kArrivalRateCl, columns::kClientFrameSize, columns::kArrivalRateAll,
        columns::kUtilization});

// Builds the (x1, x2, x3) matrix in canonical order. All three canonical
// features must be retained and have a divisor; extra retained features are
// recorded but carry no column.
FeatureMatrix to_feature_matrix(const SampleSet& data, const std::vector<std::string>& retained,
                                const ScalingSpec& scaling);

// Rescaled (x1, x2, x3) for a single sample.
std::array<double, 3> rescale_sample(const TelemetrySample& s, const ScalingSpec& scaling);

std::vector<double> feature_column(const SampleSet& data, const std::string& feature);

}  // namespace latpred
