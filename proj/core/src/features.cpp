#include "latpred/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace latpred {

ScalingSpec ScalingSpec::defaults() {
  ScalingSpec s;
  s.divisors[columns::kClientFrameSize] = 1e6;
  s.divisors[columns::kArrivalRateCl] = 1e3;
  s.divisors[columns::kArrivalRateAll] = 1e3;
  s.divisors[columns::kUtilization] = 1.0;
  return s;
}

double ScalingSpec::divisor(const std::string& feature) const {
  auto it = divisors.find(feature);
  if (it == divisors.end()) {
    throw std::invalid_argument("no scaling divisor for feature: " + feature);
  }
  if (!(it->second > 0.0)) {
    throw std::invalid_argument("scaling divisor must be positive for: " + feature);
  }
  return it->second;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("pearson: need at least two points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::invalid_argument("pearson: zero variance input");
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::vector<double> feature_column(const SampleSet& data, const std::string& feature) {
  std::vector<double> col;
  col.reserve(data.size());
  for (const auto& s : data.samples) col.push_back(feature_value(s, feature));
  return col;
}

std::vector<std::string> select_features(const SampleSet& data, double threshold,
                                         const std::vector<std::string>& drop_priority) {
  if (data.empty()) throw std::invalid_argument("select_features: empty sample set");

  const std::vector<std::string> all = {columns::kClientFrameSize, columns::kArrivalRateCl,
                                        columns::kArrivalRateAll, columns::kUtilization};
  auto rank = [&](const std::string& f) -> std::size_t {
    for (std::size_t i = 0; i < drop_priority.size(); ++i) {
      if (drop_priority[i] == f) return i;
    }
    return drop_priority.size();
  };

  std::vector<bool> dropped(all.size(), false);
  std::vector<std::vector<double>> cols;
  cols.reserve(all.size());
  for (const auto& f : all) cols.push_back(feature_column(data, f));

  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t j = i + 1; j < all.size(); ++j) {
      if (dropped[i] || dropped[j]) continue;
      const double r = pearson(cols[i], cols[j]);
      if (std::abs(r) > threshold) {
        // Drop the member that appears earlier in the drop-priority list.
        if (rank(all[i]) <= rank(all[j])) {
          dropped[i] = true;
        } else {
          dropped[j] = true;
        }
      }
    }
  }

  std::vector<std::string> retained;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!dropped[i]) retained.push_back(all[i]);
  }
  return retained;
}

std::array<double, 3> rescale_sample(const TelemetrySample& s, const ScalingSpec& scaling) {
  return {s.client_frame_size / scaling.divisor(columns::kClientFrameSize),
          s.utilization / scaling.divisor(columns::kUtilization),
          s.arrival_rate_all / scaling.divisor(columns::kArrivalRateAll)};
}

FeatureMatrix to_feature_matrix(const SampleSet& data, const std::vector<std::string>& retained,
                                const ScalingSpec& scaling) {
  auto has = [&](const char* f) {
    return std::find(retained.begin(), retained.end(), f) != retained.end();
  };
  for (const char* f :
       {columns::kClientFrameSize, columns::kUtilization, columns::kArrivalRateAll}) {
    if (!has(f)) {
      throw std::invalid_argument(std::string("to_feature_matrix: required feature not retained: ") + f);
    }
  }
  for (const auto& f : retained) {
    scaling.divisor(f);  // throws if the divisor is missing or non-positive
  }

  FeatureMatrix m;
  m.features = retained;
  m.x.reserve(data.size());
  m.y.reserve(data.size());
  for (const auto& s : data.samples) {
    m.x.push_back(rescale_sample(s, scaling));
    m.y.push_back(s.delay);
  }
  return m;
}

}  // namespace latpred
