#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "latpred/fit.hpp"
#include "latpred/models.hpp"
#include "latpred/telemetry.hpp"

namespace latpred {

// MAE / MSE / R² over one prediction vector. r2 is absent when the target has
// zero variance.
struct EvalReport {
  double mae = 0.0;
  double mse = 0.0;
  std::optional<double> r2;
  std::size_t n = 0;
};

EvalReport metrics(std::span<const double> y, std::span<const double> y_hat);

struct MetricStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n-1)
  std::size_t count = 0;
};

struct FoldResult {
  EvalReport report;
  bool ok = false;
  std::string error;
};

struct CVReport {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> folds;
  MetricStats mae;
  MetricStats mse;
  MetricStats r2;
  bool all_folds_ok = false;
};

// Deterministic fold assignment: one seeded shuffle, then contiguous blocks
// whose sizes differ by at most one.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed);

CVReport kfold_cv(const FeatureMatrix& m, ModelFamily family, int k, std::uint64_t seed,
                  const FitOptions& opts,
                  const std::string& univariate_feature = columns::kClientFrameSize);

struct ResidualBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct ResidualProfile {
  std::string feature;
  std::vector<ResidualBin> bins;
  std::size_t n = 0;
  bool degenerate = false;  // constant feature collapsed the profile to one bin
  std::string note;
};

// Residual = observed - predicted, binned by quantiles of the chosen raw
// feature so sparse high-load regions still get stable statistics.
ResidualProfile residual_profile(const FittedModel& model, const SampleSet& data,
                                 const std::string& feature, int bins = 10);

// Plot-ready (feature value, residual) pairs in row order.
std::vector<std::pair<double, double>> residual_points(const FittedModel& model,
                                                       const SampleSet& data,
                                                       const std::string& feature);

struct TimingReport {
  double avg_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  std::size_t n = 0;
  std::size_t warmup = 0;
};

// Wall-clock latency of single-sample predict calls on a monotonic clock,
// one sample per call, after the warmup calls are discarded. Rows are cycled
// when fewer than n are available.
TimingReport time_inference(const FittedModel& model, const SampleSet& data, std::size_t n = 100,
                            std::size_t warmup = 20);

}  // namespace latpred
