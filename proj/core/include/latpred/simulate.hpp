#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "latpred/features.hpp"
#include "latpred/models.hpp"
#include "latpred/telemetry.hpp"

namespace latpred {

struct FeatureRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Hidden process that is itself a rational-exp model over the rescaled
// features; used for exact-recovery checks.
struct RationalExpHidden {
  RationalExpParams params;
};

// Hidden process with a queueing-style pole in utilization. The model
// families can only approximate it, which is what produces the congestion
// skew in linear-model residuals:
//   amplification = capacity / (capacity - utilization)
//   delay = base + (frame_coef*x1 + util_coef*x2 + arrival_coef*x3)
//           * amplification * exp(arrival_exp_rate * x3) + cross_coef*x1*x3
struct SaturatingHidden {
  double base = 0.002;
  double frame_coef = 0.004;
  double util_coef = 0.0002;
  double arrival_coef = 0.002;
  double capacity = 150.0;  // utilization value the queue diverges toward
  double arrival_exp_rate = 0.06;
  double cross_coef = 0.0008;
};

struct GeneratorConfig {
  std::size_t n = 5000;
  std::uint64_t seed = 1;
  FeatureRange frame_size{2e5, 2e6};      // bytes
  FeatureRange arrival_cl{50.0, 500.0};   // packets/s
  FeatureRange arrival_all{500.0, 5000.0};
  FeatureRange utilization{20.0, 130.0};  // includes the above-100 regime
  std::variant<SaturatingHidden, RationalExpHidden> hidden = SaturatingHidden{};
  double noise_sigma = 0.01;  // delay noise as a fraction of the mean noiseless delay
  double target_rho = 0.98;   // frame-size vs client-arrival-rate correlation
  ScalingSpec scaling = ScalingSpec::defaults();
};

// The config's default saturating process tuned so the rational families fit
// it closely while plain linear regression loses noticeably under load.
GeneratorConfig default_generator_config();

// Same process, but self-realizable: the hidden model is rational-exp, so a
// rational-exp fit can recover its predictions exactly when sigma = 0.
GeneratorConfig rational_exp_generator_config();

struct GroundTruth {
  std::string hidden_kind;  // "saturating" | "rational_exp"
  std::vector<double> hidden_params;
  std::vector<double> noiseless_delay;  // one entry per generated row
};

// Deterministic synthetic dataset with a hidden ground-truth delay process.
// Pure function of the config; equal configs give equal output.
std::pair<SampleSet, GroundTruth> generate(const GeneratorConfig& config);

// base + k / (capacity - load); strictly increasing and convex in the load,
// diverging as the load approaches capacity. Throws when load >= capacity.
double saturating_delay(double load, double capacity, double k = 1.0, double base = 0.0);

}  // namespace latpred
