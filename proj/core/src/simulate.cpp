#include "latpred/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "latpred/rng.hpp"

namespace latpred {
namespace {

constexpr double kDelayFloor = 1e-6;

void check_range(const FeatureRange& r, const char* name) {
  if (!(r.lo < r.hi) || !(r.lo >= 0.0)) {
    throw std::invalid_argument(std::string("generator: degenerate or negative range for ") + name);
  }
}

// The denominator of a rational-exp hidden model is affine in x, so its
// minimum over the rescaled feature box is attained at a corner.
void check_denominator_over_box(const RationalExpParams& p, const std::array<double, 3>& lo,
                                const std::array<double, 3>& hi) {
  for (int corner = 0; corner < 8; ++corner) {
    const std::array<double, 3> x = {(corner & 1) ? hi[0] : lo[0], (corner & 2) ? hi[1] : lo[1],
                                     (corner & 4) ? hi[2] : lo[2]};
    const double den = 1.0 + p.b[0] * x[0] + p.b[1] * x[1] + p.b[2] * x[2] + p.c;
    if (!(den > kDenominatorFloor)) {
      throw std::invalid_argument(
          "generator: hidden rational-exp denominator crosses the floor inside the feature box");
    }
  }
}

double hidden_delay(const SaturatingHidden& h, const std::array<double, 3>& x) {
  // x = (frame, utilization, arrival_all) after rescaling; the queue pole acts
  // on the raw-scale utilization, which the default scaling leaves unchanged.
  const double amplification = saturating_delay(x[1], h.capacity, h.capacity, 0.0);
  const double traffic = h.frame_coef * x[0] + h.util_coef * x[1] + h.arrival_coef * x[2];
  return h.base + traffic * amplification * std::exp(h.arrival_exp_rate * x[2]) +
         h.cross_coef * x[0] * x[2];
}

}  // namespace

double saturating_delay(double load, double capacity, double k, double base) {
  if (!(load < capacity)) {
    throw std::invalid_argument("saturating_delay: load must stay below capacity");
  }
  return base + k / (capacity - load);
}

GeneratorConfig default_generator_config() { return GeneratorConfig{}; }

GeneratorConfig rational_exp_generator_config() {
  GeneratorConfig cfg;
  RationalExpHidden hidden;
  hidden.params.a = {0.02, 0.0004, 0.01};
  hidden.params.b = {0.05, 0.002, 0.03};
  hidden.params.c = 0.1;
  hidden.params.d = 0.08;
  cfg.hidden = hidden;
  cfg.noise_sigma = 0.0;
  return cfg;
}

std::pair<SampleSet, GroundTruth> generate(const GeneratorConfig& config) {
  if (config.n < 1) throw std::invalid_argument("generator: n must be at least 1");
  if (config.noise_sigma < 0.0) throw std::invalid_argument("generator: sigma must be >= 0");
  if (std::abs(config.target_rho) > 1.0) {
    throw std::invalid_argument("generator: |rho| must not exceed 1");
  }
  check_range(config.frame_size, "frame_size");
  check_range(config.arrival_cl, "arrival_cl");
  check_range(config.arrival_all, "arrival_all");
  check_range(config.utilization, "utilization");

  const double frame_div = config.scaling.divisor(columns::kClientFrameSize);
  const double util_div = config.scaling.divisor(columns::kUtilization);
  const double all_div = config.scaling.divisor(columns::kArrivalRateAll);

  if (const auto* hidden = std::get_if<RationalExpHidden>(&config.hidden)) {
    const std::array<double, 3> lo = {config.frame_size.lo / frame_div,
                                      config.utilization.lo / util_div,
                                      config.arrival_all.lo / all_div};
    const std::array<double, 3> hi = {config.frame_size.hi / frame_div,
                                      config.utilization.hi / util_div,
                                      config.arrival_all.hi / all_div};
    check_denominator_over_box(hidden->params, lo, hi);
  } else {
    const auto& h = std::get<SaturatingHidden>(config.hidden);
    if (!(config.utilization.hi / util_div < h.capacity)) {
      throw std::invalid_argument("generator: utilization range must stay below queue capacity");
    }
  }

  Rng rng(config.seed);
  SampleSet data;
  data.provenance = "generator:seed=" + std::to_string(config.seed);
  data.samples.reserve(config.n);

  // Client arrival rate is an affine map of frame size plus Gaussian noise
  // sized to hit the target correlation:
  //   rho^2 = var(signal) / (var(signal) + var(noise)).
  const double frame_span = config.frame_size.hi - config.frame_size.lo;
  const double cl_span = config.arrival_cl.hi - config.arrival_cl.lo;
  const double slope = cl_span / frame_span;
  const double signal_std = slope * frame_span / std::sqrt(12.0);  // uniform std
  const double rho = config.target_rho;
  double noise_std = 0.0;
  if (std::abs(rho) > 0.0 && std::abs(rho) < 1.0) {
    noise_std = signal_std * std::sqrt(1.0 / (rho * rho) - 1.0);
  }

  for (std::size_t i = 0; i < config.n; ++i) {
    TelemetrySample s;
    s.client_frame_size = rng.uniform(config.frame_size.lo, config.frame_size.hi);
    s.utilization = rng.uniform(config.utilization.lo, config.utilization.hi);
    s.arrival_rate_all = rng.uniform(config.arrival_all.lo, config.arrival_all.hi);

    if (std::abs(rho) > 0.0) {
      const double coupled =
          config.arrival_cl.lo + slope * (s.client_frame_size - config.frame_size.lo);
      s.arrival_rate_cl = std::max(0.0, (rho < 0.0 ? config.arrival_cl.hi + config.arrival_cl.lo - coupled
                                                   : coupled) +
                                            noise_std * rng.normal());
    } else {
      s.arrival_rate_cl = rng.uniform(config.arrival_cl.lo, config.arrival_cl.hi);
    }
    data.samples.push_back(s);
  }

  GroundTruth truth;
  truth.noiseless_delay.reserve(config.n);
  if (const auto* hidden = std::get_if<RationalExpHidden>(&config.hidden)) {
    truth.hidden_kind = "rational_exp";
    truth.hidden_params = pack_params(hidden->params);
    for (const auto& s : data.samples) {
      truth.noiseless_delay.push_back(
          predict_rational_exp(hidden->params, rescale_sample(s, config.scaling)));
    }
  } else {
    const auto& h = std::get<SaturatingHidden>(config.hidden);
    truth.hidden_kind = "saturating";
    truth.hidden_params = {h.base,     h.frame_coef,       h.util_coef, h.arrival_coef,
                           h.capacity, h.arrival_exp_rate, h.cross_coef};
    for (const auto& s : data.samples) {
      truth.noiseless_delay.push_back(hidden_delay(h, rescale_sample(s, config.scaling)));
    }
  }

  double mean_delay = 0.0;
  for (double d : truth.noiseless_delay) mean_delay += d;
  mean_delay /= static_cast<double>(config.n);

  const double sigma = config.noise_sigma * mean_delay;
  for (std::size_t i = 0; i < config.n; ++i) {
    double delay = truth.noiseless_delay[i];
    if (sigma > 0.0) delay += sigma * rng.normal();
    data.samples[i].delay = std::max(delay, kDelayFloor);
  }

  for (const auto& s : data.samples) {
    if (!sample_valid(s)) {
      throw std::logic_error("generator produced an invalid sample");
    }
  }
  return {std::move(data), std::move(truth)};
}

}  // namespace latpred
