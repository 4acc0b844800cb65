#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "latpred/features.hpp"

namespace latpred {

// Fitted denominators must stay above this floor over the training hull;
// violating fits are rejected and violating predictions throw.
inline constexpr double kDenominatorFloor = 1e-6;

struct SingularDenominatorError : std::runtime_error {
  explicit SingularDenominatorError(long row_index)
      : std::runtime_error(row_index >= 0
                               ? "rational denominator below floor at row " + std::to_string(row_index)
                               : std::string("rational denominator below floor")),
        row(row_index) {}
  long row;
};

// y = ((a1 x1 + a2 x2 + a3 x3) / (1 + b1 x1 + b2 x2 + b3 x3 + c)) * exp(d x3)
struct RationalExpParams {
  std::array<double, 3> a{};
  std::array<double, 3> b{};
  double c = 0.0;
  double d = 0.0;
};

// Same ratio with the exponential rate frozen at zero.
struct RationalParams {
  std::array<double, 3> a{};
  std::array<double, 3> b{};
  double c = 0.0;
};

// y = a1 X^a2 / (1 + a3 X^a4) over a single positive feature X.
struct UnivariateRationalParams {
  double a1 = 0.0, a2 = 1.0, a3 = 0.0, a4 = 1.0;
};

// Full second-order polynomial over (x1, x2, x3). Coefficient order:
// intercept, x1, x2, x3, x1^2, x2^2, x3^2, x1*x2, x1*x3, x2*x3.
struct PolynomialParams {
  std::array<double, 10> w{};
};

struct LinearParams {
  double w0 = 0.0;
  std::array<double, 3> w{};
};

// y = L / (1 + exp(-(w.x + bias)))
struct SigmoidParams {
  double amplitude = 1.0;
  std::array<double, 3> w{};
  double bias = 0.0;
};

// Single hidden layer, tanh activation: y = w_out . tanh(W x + b) + b_out.
struct MlpParams {
  int hidden = 16;
  std::vector<double> w_in;   // hidden x 3, row-major
  std::vector<double> b_in;   // hidden
  std::vector<double> w_out;  // hidden
  double b_out = 0.0;
};

using Features = std::array<double, 3>;

double predict_rational_exp(const RationalExpParams& p, const Features& x, long row = -1);
double predict_rational(const RationalParams& p, const Features& x, long row = -1);
double predict_univariate_rational(const UnivariateRationalParams& p, double X);
double predict_polynomial2(const PolynomialParams& p, const Features& x);
double predict_linear(const LinearParams& p, const Features& x);
double predict_sigmoid(const SigmoidParams& p, const Features& x);
double mlp_forward(const MlpParams& p, const Features& x);

// Partials in parameter order (a1,a2,a3,b1,b2,b3,c,d).
std::array<double, 8> jacobian_rational_exp(const RationalExpParams& p, const Features& x,
                                            long row = -1);
// Partials in order (a1,a2,a3,b1,b2,b3,c).
std::array<double, 7> jacobian_rational(const RationalParams& p, const Features& x, long row = -1);
// Partials in order (a1,a2,a3,a4).
std::array<double, 4> jacobian_univariate_rational(const UnivariateRationalParams& p, double X);
// Partials in order (L,w1,w2,w3,bias).
std::array<double, 5> jacobian_sigmoid(const SigmoidParams& p, const Features& x);

enum class ModelFamily {
  kRationalExp,
  kRational,
  kUnivariateRational,
  kPolynomial2,
  kLinear,
  kSigmoid,
  kMlp,
};

std::string family_name(ModelFamily family);
ModelFamily family_from_name(const std::string& name);
std::size_t family_param_count(ModelFamily family, int hidden = 16);

// Flat-vector packing used by the fitter and the model file. Orders match the
// jacobian orders above; the polynomial/linear orders match their structs.
std::vector<double> pack_params(const RationalExpParams& p);
std::vector<double> pack_params(const RationalParams& p);
std::vector<double> pack_params(const UnivariateRationalParams& p);
std::vector<double> pack_params(const PolynomialParams& p);
std::vector<double> pack_params(const LinearParams& p);
std::vector<double> pack_params(const SigmoidParams& p);
std::vector<double> pack_params(const MlpParams& p);

RationalExpParams unpack_rational_exp(const std::vector<double>& v);
RationalParams unpack_rational(const std::vector<double>& v);
UnivariateRationalParams unpack_univariate_rational(const std::vector<double>& v);
PolynomialParams unpack_polynomial2(const std::vector<double>& v);
LinearParams unpack_linear(const std::vector<double>& v);
SigmoidParams unpack_sigmoid(const std::vector<double>& v);
MlpParams unpack_mlp(const std::vector<double>& v, int hidden);

struct FitMetadata {
  std::string created_utc;
  std::uint64_t seed = 0;
  std::string training_digest;
  std::string split = "all";
  // Optimizer diagnostics, copied from the FitReport when one exists.
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  std::string convergence_reason;
  std::vector<double> start_costs;
};

// A model plus everything needed to reproduce its predictions from raw
// telemetry: family, flat parameters, the scaling applied at fit time and the
// retained-feature list.
struct FittedModel {
  ModelFamily family = ModelFamily::kLinear;
  std::vector<double> params;
  int hidden = 16;                                   // MLP only
  std::string univariate_feature = columns::kClientFrameSize;  // univariate family only
  ScalingSpec scaling = ScalingSpec::defaults();
  std::vector<std::string> features;
  FitMetadata metadata;

  // Prediction over already-rescaled (x1, x2, x3).
  double predict(const Features& x, long row = -1) const;
  // Applies the stored scaling first. Not clamped; see offload::predict_segment.
  double predict_sample(const TelemetrySample& s) const;
};

}  // namespace latpred
