#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "latpred/models.hpp"

namespace latpred {

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RankDeficientError : FitError {
  using FitError::FitError;
};

enum class ConvergenceReason { kTolerance, kMaxIterations, kRejectedSingular };

std::string convergence_reason_name(ConvergenceReason reason);

struct FitOptions {
  int max_iterations = 200;
  double cost_tolerance = 1e-10;   // stop when the relative SSR decrease falls below this
  double step_tolerance = 1e-12;   // stop when the accepted step is this small
  double initial_damping = 1e-3;
  double damping_increase = 10.0;  // multiplier on rejected steps
  double damping_decrease = 10.0;  // divisor on accepted steps
  std::uint64_t seed = 0;
  int multistart_count = 5;        // canonical init plus (count - 1) perturbed copies

  // Seeds the rational-exp search with the converged rational solution, which
  // guarantees its cost can only improve on the nested family's.
  bool warm_start_rational_exp = true;

  // Diagnostic variant: build the Jacobian by central differences instead of
  // the analytic formulas. Used by tests to cross-check the derivatives.
  bool finite_difference_jacobian = false;

  // MLP training knobs.
  int mlp_epochs = 500;
  int mlp_batch = 32;
  double mlp_learning_rate = 1e-2;
  int mlp_hidden = 16;
};

struct FitReport {
  std::vector<double> params;
  double initial_cost = 0.0;  // SSR at the winning start's initial point
  double final_cost = 0.0;
  int iterations = 0;
  ConvergenceReason reason = ConvergenceReason::kTolerance;
  std::vector<double> start_costs;      // final SSR per start; NaN marks a rejected start
  std::vector<double> accepted_costs;   // SSR after each accepted step of the winning start
};

// Exact least squares via column-pivoted QR. Throws RankDeficientError on a
// rank-deficient design and FitError when rows < parameter count.
LinearParams fit_linear(const FeatureMatrix& m);
PolynomialParams fit_polynomial2(const FeatureMatrix& m);

// Initial parameter vector for the nonlinear families, packed in family order.
std::vector<double> init_guess(ModelFamily family, const FeatureMatrix& m, std::uint64_t seed,
                               const FitOptions& opts = {},
                               const std::string& univariate_feature = columns::kClientFrameSize);

// Damped Gauss-Newton (Levenberg-Marquardt) with seeded multistart for the
// rational, rational-exp, univariate-rational and sigmoid families.
FitReport fit_nonlinear(ModelFamily family, const FeatureMatrix& m, const FitOptions& opts,
                        const std::string& univariate_feature = columns::kClientFrameSize);

// Mini-batch gradient descent on MSE with a fixed step size and a seeded
// shuffle schedule; bit-deterministic given the seed.
MlpParams fit_mlp(const FeatureMatrix& m, const FitOptions& opts);

// Dispatch over all families. The returned model carries default scaling and
// feature metadata; callers that fit from raw data fill those in.
FittedModel fit_family(ModelFamily family, const FeatureMatrix& m, const FitOptions& opts,
                       const std::string& univariate_feature = columns::kClientFrameSize);

double sum_squared_residuals(const FittedModel& model, const FeatureMatrix& m);

}  // namespace latpred
