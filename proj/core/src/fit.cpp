#include "latpred/fit.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "latpred/rng.hpp"

namespace latpred {
namespace {

constexpr std::uint64_t kTagMultistart = 0x6d73;  // "ms"
constexpr std::uint64_t kTagMlpInit = 0x6d69;     // "mi"
constexpr std::uint64_t kTagMlpShuffle = 0x6d70;  // "mp"

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Eigen::VectorXd solve_qr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() < X.cols()) {
    throw FitError("least squares needs at least as many rows as parameters");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < X.cols()) {
    throw RankDeficientError("design matrix is rank deficient");
  }
  return qr.solve(y);
}

Eigen::MatrixXd design_linear(const FeatureMatrix& m) {
  Eigen::MatrixXd X(m.rows(), 4);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = m.x[i][0];
    X(i, 2) = m.x[i][1];
    X(i, 3) = m.x[i][2];
  }
  return X;
}

Eigen::VectorXd target(const FeatureMatrix& m) {
  return Eigen::Map<const Eigen::VectorXd>(m.y.data(), static_cast<Eigen::Index>(m.y.size()));
}

// Per-family residual model for the LM core: prediction plus the analytic
// gradient of the prediction w.r.t. the packed parameter vector.
struct ResidualModel {
  std::size_t n_params = 0;
  std::function<double(const std::vector<double>&, std::size_t row)> predict;
  std::function<void(const std::vector<double>&, std::size_t row, double* grad)> gradient;
  // Family invariants beyond denominator positivity (which prediction itself
  // enforces on every training row).
  std::function<bool(const std::vector<double>&)> params_valid;
};

ResidualModel make_residual_model(ModelFamily family, const FeatureMatrix& m, int x_index) {
  ResidualModel rm;
  switch (family) {
    case ModelFamily::kRationalExp:
      rm.n_params = 8;
      rm.predict = [&m](const std::vector<double>& p, std::size_t row) {
        return predict_rational_exp(unpack_rational_exp(p), m.x[row], static_cast<long>(row));
      };
      rm.gradient = [&m](const std::vector<double>& p, std::size_t row, double* grad) {
        const auto j = jacobian_rational_exp(unpack_rational_exp(p), m.x[row], static_cast<long>(row));
        std::copy(j.begin(), j.end(), grad);
      };
      rm.params_valid = [](const std::vector<double>&) { return true; };
      break;
    case ModelFamily::kRational:
      rm.n_params = 7;
      rm.predict = [&m](const std::vector<double>& p, std::size_t row) {
        return predict_rational(unpack_rational(p), m.x[row], static_cast<long>(row));
      };
      rm.gradient = [&m](const std::vector<double>& p, std::size_t row, double* grad) {
        const auto j = jacobian_rational(unpack_rational(p), m.x[row], static_cast<long>(row));
        std::copy(j.begin(), j.end(), grad);
      };
      rm.params_valid = [](const std::vector<double>&) { return true; };
      break;
    case ModelFamily::kUnivariateRational:
      rm.n_params = 4;
      rm.predict = [&m, x_index](const std::vector<double>& p, std::size_t row) {
        return predict_univariate_rational(unpack_univariate_rational(p), m.x[row][x_index]);
      };
      rm.gradient = [&m, x_index](const std::vector<double>& p, std::size_t row, double* grad) {
        const auto j = jacobian_univariate_rational(unpack_univariate_rational(p), m.x[row][x_index]);
        std::copy(j.begin(), j.end(), grad);
      };
      rm.params_valid = [](const std::vector<double>&) { return true; };
      break;
    case ModelFamily::kSigmoid:
      rm.n_params = 5;
      rm.predict = [&m](const std::vector<double>& p, std::size_t row) {
        return predict_sigmoid(unpack_sigmoid(p), m.x[row]);
      };
      rm.gradient = [&m](const std::vector<double>& p, std::size_t row, double* grad) {
        const auto j = jacobian_sigmoid(unpack_sigmoid(p), m.x[row]);
        std::copy(j.begin(), j.end(), grad);
      };
      rm.params_valid = [](const std::vector<double>& p) { return p[0] > 0.0; };
      break;
    default:
      throw FitError("fit_nonlinear only handles the rational, rational_exp, "
                     "univariate_rational and sigmoid families");
  }
  return rm;
}

struct LmOutcome {
  std::vector<double> params;
  double initial_cost = kInf;
  double final_cost = kInf;
  int iterations = 0;
  ConvergenceReason reason = ConvergenceReason::kRejectedSingular;
  std::vector<double> accepted_costs;
  bool valid = false;
};

// SSR and, on request, residuals/Jacobian at p. Returns false when any row is
// singular or the cost is non-finite.
bool evaluate_point(const ResidualModel& rm, const FeatureMatrix& m,
                    const std::vector<double>& p, double& cost, Eigen::VectorXd* residuals,
                    Eigen::MatrixXd* jacobian, bool finite_difference) {
  const std::size_t n = m.rows();
  const std::size_t k = rm.n_params;
  cost = 0.0;
  try {
    std::vector<double> grad(k);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = rm.predict(p, i) - m.y[i];
      cost += r * r;
      if (residuals) (*residuals)(static_cast<Eigen::Index>(i)) = r;
      if (jacobian && !finite_difference) {
        rm.gradient(p, i, grad.data());
        for (std::size_t c = 0; c < k; ++c) {
          (*jacobian)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = grad[c];
        }
      }
    }
    if (jacobian && finite_difference) {
      std::vector<double> pl = p, ph = p;
      for (std::size_t c = 0; c < k; ++c) {
        const double h = 1e-6 * std::max(1.0, std::abs(p[c]));
        ph[c] = p[c] + h;
        pl[c] = p[c] - h;
        for (std::size_t i = 0; i < n; ++i) {
          (*jacobian)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
              (rm.predict(ph, i) - rm.predict(pl, i)) / (2.0 * h);
        }
        ph[c] = p[c];
        pl[c] = p[c];
      }
    }
  } catch (const SingularDenominatorError&) {
    cost = kInf;
    return false;
  } catch (const std::domain_error&) {
    cost = kInf;
    return false;
  }
  return std::isfinite(cost);
}

LmOutcome run_levenberg_marquardt(const ResidualModel& rm, const FeatureMatrix& m,
                                  const std::vector<double>& init, const FitOptions& opts) {
  const std::size_t n = m.rows();
  const std::size_t k = rm.n_params;

  LmOutcome out;
  out.params = init;

  Eigen::VectorXd residuals(n);
  Eigen::MatrixXd jacobian(n, k);

  double cost = kInf;
  if (!evaluate_point(rm, m, out.params, cost, &residuals, &jacobian,
                      opts.finite_difference_jacobian)) {
    return out;  // start rejected: singular or non-finite at the initial point
  }
  out.initial_cost = cost;
  out.accepted_costs.push_back(cost);
  out.valid = true;
  out.reason = ConvergenceReason::kMaxIterations;

  double damping = opts.initial_damping;
  constexpr double kMaxDamping = 1e12;

  Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(k));

  int iter = 0;
  while (iter < opts.max_iterations) {
    ++iter;
    if (cost == 0.0) {
      out.reason = ConvergenceReason::kTolerance;
      break;
    }

    Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
    const Eigen::VectorXd gradient = jacobian.transpose() * residuals;
    Eigen::VectorXd scale = normal.diagonal().cwiseMax(1e-12);
    normal.diagonal() += damping * scale;

    const Eigen::VectorXd step = normal.ldlt().solve(-gradient);
    if (!step.allFinite()) {
      damping *= opts.damping_increase;
      if (damping > kMaxDamping) {
        out.reason = ConvergenceReason::kTolerance;
        break;
      }
      continue;
    }

    const Eigen::VectorXd candidate = p + step;
    std::vector<double> cand(candidate.data(), candidate.data() + k);

    double cand_cost = kInf;
    const bool ok = evaluate_point(rm, m, cand, cand_cost, nullptr, nullptr, false);

    if (ok && cand_cost < cost) {
      const double decrease = (cost - cand_cost) / cost;
      p = candidate;
      out.params = cand;
      cost = cand_cost;
      out.accepted_costs.push_back(cost);
      damping = std::max(damping / opts.damping_decrease, 1e-14);

      // Refresh residuals/Jacobian at the accepted point. The FD probe can
      // still cross the denominator floor even when the point itself is fine.
      double unused = 0.0;
      if (!evaluate_point(rm, m, out.params, unused, &residuals, &jacobian,
                          opts.finite_difference_jacobian)) {
        break;
      }

      if (decrease < opts.cost_tolerance ||
          step.norm() < opts.step_tolerance * (p.norm() + opts.step_tolerance)) {
        out.reason = ConvergenceReason::kTolerance;
        break;
      }
    } else {
      damping *= opts.damping_increase;
      if (damping > kMaxDamping) {
        out.reason = ConvergenceReason::kTolerance;
        break;
      }
    }
  }

  out.iterations = iter;
  out.final_cost = cost;

  for (double v : out.params) {
    if (!std::isfinite(v)) out.valid = false;
  }
  if (out.valid) out.valid = rm.params_valid(out.params);
  return out;
}

void check_options(const FitOptions& opts) {
  if (opts.max_iterations < 1) throw FitError("max_iterations must be at least 1");
  if (!(opts.cost_tolerance > 0.0) || !(opts.step_tolerance > 0.0)) {
    throw FitError("tolerances must be positive");
  }
  if (!(opts.initial_damping > 0.0)) throw FitError("initial damping must be positive");
  if (opts.multistart_count < 1) throw FitError("multistart count must be at least 1");
  if (opts.mlp_hidden < 1) throw FitError("MLP hidden width must be at least 1");
  if (opts.mlp_epochs < 0 || opts.mlp_batch < 1) throw FitError("bad MLP training config");
}

int univariate_index(const std::string& feature) {
  if (feature == columns::kClientFrameSize) return 0;
  if (feature == columns::kUtilization) return 1;
  if (feature == columns::kArrivalRateAll) return 2;
  throw std::invalid_argument("univariate feature must be one of the three model features, got: " +
                              feature);
}

}  // namespace

std::string convergence_reason_name(ConvergenceReason reason) {
  switch (reason) {
    case ConvergenceReason::kTolerance: return "tolerance";
    case ConvergenceReason::kMaxIterations: return "max-iter";
    case ConvergenceReason::kRejectedSingular: return "rejected-singular";
  }
  return "unknown";
}

LinearParams fit_linear(const FeatureMatrix& m) {
  const Eigen::VectorXd w = solve_qr(design_linear(m), target(m));
  return {w(0), {w(1), w(2), w(3)}};
}

PolynomialParams fit_polynomial2(const FeatureMatrix& m) {
  Eigen::MatrixXd X(m.rows(), 10);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const auto& x = m.x[i];
    X(i, 0) = 1.0;
    X(i, 1) = x[0];
    X(i, 2) = x[1];
    X(i, 3) = x[2];
    X(i, 4) = x[0] * x[0];
    X(i, 5) = x[1] * x[1];
    X(i, 6) = x[2] * x[2];
    X(i, 7) = x[0] * x[1];
    X(i, 8) = x[0] * x[2];
    X(i, 9) = x[1] * x[2];
  }
  const Eigen::VectorXd w = solve_qr(X, target(m));
  PolynomialParams p;
  for (int i = 0; i < 10; ++i) p.w[i] = w(i);
  return p;
}

std::vector<double> init_guess(ModelFamily family, const FeatureMatrix& m, std::uint64_t seed,
                               const FitOptions& opts, const std::string& univariate_feature) {
  if (m.rows() == 0) throw FitError("init_guess: empty feature matrix");

  switch (family) {
    case ModelFamily::kRational:
    case ModelFamily::kRationalExp: {
      // Numerator weights from the linear fit; the intercept is dropped since
      // the ratio has no constant term. b, c, d start at zero.
      const LinearParams lf = fit_linear(m);
      std::vector<double> p = {lf.w[0], lf.w[1], lf.w[2], 0.0, 0.0, 0.0, 0.0};
      if (family == ModelFamily::kRationalExp) p.push_back(0.0);
      return p;
    }
    case ModelFamily::kUnivariateRational: {
      const int idx = univariate_index(univariate_feature);
      double sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        if (!(m.x[i][idx] > 0.0)) {
          throw FitError("univariate rational fit requires strictly positive feature values");
        }
        sx += m.x[i][idx];
        sy += m.y[i];
      }
      return {sy / sx, 1.0, 0.0, 1.0};
    }
    case ModelFamily::kSigmoid: {
      double ymax = m.y[0];
      for (double v : m.y) ymax = std::max(ymax, v);
      const double amplitude = 1.1 * ymax;
      FeatureMatrix logits = m;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        const double u = std::clamp(m.y[i] / amplitude, 1e-12, 1.0 - 1e-12);
        logits.y[i] = std::clamp(std::log(u / (1.0 - u)), -6.0, 6.0);
      }
      const LinearParams lf = fit_linear(logits);
      return {amplitude, lf.w[0], lf.w[1], lf.w[2], lf.w0};
    }
    case ModelFamily::kMlp: {
      Rng rng(mix_seed(seed, kTagMlpInit));
      MlpParams p;
      p.hidden = opts.mlp_hidden;
      const double in_scale = 1.0 / std::sqrt(3.0);
      const double out_scale = 1.0 / std::sqrt(static_cast<double>(p.hidden));
      p.w_in.resize(3 * p.hidden);
      for (auto& w : p.w_in) w = in_scale * rng.normal();
      p.b_in.assign(p.hidden, 0.0);
      p.w_out.resize(p.hidden);
      for (auto& w : p.w_out) w = out_scale * rng.normal();
      p.b_out = 0.0;
      return pack_params(p);
    }
    default:
      throw FitError("init_guess: family has a closed-form fit");
  }
}

FitReport fit_nonlinear(ModelFamily family, const FeatureMatrix& m, const FitOptions& opts,
                        const std::string& univariate_feature) {
  check_options(opts);
  const int x_index = family == ModelFamily::kUnivariateRational
                          ? univariate_index(univariate_feature)
                          : 0;
  const ResidualModel rm = make_residual_model(family, m, x_index);
  if (m.rows() <= rm.n_params) {
    throw FitError("fit_nonlinear needs more rows than parameters");
  }

  const std::vector<double> canonical = init_guess(family, m, opts.seed, opts, univariate_feature);

  std::vector<std::vector<double>> starts;
  starts.push_back(canonical);
  Rng rng(mix_seed(opts.seed, kTagMultistart));
  for (int s = 1; s < opts.multistart_count; ++s) {
    std::vector<double> p = canonical;
    for (auto& v : p) v *= 1.0 + 0.1 * rng.normal();
    starts.push_back(std::move(p));
  }

  if (family == ModelFamily::kRationalExp && opts.warm_start_rational_exp) {
    try {
      FitReport nested = fit_nonlinear(ModelFamily::kRational, m, opts, univariate_feature);
      nested.params.push_back(0.0);  // d = 0 embeds the rational optimum
      starts.push_back(std::move(nested.params));
    } catch (const FitError&) {
      // The nested fit failing only removes the warm start.
    }
  }

  std::vector<LmOutcome> outcomes;
  outcomes.reserve(starts.size());
  for (const auto& start : starts) {
    outcomes.push_back(run_levenberg_marquardt(rm, m, start, opts));
  }

  int best = -1;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (!outcomes[i].valid) continue;
    if (best < 0 || outcomes[i].final_cost < outcomes[best].final_cost) {
      best = static_cast<int>(i);
    }
  }
  if (best < 0) {
    throw FitError("fit_nonlinear: all starts rejected (singular denominators)");
  }

  FitReport report;
  report.params = outcomes[best].params;
  report.initial_cost = outcomes[best].initial_cost;
  report.final_cost = outcomes[best].final_cost;
  report.iterations = outcomes[best].iterations;
  report.reason = outcomes[best].reason;
  report.accepted_costs = outcomes[best].accepted_costs;
  for (const auto& o : outcomes) {
    report.start_costs.push_back(o.valid ? o.final_cost : kNaN);
  }
  return report;
}

MlpParams fit_mlp(const FeatureMatrix& m, const FitOptions& opts) {
  check_options(opts);
  const std::size_t n = m.rows();
  const std::size_t batch = static_cast<std::size_t>(opts.mlp_batch);
  if (n < batch) throw FitError("fit_mlp needs at least one full batch of rows");

  MlpParams p = unpack_mlp(init_guess(ModelFamily::kMlp, m, opts.seed, opts), opts.mlp_hidden);
  const int hidden = p.hidden;

  auto mse = [&]() {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = mlp_forward(p, m.x[i]) - m.y[i];
      acc += r * r;
    }
    return acc / static_cast<double>(n);
  };

  const double initial = mse();
  const double divergence_limit = 1e6 * std::max(initial, 1e-300);

  Rng rng(mix_seed(opts.seed, kTagMlpShuffle));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<double> g_win(3 * hidden), g_bin(hidden), g_wout(hidden), tanh_z(hidden);

  for (int epoch = 0; epoch < opts.mlp_epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(begin + batch, n);
      const double inv = 1.0 / static_cast<double>(end - begin);

      std::fill(g_win.begin(), g_win.end(), 0.0);
      std::fill(g_bin.begin(), g_bin.end(), 0.0);
      std::fill(g_wout.begin(), g_wout.end(), 0.0);
      double g_bout = 0.0;

      for (std::size_t bi = begin; bi < end; ++bi) {
        const auto& x = m.x[order[bi]];
        double pred = p.b_out;
        for (int h = 0; h < hidden; ++h) {
          const double z = p.w_in[3 * h] * x[0] + p.w_in[3 * h + 1] * x[1] +
                           p.w_in[3 * h + 2] * x[2] + p.b_in[h];
          tanh_z[h] = std::tanh(z);
          pred += p.w_out[h] * tanh_z[h];
        }
        const double upstream = 2.0 * (pred - m.y[order[bi]]) * inv;
        g_bout += upstream;
        for (int h = 0; h < hidden; ++h) {
          g_wout[h] += upstream * tanh_z[h];
          const double dz = upstream * p.w_out[h] * (1.0 - tanh_z[h] * tanh_z[h]);
          g_bin[h] += dz;
          g_win[3 * h] += dz * x[0];
          g_win[3 * h + 1] += dz * x[1];
          g_win[3 * h + 2] += dz * x[2];
        }
      }

      const double lr = opts.mlp_learning_rate;
      for (int i = 0; i < 3 * hidden; ++i) p.w_in[i] -= lr * g_win[i];
      for (int h = 0; h < hidden; ++h) {
        p.b_in[h] -= lr * g_bin[h];
        p.w_out[h] -= lr * g_wout[h];
      }
      p.b_out -= lr * g_bout;
    }

    const double cost = mse();
    if (!(cost <= divergence_limit) || !std::isfinite(cost)) {
      throw FitError("fit_mlp diverged at epoch " + std::to_string(epoch + 1));
    }
  }
  return p;
}

FittedModel fit_family(ModelFamily family, const FeatureMatrix& m, const FitOptions& opts,
                       const std::string& univariate_feature) {
  FittedModel model;
  model.family = family;
  model.features = m.features;
  model.metadata.seed = opts.seed;

  switch (family) {
    case ModelFamily::kLinear:
      model.params = pack_params(fit_linear(m));
      break;
    case ModelFamily::kPolynomial2:
      model.params = pack_params(fit_polynomial2(m));
      break;
    case ModelFamily::kMlp:
      model.hidden = opts.mlp_hidden;
      model.params = pack_params(fit_mlp(m, opts));
      break;
    case ModelFamily::kUnivariateRational:
      model.univariate_feature = univariate_feature;
      [[fallthrough]];
    default: {
      const FitReport report = fit_nonlinear(family, m, opts, univariate_feature);
      model.params = report.params;
      model.metadata.initial_cost = report.initial_cost;
      model.metadata.final_cost = report.final_cost;
      model.metadata.iterations = report.iterations;
      model.metadata.convergence_reason = convergence_reason_name(report.reason);
      model.metadata.start_costs = report.start_costs;
      break;
    }
  }
  return model;
}

double sum_squared_residuals(const FittedModel& model, const FeatureMatrix& m) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double r = model.predict(m.x[i], static_cast<long>(i)) - m.y[i];
    acc += r * r;
  }
  return acc;
}

}  // namespace latpred
