#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace latpred::cli {

// Shared flags resolved before a subcommand runs. out_dir comes from
// LATPRED_OUT_DIR when set and relative outputs are joined onto it.
struct CommonArgs {
  std::string out_dir;
  bool pretty = false;
};

struct SimulateArgs {
  std::string config_path;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
  std::optional<double> rho;
  std::optional<std::string> hidden;  // "saturating" | "rational_exp"
  std::string out = "telemetry.csv";
  std::string truth_out;  // defaults to <out>.truth.json
};

struct FitArgs {
  std::string data;
  std::string family;
  std::string out = "model.json";
  std::uint64_t seed = 42;
  int multistarts = 5;
  int max_iters = 200;
  double threshold = 0.95;
  std::string univariate_feature;
  std::string split = "all";  // "all" | "holdout"
  double holdout_frac = 0.2;
  int hidden_units = 16;
  int epochs = 500;
  int batch = 32;
  double learning_rate = 1e-2;
};

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string split;  // required: "all" | "holdout"
  double holdout_frac = 0.2;
  std::uint64_t seed = 42;
  std::string out = "evaluation.json";
};

struct CvArgs {
  std::string data;
  std::string family;
  int k = 5;
  std::uint64_t seed = 42;
  int multistarts = 5;
  int max_iters = 200;
  double threshold = 0.95;
  std::string univariate_feature;
  int hidden_units = 16;
  std::string out = "cv.json";
  std::string folds_csv;  // optional per-fold CSV
};

struct BenchArgs {
  std::string model;
  std::string data;
  std::size_t n = 100;
  std::size_t warmup = 20;
  std::string out = "timing.json";
};

struct ResidualsArgs {
  std::string model;
  std::string data;
  std::string feature = "Utilization";
  int bins = 10;
  std::string out = "residuals.json";
  std::string points_out;  // defaults to <out stem>.csv
};

struct DecideArgs {
  std::string topology;
  std::string telemetry;
  std::optional<double> alpha;
  std::optional<double> delta_max;
  std::string out = "decision.json";
};

struct CompareArgs {
  std::string data;
  std::vector<std::string> families;
  std::string split = "holdout";
  double holdout_frac = 0.2;
  std::uint64_t seed = 42;
  bool with_cv = false;
  int k = 5;
  double threshold = 0.95;
  std::string out = "compare.json";
};

int run_simulate(const SimulateArgs& args, const CommonArgs& common);
int run_fit(const FitArgs& args, const CommonArgs& common);
int run_evaluate(const EvaluateArgs& args, const CommonArgs& common);
int run_cv(const CvArgs& args, const CommonArgs& common);
int run_bench(const BenchArgs& args, const CommonArgs& common);
int run_residuals(const ResidualsArgs& args, const CommonArgs& common);
int run_decide(const DecideArgs& args, const CommonArgs& common);
int run_compare(const CompareArgs& args, const CommonArgs& common);

}  // namespace latpred::cli
