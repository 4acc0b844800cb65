#pragma once

#include <string>
#include <utility>

#include "latpred/evaluation.hpp"
#include "latpred/models.hpp"
#include "latpred/offload.hpp"
#include "latpred/simulate.hpp"

namespace latpred {

// Model files are self-describing JSON documents with a mandatory version
// field; see README for the schema and per-family parameter order.
inline constexpr int kModelFormatVersion = 1;

std::string model_to_json(const FittedModel& model);
FittedModel model_from_json(const std::string& text);

void save_model(const std::string& path, const FittedModel& model);
FittedModel load_model(const std::string& path);

// Report documents emitted by the CLI. All are deterministic renderings of
// their inputs (sorted keys, shortest round-trip numbers).
std::string eval_report_to_json(const EvalReport& report, const std::string& model_path,
                                const std::string& data_path, const std::string& split);
std::string cv_report_to_json(const CVReport& report, ModelFamily family);
std::string timing_report_to_json(const TimingReport& report, ModelFamily family);
std::string residual_profile_to_json(const ResidualProfile& profile);
std::string decision_to_json(const Decision& decision);
std::string ground_truth_to_json(const GroundTruth& truth, const GeneratorConfig& config);

std::string generator_config_to_json(const GeneratorConfig& config);
GeneratorConfig generator_config_from_json(const std::string& text);

// Canonical fingerprint of a feature matrix, independent of the data source.
std::string digest_matrix(const FeatureMatrix& m);

std::string utc_timestamp();

}  // namespace latpred
