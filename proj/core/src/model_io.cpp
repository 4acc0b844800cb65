#include "latpred/model_io.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "latpred/digest.hpp"

namespace latpred {
namespace {

using json = nlohmann::json;

json optional_number(const std::optional<double>& v) {
  if (v) return *v;
  return nullptr;
}

json scaling_to_json(const ScalingSpec& scaling) {
  json j = json::object();
  for (const auto& [name, divisor] : scaling.divisors) j[name] = divisor;
  return j;
}

ScalingSpec scaling_from_json(const json& j) {
  ScalingSpec s;
  for (auto it = j.begin(); it != j.end(); ++it) {
    s.divisors[it.key()] = it.value().get<double>();
  }
  return s;
}

json metric_stats_to_json(const MetricStats& s) {
  return json{{"mean", s.mean}, {"std", s.stddev}, {"folds_used", s.count}};
}

json eval_to_json(const EvalReport& r) {
  return json{{"mae", r.mae}, {"mse", r.mse}, {"r2", optional_number(r.r2)}, {"n", r.n}};
}

json range_to_json(const FeatureRange& r) { return json{{"lo", r.lo}, {"hi", r.hi}}; }

FeatureRange range_from_json(const json& j) {
  return {j.at("lo").get<double>(), j.at("hi").get<double>()};
}

}  // namespace

std::string digest_hex(std::string_view bytes) {
  const std::uint64_t h = fnv1a64(bytes);
  std::array<char, 17> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + 16, h, 16);
  (void)ec;
  std::string hex(buf.data(), ptr);
  return "fnv1a64:" + std::string(16 - hex.size(), '0') + hex;
}

std::string digest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for digest: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return digest_hex(ss.str());
}

std::string digest_matrix(const FeatureMatrix& m) {
  std::string bytes;
  bytes.reserve(m.rows() * 4 * sizeof(double));
  auto append = [&bytes](double v) {
    bytes.append(reinterpret_cast<const char*>(&v), sizeof(double));
  };
  for (std::size_t i = 0; i < m.rows(); ++i) {
    append(m.x[i][0]);
    append(m.x[i][1]);
    append(m.x[i][2]);
    append(m.y[i]);
  }
  return digest_hex(bytes);
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string model_to_json(const FittedModel& model) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["family"] = family_name(model.family);
  j["params"] = model.params;
  if (model.family == ModelFamily::kMlp) j["hidden_units"] = model.hidden;
  if (model.family == ModelFamily::kUnivariateRational) j["feature"] = model.univariate_feature;
  j["scaling"] = scaling_to_json(model.scaling);
  j["features"] = model.features;

  json meta;
  meta["created_utc"] = model.metadata.created_utc;
  meta["seed"] = model.metadata.seed;
  meta["training_digest"] = model.metadata.training_digest;
  meta["split"] = model.metadata.split;
  if (!model.metadata.convergence_reason.empty()) {
    meta["fit"] = json{{"initial_cost", model.metadata.initial_cost},
                       {"final_cost", model.metadata.final_cost},
                       {"iterations", model.metadata.iterations},
                       {"reason", model.metadata.convergence_reason},
                       {"start_costs", model.metadata.start_costs}};
  }
  j["metadata"] = meta;
  return j.dump(2) + "\n";
}

FittedModel model_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (!j.contains("format_version")) {
    throw std::runtime_error("model file is missing the format_version field");
  }
  if (j.at("format_version").get<int>() != kModelFormatVersion) {
    throw std::runtime_error("unsupported model format_version");
  }

  FittedModel model;
  model.family = family_from_name(j.at("family").get<std::string>());
  model.params = j.at("params").get<std::vector<double>>();
  if (model.family == ModelFamily::kMlp) model.hidden = j.at("hidden_units").get<int>();
  if (model.family == ModelFamily::kUnivariateRational) {
    model.univariate_feature = j.at("feature").get<std::string>();
  }
  model.scaling = scaling_from_json(j.at("scaling"));
  model.features = j.at("features").get<std::vector<std::string>>();

  const std::size_t expected = family_param_count(model.family, model.hidden);
  if (model.params.size() != expected) {
    throw std::runtime_error("model parameter count does not match family");
  }

  if (j.contains("metadata")) {
    const json& meta = j.at("metadata");
    model.metadata.created_utc = meta.value("created_utc", "");
    model.metadata.seed = meta.value("seed", std::uint64_t{0});
    model.metadata.training_digest = meta.value("training_digest", "");
    model.metadata.split = meta.value("split", "all");
    if (meta.contains("fit")) {
      const json& fit = meta.at("fit");
      model.metadata.initial_cost = fit.value("initial_cost", 0.0);
      model.metadata.final_cost = fit.value("final_cost", 0.0);
      model.metadata.iterations = fit.value("iterations", 0);
      model.metadata.convergence_reason = fit.value("reason", "");
      if (fit.contains("start_costs")) {
        for (const auto& v : fit.at("start_costs")) {
          model.metadata.start_costs.push_back(v.is_null() ? std::nan("") : v.get<double>());
        }
      }
    }
  }
  return model;
}

void save_model(const std::string& path, const FittedModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file: " + path);
  out << model_to_json(model);
}

FittedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

std::string eval_report_to_json(const EvalReport& report, const std::string& model_path,
                                const std::string& data_path, const std::string& split) {
  json j = eval_to_json(report);
  j["model"] = model_path;
  j["data"] = data_path;
  j["split"] = split;
  return j.dump(2) + "\n";
}

std::string cv_report_to_json(const CVReport& report, ModelFamily family) {
  json folds = json::array();
  for (const auto& fold : report.folds) {
    if (fold.ok) {
      json f = eval_to_json(fold.report);
      f["ok"] = true;
      folds.push_back(f);
    } else {
      folds.push_back(json{{"ok", false}, {"error", fold.error}});
    }
  }
  json j{{"family", family_name(family)},
         {"k", report.k},
         {"seed", report.seed},
         {"folds", folds},
         {"aggregate",
          json{{"mae", metric_stats_to_json(report.mae)},
               {"mse", metric_stats_to_json(report.mse)},
               {"r2", metric_stats_to_json(report.r2)}}},
         {"all_folds_ok", report.all_folds_ok}};
  return j.dump(2) + "\n";
}

std::string timing_report_to_json(const TimingReport& report, ModelFamily family) {
  json j{{"family", family_name(family)}, {"avg_ms", report.avg_ms}, {"min_ms", report.min_ms},
         {"max_ms", report.max_ms},       {"n", report.n},           {"warmup", report.warmup}};
  return j.dump(2) + "\n";
}

std::string residual_profile_to_json(const ResidualProfile& profile) {
  json bins = json::array();
  for (const auto& b : profile.bins) {
    bins.push_back(json{{"lo", b.lo}, {"hi", b.hi}, {"mean", b.mean}, {"std", b.stddev},
                        {"count", b.count}});
  }
  json j{{"feature", profile.feature}, {"n", profile.n}, {"bins", bins},
         {"degenerate", profile.degenerate}, {"note", profile.note}};
  return j.dump(2) + "\n";
}

std::string decision_to_json(const Decision& decision) {
  json table = json::array();
  for (const auto& e : decision.table) {
    table.push_back(json{{"id", e.id}, {"total_delay", e.total_delay}, {"score", e.score}});
  }
  json j{{"selected", decision.selected_id},
         {"total_delay", decision.total_delay},
         {"score", optional_number(decision.score)},
         {"fallback", decision.fallback},
         {"scores", table}};
  return j.dump(2) + "\n";
}

std::string generator_config_to_json(const GeneratorConfig& config) {
  json hidden;
  if (const auto* h = std::get_if<SaturatingHidden>(&config.hidden)) {
    hidden = json{{"kind", "saturating"},
                  {"base", h->base},
                  {"frame_coef", h->frame_coef},
                  {"util_coef", h->util_coef},
                  {"arrival_coef", h->arrival_coef},
                  {"capacity", h->capacity},
                  {"arrival_exp_rate", h->arrival_exp_rate},
                  {"cross_coef", h->cross_coef}};
  } else {
    const auto& r = std::get<RationalExpHidden>(config.hidden);
    hidden = json{{"kind", "rational_exp"}, {"params", pack_params(r.params)}};
  }
  json j{{"n", config.n},
         {"seed", config.seed},
         {"frame_size", range_to_json(config.frame_size)},
         {"arrival_cl", range_to_json(config.arrival_cl)},
         {"arrival_all", range_to_json(config.arrival_all)},
         {"utilization", range_to_json(config.utilization)},
         {"hidden", hidden},
         {"noise_sigma", config.noise_sigma},
         {"target_rho", config.target_rho},
         {"scaling", scaling_to_json(config.scaling)}};
  return j.dump(2) + "\n";
}

GeneratorConfig generator_config_from_json(const std::string& text) {
  const json j = json::parse(text);
  GeneratorConfig cfg;
  cfg.n = j.value("n", cfg.n);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("frame_size")) cfg.frame_size = range_from_json(j.at("frame_size"));
  if (j.contains("arrival_cl")) cfg.arrival_cl = range_from_json(j.at("arrival_cl"));
  if (j.contains("arrival_all")) cfg.arrival_all = range_from_json(j.at("arrival_all"));
  if (j.contains("utilization")) cfg.utilization = range_from_json(j.at("utilization"));
  cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
  cfg.target_rho = j.value("target_rho", cfg.target_rho);
  if (j.contains("scaling")) cfg.scaling = scaling_from_json(j.at("scaling"));
  if (j.contains("hidden")) {
    const json& h = j.at("hidden");
    const std::string kind = h.at("kind").get<std::string>();
    if (kind == "saturating") {
      SaturatingHidden s;
      s.base = h.value("base", s.base);
      s.frame_coef = h.value("frame_coef", s.frame_coef);
      s.util_coef = h.value("util_coef", s.util_coef);
      s.arrival_coef = h.value("arrival_coef", s.arrival_coef);
      s.capacity = h.value("capacity", s.capacity);
      s.arrival_exp_rate = h.value("arrival_exp_rate", s.arrival_exp_rate);
      s.cross_coef = h.value("cross_coef", s.cross_coef);
      cfg.hidden = s;
    } else if (kind == "rational_exp") {
      RationalExpHidden r;
      r.params = unpack_rational_exp(h.at("params").get<std::vector<double>>());
      cfg.hidden = r;
    } else {
      throw std::runtime_error("unknown hidden model kind: " + kind);
    }
  }
  return cfg;
}

std::string ground_truth_to_json(const GroundTruth& truth, const GeneratorConfig& config) {
  json j{{"hidden_kind", truth.hidden_kind},
         {"hidden_params", truth.hidden_params},
         {"noiseless_delay", truth.noiseless_delay},
         {"config", json::parse(generator_config_to_json(config))}};
  return j.dump(2) + "\n";
}

}  // namespace latpred
