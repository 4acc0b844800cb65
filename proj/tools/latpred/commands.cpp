#include "latpred/commands.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "latpred/csv.hpp"
#include "latpred/digest.hpp"
#include "latpred/evaluation.hpp"
#include "latpred/features.hpp"
#include "latpred/fit.hpp"
#include "latpred/model_io.hpp"
#include "latpred/offload.hpp"
#include "latpred/rng.hpp"
#include "latpred/simulate.hpp"

namespace latpred::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// Seed tag shared by `fit --split holdout` and `evaluate --split holdout` so
// both sides reconstruct the same partition.
constexpr std::uint64_t kTagSplit = 0x73706c74;

std::string resolve_out(const std::string& path, const CommonArgs& common) {
  if (common.out_dir.empty() || fs::path(path).is_absolute()) return path;
  fs::create_directories(common.out_dir);
  return (fs::path(common.out_dir) / path).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// One manifest per run, written next to the primary output. Timing fields
// live here and only here, so report bodies stay byte-reproducible.
class ManifestWriter {
 public:
  ManifestWriter(std::string subcommand, std::string primary_output)
      : subcommand_(std::move(subcommand)),
        primary_output_(std::move(primary_output)),
        start_(std::chrono::steady_clock::now()) {}

  void set_config(json config) { config_ = std::move(config); }
  void add_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }
  void add_input(const std::string& path) { inputs_.push_back(path); }
  void add_output(const std::string& path) { outputs_.push_back(path); }

  void write() const {
    json j;
    j["subcommand"] = subcommand_;
    j["config"] = config_;
    j["seeds"] = seeds_;
    json inputs = json::array();
    for (const auto& p : inputs_) inputs.push_back(json{{"path", p}, {"digest", digest_file(p)}});
    json outputs = json::array();
    for (const auto& p : outputs_) outputs.push_back(json{{"path", p}, {"digest", digest_file(p)}});
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["created_utc"] = utc_timestamp();
    j["duration_ms"] = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start_).count();
    write_text(primary_output_ + ".manifest.json", j.dump(2) + "\n");
  }

 private:
  std::string subcommand_;
  std::string primary_output_;
  std::chrono::steady_clock::time_point start_;
  json config_;
  json seeds_ = json::object();
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

SampleSet load_samples(const std::string& path) {
  LoadReport report = load_csv(path);
  if (!report.rejected.empty()) {
    std::cerr << "warning: skipped " << report.rejected.size() << " invalid row(s) in " << path
              << " (rows:";
    for (const auto& r : report.rejected) std::cerr << ' ' << r.row;
    std::cerr << ")\n";
  }
  return std::move(report.data);
}

// Deterministic holdout partition over sample rows.
std::pair<SampleSet, SampleSet> holdout_split(const SampleSet& data, double frac,
                                              std::uint64_t seed) {
  if (!(frac > 0.0) || !(frac < 1.0)) {
    throw std::invalid_argument("holdout fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, kTagSplit));
  rng.shuffle(order);

  const std::size_t eval_count = std::max<std::size_t>(1, static_cast<std::size_t>(
                                     static_cast<double>(data.size()) * frac));
  SampleSet train, eval;
  train.provenance = data.provenance + "#train";
  eval.provenance = data.provenance + "#holdout";
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto& dst = (i < order.size() - eval_count) ? train : eval;
    dst.samples.push_back(data.samples[order[i]]);
  }
  return {std::move(train), std::move(eval)};
}

FitOptions options_from(std::uint64_t seed, int multistarts, int max_iters, int hidden_units,
                        int epochs = 500, int batch = 32, double learning_rate = 1e-2) {
  FitOptions opts;
  opts.seed = seed;
  opts.multistart_count = multistarts;
  opts.max_iterations = max_iters;
  opts.mlp_hidden = hidden_units;
  opts.mlp_epochs = epochs;
  opts.mlp_batch = batch;
  opts.mlp_learning_rate = learning_rate;
  return opts;
}

void print_eval_pretty(const std::string& label, const EvalReport& rep) {
  std::printf("%-22s mae=%.6g  mse=%.6g  r2=", label.c_str(), rep.mae, rep.mse);
  if (rep.r2) {
    std::printf("%.6g", *rep.r2);
  } else {
    std::printf("undefined");
  }
  std::printf("  n=%zu\n", rep.n);
}

}  // namespace

int run_simulate(const SimulateArgs& args, const CommonArgs& common) {
  GeneratorConfig cfg = default_generator_config();
  if (!args.config_path.empty()) {
    cfg = generator_config_from_json(read_text(args.config_path));
  }
  if (args.n) cfg.n = *args.n;
  if (args.seed) cfg.seed = *args.seed;
  if (args.sigma) cfg.noise_sigma = *args.sigma;
  if (args.rho) cfg.target_rho = *args.rho;
  if (args.hidden) {
    if (*args.hidden == "saturating") {
      if (!std::holds_alternative<SaturatingHidden>(cfg.hidden)) cfg.hidden = SaturatingHidden{};
    } else if (*args.hidden == "rational_exp") {
      if (!std::holds_alternative<RationalExpHidden>(cfg.hidden)) {
        cfg.hidden = std::get<RationalExpHidden>(rational_exp_generator_config().hidden);
      }
    } else {
      throw std::invalid_argument("unknown hidden model: " + *args.hidden);
    }
  }

  const std::string out = resolve_out(args.out, common);
  const std::string truth_out =
      resolve_out(args.truth_out.empty() ? args.out + ".truth.json" : args.truth_out, common);

  ManifestWriter manifest("simulate", out);
  if (!args.config_path.empty()) manifest.add_input(args.config_path);
  manifest.set_config(json::parse(generator_config_to_json(cfg)));
  manifest.add_seed("generator", cfg.seed);

  auto [data, truth] = generate(cfg);
  save_csv(out, data);
  write_text(truth_out, ground_truth_to_json(truth, cfg));

  manifest.add_output(out);
  manifest.add_output(truth_out);
  manifest.write();

  std::cout << "wrote " << data.size() << " samples to " << out << "\n";
  return 0;
}

int run_fit(const FitArgs& args, const CommonArgs& common) {
  const ModelFamily family = family_from_name(args.family);
  const std::string out = resolve_out(args.out, common);

  ManifestWriter manifest("fit", out);
  manifest.add_input(args.data);
  manifest.set_config(json{{"data", args.data},
                           {"family", args.family},
                           {"seed", args.seed},
                           {"multistarts", args.multistarts},
                           {"max_iters", args.max_iters},
                           {"threshold", args.threshold},
                           {"split", args.split},
                           {"holdout_frac", args.holdout_frac}});
  manifest.add_seed("fit", args.seed);

  SampleSet data = load_samples(args.data);
  const std::vector<std::string> retained = select_features(data, args.threshold);

  std::string split_label = "all";
  if (args.split == "holdout") {
    auto [train, eval] = holdout_split(data, args.holdout_frac, args.seed);
    data = std::move(train);
    std::ostringstream label;
    label << "holdout:" << args.holdout_frac;
    split_label = label.str();
  } else if (args.split != "all") {
    throw std::invalid_argument("--split must be 'all' or 'holdout'");
  }

  const ScalingSpec scaling = ScalingSpec::defaults();
  const FeatureMatrix m = to_feature_matrix(data, retained, scaling);

  const FitOptions opts = options_from(args.seed, args.multistarts, args.max_iters,
                                       args.hidden_units, args.epochs, args.batch,
                                       args.learning_rate);
  const std::string uni_feature =
      args.univariate_feature.empty() ? columns::kClientFrameSize : args.univariate_feature;

  FittedModel model = fit_family(family, m, opts, uni_feature);
  model.scaling = scaling;
  model.features = retained;
  model.metadata.created_utc = utc_timestamp();
  model.metadata.seed = args.seed;
  model.metadata.training_digest = digest_matrix(m);
  model.metadata.split = split_label;

  save_model(out, model);
  manifest.add_output(out);
  manifest.write();

  std::cout << "fitted " << args.family << " on " << m.rows() << " rows -> " << out << "\n";
  if (!model.metadata.convergence_reason.empty()) {
    std::cout << "  final SSR " << model.metadata.final_cost << " after "
              << model.metadata.iterations << " iterations (" << model.metadata.convergence_reason
              << ")\n";
  }
  return 0;
}

int run_evaluate(const EvaluateArgs& args, const CommonArgs& common) {
  if (args.split != "all" && args.split != "holdout") {
    throw std::invalid_argument("--split must be 'all' or 'holdout'");
  }
  const std::string out = resolve_out(args.out, common);

  ManifestWriter manifest("evaluate", out);
  manifest.add_input(args.model);
  manifest.add_input(args.data);
  manifest.set_config(json{{"model", args.model},
                           {"data", args.data},
                           {"split", args.split},
                           {"holdout_frac", args.holdout_frac},
                           {"seed", args.seed}});
  manifest.add_seed("split", args.seed);

  const FittedModel model = load_model(args.model);
  SampleSet data = load_samples(args.data);

  std::string split_label = "all";
  if (args.split == "holdout") {
    auto [train, eval] = holdout_split(data, args.holdout_frac, args.seed);
    data = std::move(eval);
    std::ostringstream label;
    label << "holdout:" << args.holdout_frac;
    split_label = label.str();
  }

  std::vector<double> y, y_hat;
  y.reserve(data.size());
  y_hat.reserve(data.size());
  for (const auto& s : data.samples) {
    y.push_back(s.delay);
    y_hat.push_back(model.predict_sample(s));
  }
  const EvalReport report = metrics(y, y_hat);

  write_text(out, eval_report_to_json(report, args.model, args.data, split_label));
  manifest.add_output(out);
  manifest.write();

  if (common.pretty) print_eval_pretty(family_name(model.family), report);
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_cv(const CvArgs& args, const CommonArgs& common) {
  const ModelFamily family = family_from_name(args.family);
  const std::string out = resolve_out(args.out, common);

  ManifestWriter manifest("cv", out);
  manifest.add_input(args.data);
  manifest.set_config(json{{"data", args.data},
                           {"family", args.family},
                           {"k", args.k},
                           {"seed", args.seed},
                           {"multistarts", args.multistarts},
                           {"max_iters", args.max_iters},
                           {"threshold", args.threshold}});
  manifest.add_seed("cv", args.seed);

  const SampleSet data = load_samples(args.data);
  const auto retained = select_features(data, args.threshold);
  const FeatureMatrix m = to_feature_matrix(data, retained, ScalingSpec::defaults());

  const FitOptions opts = options_from(args.seed, args.multistarts, args.max_iters,
                                       args.hidden_units);
  const std::string uni_feature =
      args.univariate_feature.empty() ? columns::kClientFrameSize : args.univariate_feature;

  const CVReport report = kfold_cv(m, family, args.k, args.seed, opts, uni_feature);
  write_text(out, cv_report_to_json(report, family));
  manifest.add_output(out);

  if (!args.folds_csv.empty()) {
    const std::string folds_path = resolve_out(args.folds_csv, common);
    std::ostringstream csv;
    csv << "fold,mae,mse,r2,n,ok\n";
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
      const auto& fold = report.folds[f];
      csv << f << ',';
      if (fold.ok) {
        csv << fold.report.mae << ',' << fold.report.mse << ',';
        if (fold.report.r2) {
          csv << *fold.report.r2;
        }
        csv << ',' << fold.report.n << ",1\n";
      } else {
        csv << ",,,,0\n";
      }
    }
    write_text(folds_path, csv.str());
    manifest.add_output(folds_path);
  }
  manifest.write();

  if (common.pretty) {
    for (std::size_t f = 0; f < report.folds.size(); ++f) {
      const auto& fold = report.folds[f];
      if (fold.ok) {
        print_eval_pretty("fold " + std::to_string(f), fold.report);
      } else {
        std::printf("fold %zu FAILED: %s\n", f, fold.error.c_str());
      }
    }
    std::printf("mean r2=%.6g (std %.6g over %zu folds)\n", report.r2.mean, report.r2.stddev,
                report.r2.count);
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_bench(const BenchArgs& args, const CommonArgs& common) {
  const std::string out = resolve_out(args.out, common);

  ManifestWriter manifest("bench", out);
  manifest.add_input(args.model);
  manifest.add_input(args.data);
  manifest.set_config(json{{"model", args.model}, {"data", args.data}, {"n", args.n},
                           {"warmup", args.warmup}});

  const FittedModel model = load_model(args.model);
  const SampleSet data = load_samples(args.data);
  const TimingReport report = time_inference(model, data, args.n, args.warmup);

  write_text(out, timing_report_to_json(report, model.family));
  manifest.add_output(out);
  manifest.write();

  if (common.pretty) {
    std::printf("%-22s avg=%.5f ms  min=%.5f ms  max=%.5f ms  (n=%zu, warmup=%zu)\n",
                family_name(model.family).c_str(), report.avg_ms, report.min_ms, report.max_ms,
                report.n, report.warmup);
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

int run_residuals(const ResidualsArgs& args, const CommonArgs& common) {
  const std::string out = resolve_out(args.out, common);
  const std::string points_out = resolve_out(
      args.points_out.empty() ? fs::path(args.out).stem().string() + ".csv" : args.points_out,
      common);

  ManifestWriter manifest("residuals", out);
  manifest.add_input(args.model);
  manifest.add_input(args.data);
  manifest.set_config(json{{"model", args.model}, {"data", args.data}, {"feature", args.feature},
                           {"bins", args.bins}});

  const FittedModel model = load_model(args.model);
  const SampleSet data = load_samples(args.data);

  const ResidualProfile profile = residual_profile(model, data, args.feature, args.bins);
  write_text(out, residual_profile_to_json(profile));

  std::ostringstream csv;
  csv << "feature_value,residual\n";
  for (const auto& [v, r] : residual_points(model, data, args.feature)) {
    csv << v << ',' << r << '\n';
  }
  write_text(points_out, csv.str());

  manifest.add_output(out);
  manifest.add_output(points_out);
  manifest.write();

  if (common.pretty) {
    for (const auto& b : profile.bins) {
      std::printf("[%10.4g, %10.4g)  mean=%+.6g  std=%.6g  count=%zu\n", b.lo, b.hi, b.mean,
                  b.stddev, b.count);
    }
  }
  std::cout << "wrote " << out << " and " << points_out << "\n";
  return 0;
}

int run_decide(const DecideArgs& args, const CommonArgs& common) {
  const std::string out = resolve_out(args.out, common);

  ManifestWriter manifest("decide", out);
  manifest.add_input(args.topology);

  const json topo = json::parse(read_text(args.topology));

  SelectionConfig config;
  config.alpha = args.alpha ? *args.alpha : topo.value("alpha", 0.5);
  if (args.delta_max) {
    config.delta_max = *args.delta_max;
  } else if (topo.contains("delta_max")) {
    config.delta_max = topo.at("delta_max").get<double>();
  } else {
    throw std::invalid_argument("delta_max must be given via --delta-max or the topology file");
  }

  std::vector<CandidateNode> nodes;
  for (const auto& n : topo.at("nodes")) {
    CandidateNode node;
    node.id = n.at("id").get<std::string>();
    node.kind = node_kind_from_name(n.at("kind").get<std::string>());
    node.index = n.value("index", 0);
    node.processing_delay = n.value("d_proc", 0.0);
    node.reliability = n.value("reliability", 1.0);
    nodes.push_back(node);
  }

  SegmentDelays segments;
  const json& seg = topo.at("segments");
  if (seg.contains("measured")) {
    const json& meas = seg.at("measured");
    segments.d5g = meas.at("d_5g").get<double>();
    for (const auto& v : meas.at("d_e")) segments.edge_paths.push_back(v.get<double>());
  } else if (seg.contains("predicted")) {
    if (args.telemetry.empty()) {
      throw std::invalid_argument("predicted segments need --telemetry <csv>");
    }
    manifest.add_input(args.telemetry);
    const SampleSet telemetry = load_samples(args.telemetry);
    auto predict_row = [&](const json& spec) {
      const std::string model_path = spec.at("model").get<std::string>();
      const std::size_t row = spec.at("row").get<std::size_t>();
      if (row >= telemetry.size()) {
        throw std::invalid_argument("telemetry row out of range: " + std::to_string(row));
      }
      const FittedModel model = load_model(model_path);
      return predict_segment(model, telemetry.samples[row]);
    };
    const json& pred = seg.at("predicted");
    segments.d5g = predict_row(pred.at("d_5g"));
    for (const auto& e : pred.at("d_e")) segments.edge_paths.push_back(predict_row(e));
  } else {
    throw std::invalid_argument("topology segments must contain 'measured' or 'predicted'");
  }

  manifest.set_config(json{{"topology", args.topology},
                           {"telemetry", args.telemetry},
                           {"alpha", config.alpha},
                           {"delta_max", config.delta_max}});

  const Decision decision = select_node(segments, nodes, config);
  write_text(out, decision_to_json(decision));
  manifest.add_output(out);
  manifest.write();

  if (common.pretty) {
    if (decision.fallback) {
      std::printf("guard fired (d_5g > delta_max): LOCAL, T=%.6g s\n", decision.total_delay);
    } else {
      for (const auto& e : decision.table) {
        std::printf("%-10s T=%.6g s  S=%.6g%s\n", e.id.c_str(), e.total_delay, e.score,
                    e.id == decision.selected_id ? "  <- selected" : "");
      }
    }
  }
  std::cout << "selected " << decision.selected_id << " -> " << out << "\n";
  return 0;
}

int run_compare(const CompareArgs& args, const CommonArgs& common) {
  const std::string out = resolve_out(args.out, common);

  std::vector<std::string> families = args.families;
  if (families.empty()) {
    families = {"rational_exp", "rational", "polynomial2", "linear", "mlp", "sigmoid",
                "univariate_rational"};
  }

  ManifestWriter manifest("compare", out);
  manifest.add_input(args.data);
  manifest.set_config(json{{"data", args.data}, {"families", families}, {"split", args.split},
                           {"holdout_frac", args.holdout_frac}, {"seed", args.seed},
                           {"cv", args.with_cv}, {"k", args.k}, {"threshold", args.threshold}});
  manifest.add_seed("compare", args.seed);

  const SampleSet data = load_samples(args.data);
  const auto retained = select_features(data, args.threshold);
  const ScalingSpec scaling = ScalingSpec::defaults();

  SampleSet train = data, eval = data;
  if (args.split == "holdout") {
    auto [tr, ev] = holdout_split(data, args.holdout_frac, args.seed);
    train = std::move(tr);
    eval = std::move(ev);
  } else if (args.split != "all") {
    throw std::invalid_argument("--split must be 'all' or 'holdout'");
  }
  const FeatureMatrix train_m = to_feature_matrix(train, retained, scaling);
  const FeatureMatrix full_m = to_feature_matrix(data, retained, scaling);

  struct Row {
    std::string family;
    EvalReport eval;
    TimingReport timing;
    std::optional<CVReport> cv;
    std::string error;
  };
  std::vector<Row> rows;

  for (const auto& name : families) {
    Row row;
    row.family = name;
    try {
      const ModelFamily family = family_from_name(name);
      const FitOptions opts = options_from(args.seed, 5, 200, 16);
      FittedModel model = fit_family(family, train_m, opts);
      model.scaling = scaling;
      model.features = retained;

      std::vector<double> y, y_hat;
      for (const auto& s : eval.samples) {
        y.push_back(s.delay);
        y_hat.push_back(model.predict_sample(s));
      }
      row.eval = metrics(y, y_hat);
      row.timing = time_inference(model, eval, 100, 20);
      if (args.with_cv) {
        row.cv = kfold_cv(full_m, family, args.k, args.seed, opts);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }

  // Mirror the usual comparison-table layout: best R^2 first.
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    const double ra = a.error.empty() ? a.eval.r2.value_or(-1e300) : -1e301;
    const double rb = b.error.empty() ? b.eval.r2.value_or(-1e300) : -1e301;
    return ra > rb;
  });

  json jrows = json::array();
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      jrows.push_back(json{{"family", row.family}, {"error", row.error}});
      continue;
    }
    json r{{"family", row.family},
           {"mae", row.eval.mae},
           {"mse", row.eval.mse},
           {"r2", row.eval.r2 ? json(*row.eval.r2) : json(nullptr)},
           {"avg_ms", row.timing.avg_ms},
           {"min_ms", row.timing.min_ms},
           {"max_ms", row.timing.max_ms}};
    if (row.cv) {
      r["cv"] = json{{"mae", json{{"mean", row.cv->mae.mean}, {"std", row.cv->mae.stddev}}},
                     {"mse", json{{"mean", row.cv->mse.mean}, {"std", row.cv->mse.stddev}}},
                     {"r2", json{{"mean", row.cv->r2.mean}, {"std", row.cv->r2.stddev}}},
                     {"all_folds_ok", row.cv->all_folds_ok}};
    }
    jrows.push_back(r);
  }
  json j{{"data", args.data}, {"split", args.split}, {"seed", args.seed}, {"rows", jrows}};
  write_text(out, j.dump(2) + "\n");
  manifest.add_output(out);
  manifest.write();

  if (common.pretty) {
    std::printf("%-20s %10s %12s %9s %9s %9s %9s\n", "family", "MAE", "MSE", "R2", "avg_ms",
                "min_ms", "max_ms");
    for (const auto& row : rows) {
      if (!row.error.empty()) {
        std::printf("%-20s fit failed: %s\n", row.family.c_str(), row.error.c_str());
        continue;
      }
      std::printf("%-20s %10.5f %12.7f %9.4f %9.5f %9.5f %9.5f\n", row.family.c_str(),
                  row.eval.mae, row.eval.mse, row.eval.r2.value_or(std::nan("")),
                  row.timing.avg_ms, row.timing.min_ms, row.timing.max_ms);
      if (row.cv) {
        std::printf("%-20s   cv: mae=%.5f+-%.5f  mse=%.7f+-%.7f  r2=%.4f+-%.4f\n", "",
                    row.cv->mae.mean, row.cv->mae.stddev, row.cv->mse.mean, row.cv->mse.stddev,
                    row.cv->r2.mean, row.cv->r2.stddev);
      }
    }
  }
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace latpred::cli
