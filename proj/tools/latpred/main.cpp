#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "latpred/commands.hpp"

// Exit codes: 0 success, 1 usage error, 2 computation failure.
int main(int argc, char** argv) {
  using namespace latpred::cli;

  CLI::App app{"End-to-end latency prediction and offloading decision toolkit"};
  app.require_subcommand(1);

  CommonArgs common;
  if (const char* dir = std::getenv("LATPRED_OUT_DIR")) common.out_dir = dir;
  app.add_option("--out-dir", common.out_dir,
                 "Directory for relative output paths (default: $LATPRED_OUT_DIR or cwd)");
  app.add_flag("--pretty", common.pretty, "Also print a human-readable table to stdout");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic telemetry dataset");
  simulate->fallthrough();
  simulate->add_option("--config", sim.config_path, "Generator config JSON file");
  simulate->add_option("--n", sim.n, "Number of samples");
  simulate->add_option("--seed", sim.seed, "Generator seed");
  simulate->add_option("--sigma", sim.sigma, "Delay noise as a fraction of the mean delay");
  simulate->add_option("--rho", sim.rho, "Target frame-size/client-rate correlation");
  simulate->add_option("--hidden", sim.hidden, "Hidden process: saturating | rational_exp");
  simulate->add_option("--out", sim.out, "Output CSV path");
  simulate->add_option("--ground-truth", sim.truth_out, "Ground-truth sidecar path");

  FitArgs fit;
  auto* fitc = app.add_subcommand("fit", "Fit a delay model family to a telemetry CSV");
  fitc->fallthrough();
  fitc->add_option("--data", fit.data, "Telemetry CSV")->required();
  fitc->add_option("--family", fit.family,
                   "rational_exp | rational | univariate_rational | polynomial2 | linear | "
                   "sigmoid | mlp")
      ->required();
  fitc->add_option("--out", fit.out, "Output model file");
  fitc->add_option("--seed", fit.seed, "Fit seed");
  fitc->add_option("--multistarts", fit.multistarts, "Multistart count for nonlinear fits");
  fitc->add_option("--max-iters", fit.max_iters, "Optimizer iteration cap");
  fitc->add_option("--threshold", fit.threshold, "Correlation threshold for feature selection");
  fitc->add_option("--univariate-feature", fit.univariate_feature,
                   "Feature for the univariate rational family");
  fitc->add_option("--split", fit.split, "all | holdout (train on the non-held-out part)");
  fitc->add_option("--holdout-frac", fit.holdout_frac, "Held-out fraction");
  fitc->add_option("--hidden-units", fit.hidden_units, "MLP hidden width");
  fitc->add_option("--epochs", fit.epochs, "MLP epochs");
  fitc->add_option("--batch", fit.batch, "MLP batch size");
  fitc->add_option("--learning-rate", fit.learning_rate, "MLP step size");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a fitted model on a dataset");
  evaluate->fallthrough();
  evaluate->add_option("--model", ev.model, "Model file")->required();
  evaluate->add_option("--data", ev.data, "Telemetry CSV")->required();
  evaluate->add_option("--split", ev.split, "all | holdout (required, recorded in the report)")
      ->required();
  evaluate->add_option("--holdout-frac", ev.holdout_frac, "Held-out fraction");
  evaluate->add_option("--seed", ev.seed, "Split seed (must match the fit)");
  evaluate->add_option("--out", ev.out, "Output report path");

  CvArgs cv;
  auto* cvc = app.add_subcommand("cv", "k-fold cross-validation of one family");
  cvc->fallthrough();
  cvc->add_option("--data", cv.data, "Telemetry CSV")->required();
  cvc->add_option("--family", cv.family, "Model family")->required();
  cvc->add_option("--k", cv.k, "Fold count");
  cvc->add_option("--seed", cv.seed, "Shuffle/fit seed");
  cvc->add_option("--multistarts", cv.multistarts, "Multistart count");
  cvc->add_option("--max-iters", cv.max_iters, "Optimizer iteration cap");
  cvc->add_option("--threshold", cv.threshold, "Feature-selection threshold");
  cvc->add_option("--univariate-feature", cv.univariate_feature, "Univariate family feature");
  cvc->add_option("--hidden-units", cv.hidden_units, "MLP hidden width");
  cvc->add_option("--out", cv.out, "Output report path");
  cvc->add_option("--folds-csv", cv.folds_csv, "Optional per-fold CSV path");

  BenchArgs bench;
  auto* benchc = app.add_subcommand("bench", "Per-sample inference latency of a model");
  benchc->fallthrough();
  benchc->add_option("--model", bench.model, "Model file")->required();
  benchc->add_option("--data", bench.data, "Telemetry CSV")->required();
  benchc->add_option("--n", bench.n, "Timed calls");
  benchc->add_option("--warmup", bench.warmup, "Warmup calls excluded from stats");
  benchc->add_option("--out", bench.out, "Output report path");

  ResidualsArgs res;
  auto* resc = app.add_subcommand("residuals", "Residual profile against a feature");
  resc->fallthrough();
  resc->add_option("--model", res.model, "Model file")->required();
  resc->add_option("--data", res.data, "Telemetry CSV")->required();
  resc->add_option("--feature", res.feature, "Profile feature");
  resc->add_option("--bins", res.bins, "Quantile bin count");
  resc->add_option("--out", res.out, "Profile JSON path");
  resc->add_option("--points-csv", res.points_out, "Plot-ready residual CSV path");

  DecideArgs dec;
  auto* decc = app.add_subcommand("decide", "Select an offloading target");
  decc->fallthrough();
  decc->add_option("--topology", dec.topology, "Topology/config JSON")->required();
  decc->add_option("--telemetry", dec.telemetry, "Telemetry CSV for predicted segments");
  decc->add_option("--alpha", dec.alpha, "Delay/reliability trade-off weight");
  decc->add_option("--delta-max", dec.delta_max, "Uplink delay guard in seconds");
  decc->add_option("--out", dec.out, "Decision JSON path");

  CompareArgs cmp;
  auto* cmpc = app.add_subcommand("compare", "Fit and compare several families");
  cmpc->fallthrough();
  cmpc->add_option("--data", cmp.data, "Telemetry CSV")->required();
  cmpc->add_option("--families", cmp.families, "Families to compare (default: all)");
  cmpc->add_option("--split", cmp.split, "all | holdout");
  cmpc->add_option("--holdout-frac", cmp.holdout_frac, "Held-out fraction");
  cmpc->add_option("--seed", cmp.seed, "Seed");
  cmpc->add_flag("--cv", cmp.with_cv, "Also run k-fold cross-validation per family");
  cmpc->add_option("--k", cmp.k, "CV fold count");
  cmpc->add_option("--threshold", cmp.threshold, "Feature-selection threshold");
  cmpc->add_option("--out", cmp.out, "Output report path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim, common);
    if (fitc->parsed()) return run_fit(fit, common);
    if (evaluate->parsed()) return run_evaluate(ev, common);
    if (cvc->parsed()) return run_cv(cv, common);
    if (benchc->parsed()) return run_bench(bench, common);
    if (resc->parsed()) return run_residuals(res, common);
    if (decc->parsed()) return run_decide(dec, common);
    if (cmpc->parsed()) return run_compare(cmp, common);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
