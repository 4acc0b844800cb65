#include "latpred/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "latpred/rng.hpp"

namespace latpred {
namespace {

MetricStats stats_over(const std::vector<double>& values) {
  MetricStats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) {
      const double d = v - s.mean;
      acc += d * d;
    }
    s.stddev = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace

EvalReport metrics(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("metrics: length mismatch");
  if (y.empty()) throw std::invalid_argument("metrics: empty vectors");

  const std::size_t n = y.size();
  double abs_sum = 0.0, sq_sum = 0.0, y_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - y_hat[i];
    abs_sum += std::abs(r);
    sq_sum += r * r;
    y_sum += y[i];
  }

  EvalReport rep;
  rep.n = n;
  rep.mae = abs_sum / static_cast<double>(n);
  rep.mse = sq_sum / static_cast<double>(n);

  const double y_mean = y_sum / static_cast<double>(n);
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - y_mean;
    ss_tot += d * d;
  }
  if (ss_tot > 0.0) {
    rep.r2 = 1.0 - sq_sum / ss_tot;
  }
  return rep;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("kfold: k must be at least 2");
  if (n < static_cast<std::size_t>(k)) throw std::invalid_argument("kfold: n < k");

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  // First (n mod k) folds take one extra row.
  std::vector<std::vector<std::size_t>> folds(k);
  const std::size_t base = n / static_cast<std::size_t>(k);
  const std::size_t extra = n % static_cast<std::size_t>(k);
  std::size_t pos = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
    folds[f].assign(order.begin() + pos, order.begin() + pos + size);
    pos += size;
  }
  return folds;
}

CVReport kfold_cv(const FeatureMatrix& m, ModelFamily family, int k, std::uint64_t seed,
                  const FitOptions& opts, const std::string& univariate_feature) {
  const auto folds = kfold_indices(m.rows(), k, seed);

  CVReport report;
  report.k = k;
  report.seed = seed;

  std::vector<double> maes, mses, r2s;
  for (int f = 0; f < k; ++f) {
    FeatureMatrix train, test;
    train.features = m.features;
    test.features = m.features;
    for (int g = 0; g < k; ++g) {
      auto& dst = (g == f) ? test : train;
      for (std::size_t idx : folds[g]) {
        dst.x.push_back(m.x[idx]);
        dst.y.push_back(m.y[idx]);
      }
    }

    FoldResult fold;
    try {
      FitOptions fold_opts = opts;
      fold_opts.seed = mix_seed(seed, 0x666f6c64 + static_cast<std::uint64_t>(f));  // "fold"
      const FittedModel model = fit_family(family, train, fold_opts, univariate_feature);
      std::vector<double> y_hat;
      y_hat.reserve(test.rows());
      for (std::size_t i = 0; i < test.rows(); ++i) {
        y_hat.push_back(model.predict(test.x[i], static_cast<long>(i)));
      }
      fold.report = metrics(test.y, y_hat);
      fold.ok = true;
      maes.push_back(fold.report.mae);
      mses.push_back(fold.report.mse);
      if (fold.report.r2) r2s.push_back(*fold.report.r2);
    } catch (const std::exception& e) {
      fold.ok = false;
      fold.error = e.what();
    }
    report.folds.push_back(std::move(fold));
  }

  report.mae = stats_over(maes);
  report.mse = stats_over(mses);
  report.r2 = stats_over(r2s);
  report.all_folds_ok = maes.size() == static_cast<std::size_t>(k);
  return report;
}

std::vector<std::pair<double, double>> residual_points(const FittedModel& model,
                                                       const SampleSet& data,
                                                       const std::string& feature) {
  std::vector<std::pair<double, double>> points;
  points.reserve(data.size());
  for (const auto& s : data.samples) {
    points.emplace_back(feature_value(s, feature), s.delay - model.predict_sample(s));
  }
  return points;
}

ResidualProfile residual_profile(const FittedModel& model, const SampleSet& data,
                                 const std::string& feature, int bins) {
  if (bins < 1) throw std::invalid_argument("residual_profile: bins must be positive");
  if (data.size() < static_cast<std::size_t>(bins)) {
    throw std::invalid_argument("residual_profile: need at least as many rows as bins");
  }

  const auto points = residual_points(model, data, feature);
  std::vector<double> values;
  values.reserve(points.size());
  for (const auto& [v, _] : points) values.push_back(v);
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());

  ResidualProfile profile;
  profile.feature = feature;
  profile.n = points.size();

  const double lo = sorted.front();
  const double hi = sorted.back();
  std::vector<double> edges;
  if (lo == hi) {
    profile.degenerate = true;
    profile.note = "constant feature; single-bin profile";
    edges = {lo, hi};
  } else {
    edges.push_back(lo);
    for (int b = 1; b < bins; ++b) {
      const double q = static_cast<double>(b) / static_cast<double>(bins);
      const double pos = q * static_cast<double>(sorted.size() - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i);
      const double edge = i + 1 < sorted.size()
                              ? sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
                              : sorted[i];
      edges.push_back(edge);
    }
    edges.push_back(hi);
    // Duplicate quantile edges collapse; keep strictly increasing boundaries.
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    if (edges.size() < 2) edges = {lo, hi};
  }

  const std::size_t nbins = edges.size() - 1;
  std::vector<std::vector<double>> buckets(nbins);
  for (const auto& [v, r] : points) {
    // upper_bound puts v == edge into the lower bin; the maximum lands in the
    // last bin so every residual is assigned exactly once.
    std::size_t b = 0;
    if (nbins > 1) {
      const auto it = std::upper_bound(edges.begin() + 1, edges.end() - 1, v);
      b = static_cast<std::size_t>(it - (edges.begin() + 1));
    }
    buckets[b].push_back(r);
  }

  for (std::size_t b = 0; b < nbins; ++b) {
    ResidualBin bin;
    bin.lo = edges[b];
    bin.hi = edges[b + 1];
    bin.count = buckets[b].size();
    if (!buckets[b].empty()) {
      const MetricStats s = stats_over(buckets[b]);
      bin.mean = s.mean;
      bin.stddev = s.stddev;
    }
    profile.bins.push_back(bin);
  }
  return profile;
}

TimingReport time_inference(const FittedModel& model, const SampleSet& data, std::size_t n,
                            std::size_t warmup) {
  if (data.empty()) throw std::invalid_argument("time_inference: empty sample set");
  if (n < 1) throw std::invalid_argument("time_inference: n must be at least 1");

  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;

  for (std::size_t i = 0; i < warmup; ++i) {
    sink = model.predict_sample(data.samples[i % data.size()]);
  }

  TimingReport rep;
  rep.n = n;
  rep.warmup = warmup;
  rep.min_ms = std::numeric_limits<double>::infinity();
  rep.max_ms = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = data.samples[i % data.size()];
    const auto t0 = clock::now();
    sink = model.predict_sample(s);
    const auto t1 = clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    total += ms;
    rep.min_ms = std::min(rep.min_ms, ms);
    rep.max_ms = std::max(rep.max_ms, ms);
  }
  (void)sink;
  rep.avg_ms = total / static_cast<double>(n);
  return rep;
}

}  // namespace latpred
