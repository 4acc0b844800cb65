#include "latpred/offload.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

namespace latpred {
namespace {

std::atomic<std::uint64_t> g_negative_clamps{0};

int priority_rank(const CandidateNode& node) {
  switch (node.kind) {
    case NodeKind::kLocal: return 0;
    case NodeKind::kNear: return 1;
    case NodeKind::kEdge: return 1 + node.index;  // edge1=2, edge2=3, edge3=4
  }
  return 100;
}

}  // namespace

std::string node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::kLocal: return "LOCAL";
    case NodeKind::kNear: return "NEAR";
    case NodeKind::kEdge: return "EDGE";
  }
  return "UNKNOWN";
}

NodeKind node_kind_from_name(const std::string& name) {
  if (name == "LOCAL") return NodeKind::kLocal;
  if (name == "NEAR") return NodeKind::kNear;
  if (name == "EDGE") return NodeKind::kEdge;
  throw std::invalid_argument("unknown node kind: " + name);
}

std::vector<double> compose_delays(const SegmentDelays& segments,
                                   const std::vector<CandidateNode>& nodes) {
  if (nodes.empty()) throw std::invalid_argument("compose_delays: empty candidate set");

  std::vector<double> totals;
  totals.reserve(nodes.size());
  for (const auto& node : nodes) {
    switch (node.kind) {
      case NodeKind::kLocal:
        totals.push_back(node.processing_delay);
        break;
      case NodeKind::kNear:
        totals.push_back(segments.d5g + node.processing_delay);
        break;
      case NodeKind::kEdge: {
        if (node.index < 1 || static_cast<std::size_t>(node.index) > segments.edge_paths.size()) {
          throw std::invalid_argument("compose_delays: no segment delay for edge node " + node.id);
        }
        totals.push_back(segments.d5g + segments.edge_paths[node.index - 1] +
                         node.processing_delay);
        break;
      }
    }
  }
  return totals;
}

Decision select_node(const SegmentDelays& segments, const std::vector<CandidateNode>& nodes,
                     const SelectionConfig& config) {
  if (nodes.empty()) throw std::invalid_argument("select_node: empty candidate set");
  if (!(config.delta_max > 0.0)) throw std::invalid_argument("select_node: delta_max must be > 0");
  if (config.alpha < 0.0 || config.alpha > 1.0) {
    throw std::invalid_argument("select_node: alpha must lie in [0, 1]");
  }

  const CandidateNode* local = nullptr;
  for (const auto& node : nodes) {
    if (node.kind == NodeKind::kLocal) {
      if (local) throw std::invalid_argument("select_node: more than one local node");
      local = &node;
    }
  }
  if (!local) throw std::invalid_argument("select_node: no local node");

  if (segments.d5g > config.delta_max) {
    Decision d;
    d.selected_id = local->id;
    d.total_delay = local->processing_delay;
    d.fallback = true;
    return d;
  }

  const std::vector<double> totals = compose_delays(segments, nodes);
  double t_max = 0.0;
  for (double t : totals) t_max = std::max(t_max, t);

  Decision d;
  d.table.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    // All-zero delays leave the normalized term at 0 and selection falls to
    // reliability alone.
    const double normalized = t_max > 0.0 ? totals[i] / t_max : 0.0;
    const double score = config.alpha * normalized + (1.0 - config.alpha) * (1.0 - nodes[i].reliability);
    d.table.push_back({nodes[i].id, totals[i], score});
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double s = d.table[i].score;
    const double sb = d.table[best].score;
    if (s < sb || (s == sb && priority_rank(nodes[i]) < priority_rank(nodes[best]))) {
      best = i;
    }
  }

  d.selected_id = nodes[best].id;
  d.total_delay = totals[best];
  d.score = d.table[best].score;
  return d;
}

double predict_segment(const FittedModel& model, const TelemetrySample& telemetry) {
  const double prediction = model.predict_sample(telemetry);
  if (prediction < 0.0) {
    g_negative_clamps.fetch_add(1, std::memory_order_relaxed);
    return 0.0;
  }
  return prediction;
}

std::uint64_t negative_clamp_count() {
  return g_negative_clamps.load(std::memory_order_relaxed);
}

void reset_negative_clamp_count() {
  g_negative_clamps.store(0, std::memory_order_relaxed);
}

}  // namespace latpred
