#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "latpred/models.hpp"
#include "latpred/telemetry.hpp"

namespace latpred {

enum class NodeKind { kLocal, kNear, kEdge };

std::string node_kind_name(NodeKind kind);
NodeKind node_kind_from_name(const std::string& name);

struct CandidateNode {
  std::string id;
  NodeKind kind = NodeKind::kLocal;
  int index = 0;  // 1..3 for edge nodes, 0 otherwise
  double processing_delay = 0.0;  // seconds, constant per node
  double reliability = 1.0;       // exogenous score in [0, 1]
};

// Measured or predicted delay on each monitored segment.
struct SegmentDelays {
  double d5g = 0.0;                // wireless uplink
  std::vector<double> edge_paths;  // wired path to edge server i (1-based node index)
};

struct SelectionConfig {
  double alpha = 0.5;      // trade-off weight between delay and unreliability
  double delta_max = 0.0;  // uplink delay guard; must be set > 0
};

struct ScoreEntry {
  std::string id;
  double total_delay = 0.0;
  double score = 0.0;
};

struct Decision {
  std::string selected_id;
  double total_delay = 0.0;
  std::optional<double> score;     // absent when the guard fired
  std::vector<ScoreEntry> table;   // empty when the guard fired
  bool fallback = false;           // true when d5g exceeded delta_max
};

// Total delay per candidate: local = processing only; near = uplink +
// processing; edge_i = uplink + path_i + processing.
std::vector<double> compose_delays(const SegmentDelays& segments,
                                   const std::vector<CandidateNode>& nodes);

// Composite-score selection. Requires exactly one local node. Ties break by
// fixed priority local < near < edge1 < edge2 < edge3, then input order.
Decision select_node(const SegmentDelays& segments, const std::vector<CandidateNode>& nodes,
                     const SelectionConfig& config);

// Applies the model's stored scaling, predicts, and clamps negative outputs
// to zero while counting them.
double predict_segment(const FittedModel& model, const TelemetrySample& telemetry);

std::uint64_t negative_clamp_count();
void reset_negative_clamp_count();

}  // namespace latpred
