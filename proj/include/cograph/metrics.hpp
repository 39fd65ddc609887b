#pragma once

// Evaluation of a finished scenario run: object recall against the world
// ground truth, open-vocabulary retrieval recall, translation error, and the
// byte ledger — serialized as JSON and as a compact text table.

#include <cstdint>
#include <string>
#include <vector>

#include "cograph/dump.hpp"
#include "cograph/sim.hpp"

namespace cograph {

struct QueryHit {
  RobotId robot = 0;
  NodeId node = 0;
  FeatureLabel label = 0;
  double similarity = 0.0;
};

// Top-k nodes by cosine between the text embedding and each node's 512-d
// feature; ties break on (robot, node id). Nodes without a feature never
// rank. A graph with no rankable node yields an empty hit list.
struct QueryResult {
  std::string text;
  std::vector<QueryHit> hits;
};

QueryResult query_graph(const COGraph& graph, const EmbeddingTable& table,
                        const std::string& text, std::size_t k);
QueryResult query_nodes(const std::vector<NodeRecord>& nodes, const EmbeddingTable& table,
                        const std::string& text, std::size_t k);

struct MetricsBundle {
  std::string scene;
  std::string mode;               // "compressed" | "raw512"
  double pose_noise_sigma = 0.0;  // effective value used by the run
  double r_obj = 0.0;             // ground-truth objects recovered as nodes
  double r_at_1 = 0.0;            // text retrieval recall at 1
  double r_at_5 = 0.0;            // text retrieval recall at 5
  double t_err = 0.0;             // mean translation error over merges, m
  std::size_t merge_events = 0;
  std::size_t bytes_sent = 0;
  std::size_t bytes_received = 0;
  std::size_t messages = 0;
  std::size_t nodes = 0;  // evaluated graph
  std::size_t edges = 0;
};

// Evaluates robot 0's merged view (its local graph when no merge happened).
// A ground-truth object counts as recovered when a node of its category sits
// within d_gt of the object center, both in robot 0's frame; retrieval runs
// one text query per distinct world category.
MetricsBundle compute_metrics(const ScenarioResult& result, const ScenarioConfig& cfg,
                              const EmbeddingTable& table, double d_gt = 0.5);

// Canonical JSON (alphabetical keys, 2-space indent). The array form is what
// a run writes to disk.
std::string metrics_to_json(const MetricsBundle& m);
std::string metrics_json_array(const std::vector<MetricsBundle>& ms);
std::vector<MetricsBundle> metrics_array_from_json(const std::string& text);

// Compact results table, one row per bundle: scene, transmitted feature
// dimension, pose source, mean translation error, and bytes sent. Numbers are
// printed with full round-trip precision so parse_metrics_table recovers the
// exact values (whitespace in scene names appears as '_').
std::string metrics_table(const std::vector<MetricsBundle>& ms);

// Inverse of metrics_table for the columns it carries: scene, mode,
// pose_noise_sigma, t_err, and bytes_sent are restored; everything else is
// left at its default.
std::vector<MetricsBundle> parse_metrics_table(const std::string& text);

}  // namespace cograph
