#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cograph/embedding.hpp"
#include "cograph/graph.hpp"

namespace cograph {

// Line-oriented text persistence of a graph, one node/edge per line, plus the
// embedding-table recipe so queries can synthesize text vectors later.
// Every node line carries the 512-d feature used for retrieval (raw where
// available, decoder output for compressed remote nodes).
struct GraphDump {
  EmbeddingTableSpec embedding;
  std::vector<NodeRecord> nodes;
  std::vector<EdgeRecord> edges;
};

std::string write_graph_dump(const GraphDump& dump);
GraphDump read_graph_dump(const std::string& text);

void save_graph_dump(const GraphDump& dump, const std::string& path);
GraphDump load_graph_dump(const std::string& path);

// Convenience: snapshot a graph together with its embedding recipe.
GraphDump make_graph_dump(const COGraph& graph, const EmbeddingTableSpec& embedding);

}  // namespace cograph
