#include "cograph/dump.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "cograph/error.hpp"

namespace cograph {
namespace {

void append_float(std::string& out, float v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", double(v));
  out += buf;
}

void append_double(std::string& out, double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

class Tokens {
 public:
  explicit Tokens(const std::string& line) : in_(line) {}

  std::string next() {
    std::string t;
    if (!(in_ >> t)) raise(Errc::io, "graph dump line ends early");
    return t;
  }

  bool done() {
    std::string t;
    return !(in_ >> t);
  }

  double real() { return std::stod(next()); }

  long integer() {
    const std::string t = next();
    long v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size()) {
      raise(Errc::io, "graph dump: expected integer, got '" + t + "'");
    }
    return v;
  }

 private:
  std::istringstream in_;
};

}  // namespace

std::string write_graph_dump(const GraphDump& dump) {
  std::string out;
  out.reserve(256 + dump.nodes.size() * (64 + 12 * kFeatureDim));
  out += "cograph-dump 1\n";

  out += "embedding_seed ";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%" PRIu64, dump.embedding.seed);
  out += buf;
  out += '\n';
  for (const std::string& name : dump.embedding.categories) {
    out += "category ";
    out += name;
    out += '\n';
  }
  for (const CouplingSpec& c : dump.embedding.couplings) {
    out += "coupling " + c.a + " " + c.b + " ";
    append_double(out, c.rho);
    out += '\n';
  }

  for (const NodeRecord& n : dump.nodes) {
    out += "node ";
    out += std::to_string(int(n.robot)) + " " + std::to_string(int(n.id)) + " " +
           std::to_string(n.label) + " " + (n.keep_raw ? "1" : "0") + " ";
    append_double(out, n.pos.x);
    out += ' ';
    append_double(out, n.pos.y);
    out += ' ';
    append_double(out, n.pos.z);
    for (int i = 0; i < 3; ++i) out += " " + std::to_string(int(n.bbox[i]));
    for (int i = 0; i < 3; ++i) out += " " + std::to_string(int(n.feat3.q[i]));
    // A node that never received a feature observation has no 512-d vector;
    // the flag keeps such nodes representable instead of rejecting the graph.
    out += n.has_feat512 ? " 1" : " 0";
    if (n.has_feat512) {
      for (std::size_t i = 0; i < kFeatureDim; ++i) {
        out += ' ';
        append_float(out, n.feat512.v[i]);
      }
    }
    out += '\n';
  }

  for (const EdgeRecord& e : dump.edges) {
    out += "edge " + std::to_string(int(e.robot)) + " " + std::to_string(int(e.a)) + " " +
           std::to_string(int(e.b)) + "\n";
  }
  return out;
}

GraphDump read_graph_dump(const std::string& text) {
  GraphDump dump;
  std::istringstream in(text);
  std::string line;

  if (!std::getline(in, line) || line != "cograph-dump 1") {
    raise(Errc::io, "not a graph dump (missing 'cograph-dump 1' header)");
  }

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    Tokens t(line);
    const std::string kind = t.next();
    if (kind == "embedding_seed") {
      dump.embedding.seed = std::strtoull(t.next().c_str(), nullptr, 10);
    } else if (kind == "category") {
      dump.embedding.categories.push_back(t.next());
    } else if (kind == "coupling") {
      CouplingSpec c;
      c.a = t.next();
      c.b = t.next();
      c.rho = t.real();
      dump.embedding.couplings.push_back(c);
    } else if (kind == "node") {
      NodeRecord n;
      n.robot = static_cast<RobotId>(t.integer());
      n.id = static_cast<NodeId>(t.integer());
      n.label = static_cast<FeatureLabel>(t.integer());
      n.keep_raw = t.integer() != 0;
      n.pos.x = t.real();
      n.pos.y = t.real();
      n.pos.z = t.real();
      for (int i = 0; i < 3; ++i) n.bbox[i] = static_cast<std::uint8_t>(t.integer());
      for (int i = 0; i < 3; ++i) n.feat3.q[i] = static_cast<std::uint8_t>(t.integer());
      n.has_feat512 = t.integer() != 0;
      if (n.has_feat512) {
        for (std::size_t i = 0; i < kFeatureDim; ++i) {
          n.feat512.v[i] = static_cast<float>(t.real());
        }
      }
      dump.nodes.push_back(n);
    } else if (kind == "edge") {
      EdgeRecord e;
      e.robot = static_cast<RobotId>(t.integer());
      e.a = static_cast<NodeId>(t.integer());
      e.b = static_cast<NodeId>(t.integer());
      dump.edges.push_back(e);
    } else {
      raise(Errc::io, "graph dump: unknown record '" + kind + "'");
    }
    if (!t.done()) raise(Errc::io, "graph dump: trailing tokens on '" + kind + "' line");
  }
  return dump;
}

void save_graph_dump(const GraphDump& dump, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) raise(Errc::io, "cannot open " + path + " for writing");
  const std::string text = write_graph_dump(dump);
  f.write(text.data(), std::streamsize(text.size()));
  if (!f) raise(Errc::io, "write failed: " + path);
}

GraphDump load_graph_dump(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::io, "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return read_graph_dump(ss.str());
}

GraphDump make_graph_dump(const COGraph& graph, const EmbeddingTableSpec& embedding) {
  GraphDump dump;
  dump.embedding = embedding;
  dump.nodes = graph.nodes();
  dump.edges = graph.edges();
  return dump;
}

}  // namespace cograph
