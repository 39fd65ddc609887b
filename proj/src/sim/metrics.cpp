#include <algorithm>
#include <array>
#include <cctype>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "cograph/error.hpp"
#include "cograph/metrics.hpp"

namespace cograph {

namespace {

using nlohmann::json;

// Full-precision decimal form; strtod on the result restores the exact bits.
std::string exact(double v) {
  std::ostringstream out;
  out << std::setprecision(17) << v;
  return out.str();
}

}  // namespace

QueryResult query_nodes(const std::vector<NodeRecord>& nodes, const EmbeddingTable& table,
                        const std::string& text, std::size_t k) {
  Feature512 q = table.embed_text(text);
  QueryResult result;
  result.text = text;
  for (const auto& n : nodes) {
    if (!n.has_feat512 || norm(n.feat512) <= 0.0) continue;
    result.hits.push_back({n.robot, n.id, n.label, cosine(q, n.feat512)});
  }
  std::sort(result.hits.begin(), result.hits.end(), [](const QueryHit& a, const QueryHit& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return std::tie(a.robot, a.node) < std::tie(b.robot, b.node);
  });
  if (result.hits.size() > k) result.hits.resize(k);
  return result;
}

QueryResult query_graph(const COGraph& graph, const EmbeddingTable& table,
                        const std::string& text, std::size_t k) {
  return query_nodes(graph.nodes(), table, text, k);
}

MetricsBundle compute_metrics(const ScenarioResult& result, const ScenarioConfig& cfg,
                              const EmbeddingTable& table, double d_gt) {
  if (result.locals.empty()) raise(Errc::empty_graph, "scenario result holds no robots");
  const COGraph& graph = result.views[0] ? result.views[0]->merged : result.locals[0];
  Vec3 origin = cfg.trajectories.at(0).poses.at(0).position;

  MetricsBundle m;
  m.scene = cfg.name;
  m.mode = result.mode == TransmitMode::compressed ? "compressed" : "raw512";
  m.pose_noise_sigma = cfg.pose_noise_sigma;
  for (const auto& traj : cfg.trajectories)
    m.pose_noise_sigma = std::max(m.pose_noise_sigma, traj.pose_noise_sigma);
  if (cfg.pose_noise_sigma > 0) m.pose_noise_sigma = cfg.pose_noise_sigma;

  // Object recall: a ground-truth object is recovered when a node of its
  // category lies within d_gt of the object center, in robot 0's frame.
  std::size_t recovered = 0;
  for (const auto& obj : cfg.world.objects) {
    FeatureLabel label = table.label_of(obj.category);
    Vec3 expected = obj.center - origin;
    bool found = false;
    for (const auto& n : graph.nodes())
      if (n.label == label && distance(n.pos, expected) <= d_gt) {
        found = true;
        break;
      }
    if (found) ++recovered;
  }
  m.r_obj = cfg.world.objects.empty() ? 0.0 : double(recovered) / double(cfg.world.objects.size());

  // Retrieval recall: one query per distinct category present in the world; a
  // query succeeds when the top-k contains any node of the queried category.
  std::set<std::string> queries;
  for (const auto& obj : cfg.world.objects) queries.insert(obj.category);
  auto recall_at = [&](std::size_t k) {
    if (queries.empty()) return 0.0;
    std::size_t ok = 0;
    for (const auto& text : queries) {
      FeatureLabel label = table.label_of(text);
      QueryResult r = query_graph(graph, table, text, k);
      for (const auto& hit : r.hits)
        if (hit.label == label) {
          ++ok;
          break;
        }
    }
    return double(ok) / double(queries.size());
  };
  m.r_at_1 = recall_at(1);
  m.r_at_5 = recall_at(5);

  m.t_err = result.mean_t_error();
  m.merge_events = result.merges.size();
  m.bytes_sent = result.stats.total_sent();
  m.bytes_received = result.stats.total_received();
  m.messages = result.stats.log.size();
  m.nodes = graph.node_count();
  m.edges = graph.edge_count();
  return m;
}

namespace {

json bundle_to_json(const MetricsBundle& m) {
  json j;
  j["scene"] = m.scene;
  j["mode"] = m.mode;
  j["pose_noise_sigma"] = m.pose_noise_sigma;
  j["r_obj"] = m.r_obj;
  j["r_at_1"] = m.r_at_1;
  j["r_at_5"] = m.r_at_5;
  j["t_err"] = m.t_err;
  j["merge_events"] = m.merge_events;
  j["bytes_sent"] = m.bytes_sent;
  j["bytes_received"] = m.bytes_received;
  j["messages"] = m.messages;
  j["nodes"] = m.nodes;
  j["edges"] = m.edges;
  return j;
}

MetricsBundle bundle_from_json(const json& j) {
  MetricsBundle m;
  m.scene = j.at("scene").get<std::string>();
  m.mode = j.at("mode").get<std::string>();
  m.pose_noise_sigma = j.at("pose_noise_sigma").get<double>();
  m.r_obj = j.at("r_obj").get<double>();
  m.r_at_1 = j.at("r_at_1").get<double>();
  m.r_at_5 = j.at("r_at_5").get<double>();
  m.t_err = j.at("t_err").get<double>();
  m.merge_events = j.at("merge_events").get<std::size_t>();
  m.bytes_sent = j.at("bytes_sent").get<std::size_t>();
  m.bytes_received = j.at("bytes_received").get<std::size_t>();
  m.messages = j.at("messages").get<std::size_t>();
  m.nodes = j.at("nodes").get<std::size_t>();
  m.edges = j.at("edges").get<std::size_t>();
  return m;
}

}  // namespace

std::string metrics_to_json(const MetricsBundle& m) { return bundle_to_json(m).dump(2) + "\n"; }

std::string metrics_json_array(const std::vector<MetricsBundle>& ms) {
  json arr = json::array();
  for (const auto& m : ms) arr.push_back(bundle_to_json(m));
  return arr.dump(2) + "\n";
}

std::vector<MetricsBundle> metrics_array_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(Errc::config, std::string("metrics JSON does not parse: ") + e.what());
  }
  try {
    std::vector<MetricsBundle> out;
    if (j.is_array())
      for (const auto& item : j) out.push_back(bundle_from_json(item));
    else
      out.push_back(bundle_from_json(j));
    return out;
  } catch (const json::exception& e) {
    raise(Errc::config, std::string("metrics JSON has a bad field: ") + e.what());
  }
}

std::string metrics_table(const std::vector<MetricsBundle>& ms) {
  std::vector<std::array<std::string, 5>> rows;
  rows.push_back({"scene", "dim", "pose", "t_err_m", "data_bytes"});
  for (const auto& m : ms) {
    std::string scene = m.scene.empty() ? "-" : m.scene;
    std::replace_if(
        scene.begin(), scene.end(), [](unsigned char c) { return std::isspace(c) != 0; }, '_');
    std::string dim = m.mode == "raw512" ? "512" : "3";
    std::string pose =
        m.pose_noise_sigma == 0.0 ? "gt" : "noisy(" + exact(m.pose_noise_sigma) + ")";
    rows.push_back({scene, dim, pose, exact(m.t_err), std::to_string(m.bytes_sent)});
  }

  std::array<std::size_t, 5> width{};
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      out << std::left << std::setw(int(width[c])) << rows[r][c];
      out << (c + 1 < rows[r].size() ? "  " : "");
    }
    out << '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c)
        out << std::string(width[c], '-') << (c + 1 < width.size() ? "  " : "");
      out << '\n';
    }
  }
  return out.str();
}

std::vector<MetricsBundle> parse_metrics_table(const std::string& text) {
  std::vector<MetricsBundle> out;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++row;
    if (row <= 2) continue;  // header and rule
    std::istringstream cells(line);
    std::string scene, dim, pose, t_err, bytes;
    if (!(cells >> scene >> dim >> pose >> t_err >> bytes))
      raise(Errc::config, "metrics table row is short: " + line);
    MetricsBundle m;
    m.scene = scene == "-" ? "" : scene;
    if (dim == "3")
      m.mode = "compressed";
    else if (dim == "512")
      m.mode = "raw512";
    else
      raise(Errc::config, "metrics table has an unknown dimension: " + dim);
    if (pose == "gt") {
      m.pose_noise_sigma = 0.0;
    } else if (pose.rfind("noisy(", 0) == 0 && pose.back() == ')') {
      m.pose_noise_sigma = std::stod(pose.substr(6, pose.size() - 7));
    } else {
      raise(Errc::config, "metrics table has an unknown pose source: " + pose);
    }
    m.t_err = std::stod(t_err);
    m.bytes_sent = std::stoull(bytes);
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace cograph
