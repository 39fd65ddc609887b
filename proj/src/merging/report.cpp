#include <json.hpp>

#include "cograph/merging.hpp"

namespace cograph {

namespace {

nlohmann::json vec3_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

}  // namespace

std::string merge_report_json(const std::vector<TranslationCandidate>& candidates,
                              const MergeResult& result,
                              const std::optional<Vec3>& t_truth) {
  nlohmann::json j;
  j["chosen_t"] = vec3_json(result.t);

  nlohmann::json table = nlohmann::json::array();
  for (const TranslationCandidate& c : candidates) {
    table.push_back({{"source", {{"local", c.source.local}, {"remote", c.source.remote}}},
                     {"similarity", c.source.similarity},
                     {"t", vec3_json(c.t)},
                     {"merged_count", c.merged_count},
                     {"mean_residual", c.mean_residual}});
  }
  j["candidates"] = std::move(table);

  nlohmann::json fused = nlohmann::json::array();
  for (const auto& [local_id, remote_id] : result.fused)
    fused.push_back({{"local", local_id}, {"remote", remote_id}});
  j["fused_pairs"] = std::move(fused);
  j["merged_nodes"] = result.merged.node_count();
  j["merged_edges"] = result.merged.edge_count();
  j["any_unmatched"] = result.any_unmatched;

  if (t_truth) j["t_error"] = t_error(result.t, *t_truth);

  return j.dump(2);
}

}  // namespace cograph
