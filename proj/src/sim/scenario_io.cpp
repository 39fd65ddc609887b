#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cograph/error.hpp"
#include "cograph/sim.hpp"

namespace cograph {

namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    raise(Errc::config, std::string(what) + " must be an array of three numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

WorldSpec world_from(const json& j) {
  WorldSpec world;
  world.name = j.value("name", std::string());
  const json& bounds = j.at("bounds");
  world.bounds_min = vec3_from(bounds.at("min"), "bounds.min");
  world.bounds_max = vec3_from(bounds.at("max"), "bounds.max");
  for (const json& o : j.value("objects", json::array())) {
    WorldObject obj;
    obj.category = o.at("category").get<std::string>();
    obj.center = vec3_from(o.at("center"), "object center");
    obj.extents = vec3_from(o.at("extents"), "object extents");
    world.objects.push_back(std::move(obj));
  }
  for (const json& wj : j.value("walls", json::array())) {
    WallSegment wall;
    wall.x0 = wj.at("x0").get<double>();
    wall.y0 = wj.at("y0").get<double>();
    wall.x1 = wj.at("x1").get<double>();
    wall.y1 = wj.at("y1").get<double>();
    wall.height = wj.value("height", wall.height);
    wall.thickness = wj.value("thickness", wall.thickness);
    world.walls.push_back(wall);
  }
  for (const json& rj : j.value("rooms", json::array())) {
    Room room;
    room.name = rj.value("name", std::string());
    room.x0 = rj.at("min")[0].get<double>();
    room.y0 = rj.at("min")[1].get<double>();
    room.x1 = rj.at("max")[0].get<double>();
    room.y1 = rj.at("max")[1].get<double>();
    world.rooms.push_back(std::move(room));
  }
  return world;
}

json world_to(const WorldSpec& world) {
  json j;
  j["name"] = world.name;
  j["bounds"] = {{"min", vec3_json(world.bounds_min)}, {"max", vec3_json(world.bounds_max)}};
  j["objects"] = json::array();
  for (const auto& o : world.objects)
    j["objects"].push_back(
        {{"category", o.category}, {"center", vec3_json(o.center)}, {"extents", vec3_json(o.extents)}});
  j["walls"] = json::array();
  for (const auto& w : world.walls)
    j["walls"].push_back({{"x0", w.x0},
                          {"y0", w.y0},
                          {"x1", w.x1},
                          {"y1", w.y1},
                          {"height", w.height},
                          {"thickness", w.thickness}});
  j["rooms"] = json::array();
  for (const auto& r : world.rooms)
    j["rooms"].push_back(
        {{"name", r.name}, {"min", json::array({r.x0, r.y0})}, {"max", json::array({r.x1, r.y1})}});
  return j;
}

TransmitMode mode_from(const std::string& s) {
  if (s == "compressed") return TransmitMode::compressed;
  if (s == "raw512") return TransmitMode::raw512;
  raise(Errc::config, "unknown transmit mode '" + s + "' (compressed|raw512)");
}

std::string mode_name(TransmitMode mode) {
  return mode == TransmitMode::compressed ? "compressed" : "raw512";
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(Errc::config, std::string("scenario JSON does not parse: ") + e.what());
  }
  try {
    ScenarioConfig cfg;
    cfg.name = j.value("name", cfg.name);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.embedding_seed = j.value("embedding_seed", cfg.embedding_seed);
    cfg.transmit_every = j.value("transmit_every", cfg.transmit_every);
    cfg.grid_resolution = j.value("grid_resolution", cfg.grid_resolution);
    cfg.theta_keep = j.value("theta_keep", cfg.theta_keep);
    cfg.pose_noise_sigma = j.value("pose_noise_sigma", cfg.pose_noise_sigma);
    cfg.threaded_mapping = j.value("threaded_mapping", cfg.threaded_mapping);
    cfg.mode = mode_from(j.value("mode", mode_name(cfg.mode)));
    if (j.contains("raster")) {
      const json& r = j.at("raster");
      cfg.raster.width = r.value("width", cfg.raster.width);
      cfg.raster.height = r.value("height", cfg.raster.height);
      cfg.raster.k.fx = r.value("fx", cfg.raster.k.fx);
      cfg.raster.k.fy = r.value("fy", cfg.raster.k.fy);
      cfg.raster.k.cx = r.value("cx", cfg.raster.k.cx);
      cfg.raster.k.cy = r.value("cy", cfg.raster.k.cy);
    }
    if (j.contains("mapping")) {
      const json& m = j.at("mapping");
      cfg.mapping.theta_overlap = m.value("theta_overlap", cfg.mapping.theta_overlap);
      cfg.mapping.voxel = m.value("voxel", cfg.mapping.voxel);
      cfg.mapping.linkage_radius = m.value("linkage_radius", cfg.mapping.linkage_radius);
      cfg.mapping.p_min = m.value("p_min", cfg.mapping.p_min);
      cfg.mapping.d_edge = m.value("d_edge", cfg.mapping.d_edge);
      cfg.mapping.match_radius = m.value("match_radius", cfg.mapping.match_radius);
      cfg.mapping.pos_update_eps = m.value("pos_update_eps", cfg.mapping.pos_update_eps);
      cfg.mapping.edge_margin = m.value("edge_margin", cfg.mapping.edge_margin);
    }
    if (j.contains("merging")) {
      const json& m = j.at("merging");
      cfg.merging.theta_sim = m.value("theta_sim", cfg.merging.theta_sim);
      cfg.merging.min_pairs = m.value("min_pairs", cfg.merging.min_pairs);
      cfg.merging.d_merge = m.value("d_merge", cfg.merging.d_merge);
    }
    cfg.world = world_from(j.at("world"));
    for (const json& tj : j.at("trajectories")) {
      RobotTrajectory traj;
      traj.frame_rate = tj.value("frame_rate", traj.frame_rate);
      traj.pose_noise_sigma = tj.value("pose_noise_sigma", traj.pose_noise_sigma);
      for (const json& pj : tj.at("poses")) {
        TrajectoryPose p;
        p.position = vec3_from(pj.at("position"), "pose position");
        p.yaw = pj.value("yaw", 0.0);
        traj.poses.push_back(p);
      }
      cfg.trajectories.push_back(std::move(traj));
    }
    validate_scenario(cfg);
    return cfg;
  } catch (const json::exception& e) {
    raise(Errc::config, std::string("scenario JSON has a bad field: ") + e.what());
  }
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json j;
  j["name"] = cfg.name;
  j["seed"] = cfg.seed;
  j["embedding_seed"] = cfg.embedding_seed;
  j["transmit_every"] = cfg.transmit_every;
  j["grid_resolution"] = cfg.grid_resolution;
  j["theta_keep"] = cfg.theta_keep;
  j["pose_noise_sigma"] = cfg.pose_noise_sigma;
  j["threaded_mapping"] = cfg.threaded_mapping;
  j["mode"] = mode_name(cfg.mode);
  j["raster"] = {{"width", cfg.raster.width}, {"height", cfg.raster.height},
                 {"fx", cfg.raster.k.fx},     {"fy", cfg.raster.k.fy},
                 {"cx", cfg.raster.k.cx},     {"cy", cfg.raster.k.cy}};
  j["mapping"] = {{"theta_overlap", cfg.mapping.theta_overlap},
                  {"voxel", cfg.mapping.voxel},
                  {"linkage_radius", cfg.mapping.linkage_radius},
                  {"p_min", cfg.mapping.p_min},
                  {"d_edge", cfg.mapping.d_edge},
                  {"match_radius", cfg.mapping.match_radius},
                  {"pos_update_eps", cfg.mapping.pos_update_eps},
                  {"edge_margin", cfg.mapping.edge_margin}};
  j["merging"] = {{"theta_sim", cfg.merging.theta_sim},
                  {"min_pairs", cfg.merging.min_pairs},
                  {"d_merge", cfg.merging.d_merge}};
  j["world"] = world_to(cfg.world);
  j["trajectories"] = json::array();
  for (const auto& traj : cfg.trajectories) {
    json tj;
    tj["frame_rate"] = traj.frame_rate;
    tj["pose_noise_sigma"] = traj.pose_noise_sigma;
    tj["poses"] = json::array();
    for (const auto& p : traj.poses)
      tj["poses"].push_back({{"position", vec3_json(p.position)}, {"yaw", p.yaw}});
    j["trajectories"].push_back(std::move(tj));
  }
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open scenario file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

}  // namespace cograph
