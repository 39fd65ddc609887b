#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "cograph/corpus.hpp"
#include "cograph/metrics.hpp"
#include "cograph/sim.hpp"

using namespace cograph;

namespace {

const EmbeddingTable& table() {
  static EmbeddingTable t{default_embedding_spec()};
  return t;
}

// Open room with five distinct-category objects in a row, viewed by walking
// robots from the same side so both observe the same object faces.
WorldSpec five_object_room() {
  WorldSpec world;
  world.name = "five_object_room";
  world.bounds_min = {0, 0, 0};
  world.bounds_max = {10, 8, 3};
  world.objects = {
      {"chair", {4.5, 2.6, 0.45}, {0.5, 0.5, 0.9}},
      {"table", {5.0, 4.0, 0.40}, {1.0, 0.8, 0.8}},
      {"lamp", {5.2, 5.4, 0.75}, {0.3, 0.3, 1.5}},
      {"plant", {6.0, 3.0, 0.50}, {0.4, 0.4, 1.0}},
      {"sofa", {6.2, 5.0, 0.45}, {0.9, 1.8, 0.9}},
  };
  world.walls = {{0.2, 7.7, 9.8, 7.7, 2.5, 0.1}};  // behind the objects
  world.rooms = {{"living", 0, 0, 10, 8}};
  return world;
}

RobotTrajectory walk(Vec3 start, std::size_t steps, double dx) {
  RobotTrajectory traj;
  for (std::size_t k = 0; k < steps; ++k)
    traj.poses.push_back({{start.x + dx * double(k), start.y, start.z}, 0.0});
  return traj;
}

ScenarioConfig two_robot_scenario() {
  ScenarioConfig cfg;
  cfg.name = "two_robot_room";
  cfg.world = five_object_room();
  cfg.trajectories = {walk({1.0, 3.5, 1.2}, 20, 0.05), walk({1.2, 4.6, 1.2}, 20, 0.05)};
  cfg.transmit_every = 5;
  cfg.mode = TransmitMode::raw512;  // full features, no codec required
  cfg.seed = 99;
  return cfg;
}

bool same_nodes(const COGraph& a, const COGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    const NodeRecord &x = a.nodes()[i], &y = b.nodes()[i];
    if (x.id != y.id || x.label != y.label || x.robot != y.robot) return false;
    if (x.pos.x != y.pos.x || x.pos.y != y.pos.y || x.pos.z != y.pos.z) return false;
    if (x.bbox != y.bbox || x.keep_raw != y.keep_raw) return false;
    if (x.has_feat512 != y.has_feat512 || !(x.feat512 == y.feat512)) return false;
    if (x.feat3 != y.feat3) return false;
  }
  for (std::size_t i = 0; i < a.edge_count(); ++i)
    if (a.edges()[i].a != b.edges()[i].a || a.edges()[i].b != b.edges()[i].b) return false;
  return true;
}

}  // namespace

TEST_CASE("camera pose points the optical axis along the heading") {
  Pose p = camera_pose({{2, 3, 1.5}, 0.0});
  Vec3 optical = p.rotation * Vec3{0, 0, 1};
  CHECK(optical.x == doctest::Approx(1.0));
  CHECK(optical.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(optical.z == doctest::Approx(0.0).epsilon(1e-12));
  Vec3 img_right = p.rotation * Vec3{1, 0, 0};
  CHECK(img_right.y == doctest::Approx(-1.0));  // image right = robot's right
  Vec3 img_down = p.rotation * Vec3{0, 1, 0};
  CHECK(img_down.z == doctest::Approx(-1.0));  // image down = toward the floor
  CHECK(p.translation.x == 2.0);
  CHECK(p.translation.z == 1.5);
  CHECK(orthonormality_error(p.rotation) < 1e-12);
  CHECK(p.rotation.det() == doctest::Approx(1.0));

  Pose q = camera_pose({{0, 0, 0}, 3.14159265358979323846 / 2});
  Vec3 turned = q.rotation * Vec3{0, 0, 1};
  CHECK(turned.x == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(turned.y == doctest::Approx(1.0));
}

TEST_CASE("rendering one box yields exact front-face depths") {
  WorldSpec world;
  world.bounds_min = {-1, -3, 0};
  world.bounds_max = {6, 3, 3};
  world.objects = {{"table", {4.0, 0.0, 0.5}, {1.0, 1.0, 1.0}}};

  RasterSpec raster;
  raster.width = 64;
  raster.height = 48;
  raster.k = {60, 60, 32, 24};

  RobotTrajectory traj;
  traj.poses = {{{0, 0, 0.5}, 0.0}};
  auto frames = generate_frames(world, traj, raster, table());
  REQUIRE(frames.size() == 1);
  const Frame& f = frames[0];

  // The box face at x = 3.5 is hit wherever |u-32| and |v-24| stay within
  // 0.5 * fx / 3.5 = 8.57 pixels, and the entry parameter is exactly 3.5
  // because the world-x ray component is exactly 1 at yaw 0.
  CHECK(f.depth.at(32, 24) == 3.5f);
  std::size_t foreground = 0;
  std::uint16_t label = table().label_of("table");
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 64; ++u) {
      FoPixel px = decode_fo_pixel(f.fo.at(u, v));
      if (px.background) continue;
      ++foreground;
      CHECK(px.label == label);
      CHECK(px.index == 0);
      CHECK(f.depth.at(std::uint32_t(u), std::uint32_t(v)) == 3.5f);
    }
  CHECK(foreground == 289);  // 17 x 17 pixel square
  CHECK(f.depth.at(0, 0) == 0.0f);  // open space stays invalid

  REQUIRE(f.features.count(0) == 1);
  CHECK(f.features.at(0) == table().instance_vector("table", 0, 0.02));

  // Back-projecting the rendered frame must land on the visible face.
  auto clouds = back_project(f.fo, f.depth, f.pose, f.k, f.features);
  REQUIRE(clouds.size() == 1);
  CHECK(clouds[0].label == label);
  CHECK(clouds[0].points.size() == 289);
  for (const Vec3& p : clouds[0].points) {
    CHECK(p.x == doctest::Approx(3.5).epsilon(1e-5));
    CHECK(p.y >= -0.5 - 1e-4);
    CHECK(p.y <= 0.5 + 1e-4);
    CHECK(p.z >= 0.0 - 1e-4);
    CHECK(p.z <= 1.0 + 1e-4);
  }
}

TEST_CASE("empty worlds render to background everywhere") {
  WorldSpec world;
  world.bounds_min = {-5, -5, 0};
  world.bounds_max = {5, 5, 3};
  RobotTrajectory traj;
  traj.poses = {{{0, 0, 1}, 0.0}, {{0.5, 0, 1}, 1.0}};
  RasterSpec raster;
  raster.width = 32;
  raster.height = 24;
  raster.k = {30, 30, 16, 12};
  auto frames = generate_frames(world, traj, raster, table());
  REQUIRE(frames.size() == 2);
  for (const Frame& f : frames) {
    CHECK(f.features.empty());
    for (int v = 0; v < 24; ++v)
      for (int u = 0; u < 32; ++u) {
        CHECK(f.fo.at(u, v) == kFoBackground);
        CHECK(f.depth.at(std::uint32_t(u), std::uint32_t(v)) == 0.0f);
      }
  }
}

TEST_CASE("walls occlude objects but never label pixels") {
  WorldSpec world;
  world.bounds_min = {-1, -3, 0};
  world.bounds_max = {6, 3, 3};
  world.objects = {{"table", {4.0, 0.0, 0.5}, {1.0, 1.0, 1.0}}};
  world.walls = {{2.0, -2.0, 2.0, 2.0, 2.0, 0.1}};

  RasterSpec raster;
  raster.width = 64;
  raster.height = 48;
  raster.k = {60, 60, 32, 24};
  RobotTrajectory traj;
  traj.poses = {{{0, 0, 0.5}, 0.0}};

  auto frames = generate_frames(world, traj, raster, table());
  const Frame& f = frames[0];
  CHECK(f.depth.at(32, 24) == 1.95f);  // wall front face
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 64; ++u) CHECK(f.fo.at(u, v) == kFoBackground);
  CHECK(f.features.empty());

  world.walls.clear();
  const Frame clear = generate_frames(world, traj, raster, table())[0];
  CHECK(clear.depth.at(32, 24) == 3.5f);
  CHECK(clear.features.count(0) == 1);
}

TEST_CASE("wall rasterization marks the footprint columns") {
  WorldSpec world;
  world.bounds_min = {0, 0, 0};
  world.bounds_max = {2, 2, 2};
  world.walls = {{1.0, 0.0, 1.0, 2.0, 2.0, 0.1}};

  OccupancyGrid grid = rasterize_walls(world, 0.5, Vec3{});
  REQUIRE(grid.width == 4);
  REQUIRE(grid.height == 4);
  CHECK(grid.ox == 0.0);
  for (std::uint32_t y = 0; y < 4; ++y)
    for (std::uint32_t x = 0; x < 4; ++x) {
      bool wall_column = (x == 1 || x == 2);  // footprint x in [0.95, 1.05]
      CHECK(grid.at(x, y) == (wall_column ? Cell::occupied : Cell::free));
    }

  // Shifting the frame moves the origin but not the occupancy pattern.
  OccupancyGrid shifted = rasterize_walls(world, 0.5, Vec3{0.5, 0, 0});
  CHECK(shifted.ox == -0.5);
  CHECK(shifted.oy == 0.0);
  for (std::uint32_t y = 0; y < 4; ++y)
    for (std::uint32_t x = 0; x < 4; ++x) CHECK(shifted.at(x, y) == grid.at(x, y));

  CHECK_THROWS_AS(rasterize_walls(world, 0.0, Vec3{}), Error);
}

TEST_CASE("pose noise is seeded and vanishes at sigma zero") {
  RobotTrajectory traj = walk({1, 2, 1.5}, 6, 0.1);

  RobotTrajectory same = inject_pose_noise(traj, 0.0, 42);
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    CHECK(same.poses[i].position.x == traj.poses[i].position.x);
    CHECK(same.poses[i].position.y == traj.poses[i].position.y);
    CHECK(same.poses[i].position.z == traj.poses[i].position.z);
  }

  RobotTrajectory a = inject_pose_noise(traj, 0.1, 7);
  RobotTrajectory b = inject_pose_noise(traj, 0.1, 7);
  RobotTrajectory c = inject_pose_noise(traj, 0.1, 8);
  bool all_same_seed = true, any_differs_across_seeds = false, any_moved = false;
  for (std::size_t i = 0; i < traj.poses.size(); ++i) {
    all_same_seed &= a.poses[i].position.x == b.poses[i].position.x &&
                     a.poses[i].position.y == b.poses[i].position.y &&
                     a.poses[i].position.z == b.poses[i].position.z;
    any_differs_across_seeds |= a.poses[i].position.x != c.poses[i].position.x;
    any_moved |= a.poses[i].position.x != traj.poses[i].position.x;
    CHECK(a.poses[i].yaw == traj.poses[i].yaw);
  }
  CHECK(all_same_seed);
  CHECK(any_differs_across_seeds);
  CHECK(any_moved);
  CHECK_THROWS_AS(inject_pose_noise(traj, -0.5, 1), Error);
}

TEST_CASE("scenario json round trips every field") {
  ScenarioConfig cfg = two_robot_scenario();
  cfg.mapping.p_min = 12;
  cfg.mapping.d_edge = 2.5;
  cfg.merging.theta_sim = 0.9;
  cfg.merging.min_pairs = 4;
  cfg.theta_keep = 0.65;
  cfg.pose_noise_sigma = 0.03;
  cfg.threaded_mapping = true;
  cfg.raster.width = 80;
  cfg.raster.k.cx = 40;
  cfg.embedding_seed = 11;

  ScenarioConfig back = scenario_from_json(scenario_to_json(cfg));
  CHECK(back.name == cfg.name);
  CHECK(back.seed == cfg.seed);
  CHECK(back.embedding_seed == cfg.embedding_seed);
  CHECK(back.transmit_every == cfg.transmit_every);
  CHECK(back.grid_resolution == cfg.grid_resolution);
  CHECK(back.theta_keep == cfg.theta_keep);
  CHECK(back.pose_noise_sigma == cfg.pose_noise_sigma);
  CHECK(back.threaded_mapping == cfg.threaded_mapping);
  CHECK(back.mode == cfg.mode);
  CHECK(back.raster.width == cfg.raster.width);
  CHECK(back.raster.height == cfg.raster.height);
  CHECK(back.raster.k.cx == cfg.raster.k.cx);
  CHECK(back.mapping.p_min == cfg.mapping.p_min);
  CHECK(back.mapping.d_edge == cfg.mapping.d_edge);
  CHECK(back.mapping.pos_update_eps == cfg.mapping.pos_update_eps);
  CHECK(back.merging.theta_sim == cfg.merging.theta_sim);
  CHECK(back.merging.min_pairs == cfg.merging.min_pairs);
  CHECK(back.world.name == cfg.world.name);
  CHECK(back.world.bounds_max.x == cfg.world.bounds_max.x);
  REQUIRE(back.world.objects.size() == cfg.world.objects.size());
  for (std::size_t i = 0; i < cfg.world.objects.size(); ++i) {
    CHECK(back.world.objects[i].category == cfg.world.objects[i].category);
    CHECK(back.world.objects[i].center.x == cfg.world.objects[i].center.x);
    CHECK(back.world.objects[i].extents.z == cfg.world.objects[i].extents.z);
  }
  REQUIRE(back.world.walls.size() == 1);
  CHECK(back.world.walls[0].y1 == cfg.world.walls[0].y1);
  CHECK(back.world.walls[0].thickness == cfg.world.walls[0].thickness);
  REQUIRE(back.world.rooms.size() == 1);
  CHECK(back.world.rooms[0].name == "living");
  REQUIRE(back.trajectories.size() == 2);
  CHECK(back.trajectories[1].poses.size() == cfg.trajectories[1].poses.size());
  CHECK(back.trajectories[1].poses[3].position.x == cfg.trajectories[1].poses[3].position.x);

  // Minimal scenario: everything except world and trajectories defaults.
  ScenarioConfig minimal = scenario_from_json(R"({
    "world": {"bounds": {"min": [0,0,0], "max": [4,4,3]}},
    "trajectories": [{"poses": [{"position": [1,1,1]}]}]
  })");
  CHECK(minimal.transmit_every == 10);
  CHECK(minimal.mode == TransmitMode::compressed);
  CHECK(minimal.raster.width == 96);
  CHECK(minimal.trajectories[0].poses[0].yaw == 0.0);

  CHECK_THROWS_AS(scenario_from_json("not json"), Error);
  CHECK_THROWS_AS(scenario_from_json("{}"), Error);  // world missing
  std::string text = scenario_to_json(cfg);
  CHECK_THROWS_AS(scenario_from_json(std::string(text).replace(text.find("raw512"), 6, "raw999")),
                  Error);
}

TEST_CASE("scenario validation rejects broken configs") {
  ScenarioConfig cfg = two_robot_scenario();
  CHECK_NOTHROW(validate_scenario(cfg));

  ScenarioConfig no_robots = cfg;
  no_robots.trajectories.clear();
  CHECK_THROWS_AS(validate_scenario(no_robots), Error);

  ScenarioConfig no_poses = cfg;
  no_poses.trajectories[0].poses.clear();
  CHECK_THROWS_AS(validate_scenario(no_poses), Error);

  ScenarioConfig never_sends = cfg;
  never_sends.transmit_every = 0;
  CHECK_THROWS_AS(validate_scenario(never_sends), Error);

  ScenarioConfig slanted_wall = cfg;
  slanted_wall.world.walls.push_back({0.5, 0.5, 2.0, 2.0, 2.0, 0.1});
  CHECK_THROWS_AS(validate_scenario(slanted_wall), Error);

  ScenarioConfig poking = cfg;
  poking.world.objects[0].center.x = 9.9;  // extents cross the boundary
  CHECK_THROWS_AS(validate_scenario(poking), Error);

  ScenarioConfig flat = cfg;
  flat.world.objects[0].extents.y = 0.0;
  CHECK_THROWS_AS(validate_scenario(flat), Error);

  ScenarioConfig unlisted = cfg;
  unlisted.world.objects[0].category = "zeppelin";
  CHECK_NOTHROW(validate_scenario(unlisted));  // vocabulary is checked at run time
  CHECK_THROWS_AS(run_scenario(unlisted, nullptr), Error);
}

TEST_CASE("channel delivers per-pair fifo and accounts every byte") {
  Channel ch;
  ch.send(1, 2, 0, "delta", {1, 2, 3, 4, 5});
  ch.send(1, 2, 1, "delta", {6, 7});
  ch.send(3, 2, 1, "delta", {8});
  ch.send(2, 1, 2, "delta", {9, 9, 9});

  auto first = ch.receive(2);
  REQUIRE(first);
  CHECK(first->from == 1);
  CHECK(first->bytes == std::vector<std::uint8_t>{1, 2, 3, 4, 5});
  auto second = ch.receive(2);
  REQUIRE(second);
  CHECK(second->from == 1);  // lower sender id drains first
  CHECK(second->bytes.size() == 2);
  auto third = ch.receive(2);
  REQUIRE(third);
  CHECK(third->from == 3);
  CHECK_FALSE(ch.receive(2));
  CHECK(ch.receive(1));
  CHECK_FALSE(ch.receive(1));

  const ChannelStats& stats = ch.stats();
  CHECK(stats.sent.at(1) == 7);
  CHECK(stats.sent.at(3) == 1);
  CHECK(stats.sent.at(2) == 3);
  CHECK(stats.received.at(2) == 8);
  CHECK(stats.received.at(1) == 3);
  CHECK(stats.total_sent() == 11);
  CHECK(stats.total_received() == 11);

  CHECK(channel_log_csv(stats) ==
        "frame,from,to,type,bytes\n"
        "0,1,2,delta,5\n"
        "1,1,2,delta,2\n"
        "1,3,2,delta,1\n"
        "2,2,1,delta,3\n");
}

TEST_CASE("two-robot scenario maps, merges, and conserves bytes") {
  ScenarioConfig cfg = two_robot_scenario();
  ScenarioResult result = run_scenario(cfg, nullptr);

  REQUIRE(result.locals.size() == 2);
  std::set<std::uint16_t> expected_labels;
  for (const auto& obj : cfg.world.objects) expected_labels.insert(table().label_of(obj.category));
  for (const COGraph& g : result.locals) {
    CHECK(g.node_count() >= 4);
    CHECK(g.edge_count() >= 1);
    // Transient cluster splits can leave feature-less ghost nodes behind (the
    // wire protocol has no delete), but every category must be represented by
    // at least one feature-bearing node.
    std::set<std::uint16_t> covered;
    for (const NodeRecord& n : g.nodes()) {
      CHECK(expected_labels.count(n.label) == 1);
      if (n.has_feat512) covered.insert(n.label);
    }
    CHECK(covered == expected_labels);
  }

  // Both robots eventually see enough shared objects to merge.
  REQUIRE(result.views[0].has_value());
  REQUIRE(result.views[1].has_value());
  CHECK(result.views[0]->fused.size() >= 3);
  REQUIRE_FALSE(result.merges.empty());
  Vec3 truth01 = cfg.trajectories[1].poses[0].position - cfg.trajectories[0].poses[0].position;
  for (const MergeEvent& ev : result.merges) {
    Vec3 expected = ev.receiver == 1 ? truth01 : truth01 * -1.0;
    CHECK(ev.t_truth.x == expected.x);
    CHECK(ev.t_truth.y == expected.y);
    CHECK(ev.t_truth.z == expected.z);
    CHECK(ev.error <= 0.3);
    CHECK_FALSE(ev.report_json.empty());
  }
  CHECK(result.mean_t_error() <= 0.3);

  // Byte ledger: everything sent was delivered, and messages are well formed.
  CHECK(result.stats.total_sent() > 0);
  CHECK(result.stats.total_sent() == result.stats.total_received());
  std::size_t logged = 0;
  for (const MessageLogEntry& e : result.stats.log) {
    logged += e.bytes;
    CHECK(e.bytes > kWireHeaderBytes);  // empty deltas never ride the channel
    CHECK((e.bytes - kWireHeaderBytes) % 3 == 0);  // raw nodes 531 B, edges 3 B
    CHECK(e.type == "delta");
    CHECK(e.from != e.to);
  }
  CHECK(logged == result.stats.total_sent());
}

TEST_CASE("scenario runs are deterministic, threaded or not") {
  ScenarioConfig cfg = two_robot_scenario();
  ScenarioResult a = run_scenario(cfg, nullptr);
  ScenarioResult b = run_scenario(cfg, nullptr);
  cfg.threaded_mapping = true;
  ScenarioResult c = run_scenario(cfg, nullptr);

  for (const ScenarioResult* other : {&b, &c}) {
    REQUIRE(other->locals.size() == a.locals.size());
    for (std::size_t r = 0; r < a.locals.size(); ++r)
      CHECK(same_nodes(a.locals[r], other->locals[r]));
    REQUIRE(other->merges.size() == a.merges.size());
    for (std::size_t i = 0; i < a.merges.size(); ++i) {
      CHECK(a.merges[i].t_estimated.x == other->merges[i].t_estimated.x);
      CHECK(a.merges[i].t_estimated.y == other->merges[i].t_estimated.y);
      CHECK(a.merges[i].t_estimated.z == other->merges[i].t_estimated.z);
      CHECK(a.merges[i].report_json == other->merges[i].report_json);
    }
    REQUIRE(other->stats.log.size() == a.stats.log.size());
    for (std::size_t i = 0; i < a.stats.log.size(); ++i) {
      CHECK(a.stats.log[i].bytes == other->stats.log[i].bytes);
      CHECK(a.stats.log[i].frame == other->stats.log[i].frame);
      CHECK(a.stats.log[i].from == other->stats.log[i].from);
    }
    REQUIRE(other->views[0].has_value());
    CHECK(same_nodes(a.views[0]->merged, other->views[0]->merged));
    CHECK(a.views[0]->fused == other->views[0]->fused);
  }
}

TEST_CASE("static scenes stop transmitting once the map settles") {
  ScenarioConfig cfg = two_robot_scenario();
  cfg.trajectories = {walk({1.0, 3.5, 1.2}, 12, 0.0), walk({1.2, 4.6, 1.2}, 12, 0.0)};
  cfg.transmit_every = 6;  // flushes after frames 6 and 12
  ScenarioResult result = run_scenario(cfg, nullptr);

  // A static camera reproduces the identical snapshot every frame, so the
  // second flush has nothing new and is suppressed entirely.
  REQUIRE(result.stats.log.size() == 2);
  for (const MessageLogEntry& e : result.stats.log) {
    CHECK(e.frame == 5);
    std::size_t r = std::size_t(e.from) - 1;
    CHECK(e.bytes == expected_wire_size(result.locals[r].node_count(),
                                        result.locals[r].edge_count(), 0, TransmitMode::raw512));
  }
}

TEST_CASE("a single robot never touches the channel") {
  ScenarioConfig cfg = two_robot_scenario();
  cfg.trajectories = {cfg.trajectories[0]};
  ScenarioResult result = run_scenario(cfg, nullptr);

  CHECK(result.stats.log.empty());
  CHECK(result.stats.total_sent() == 0);
  CHECK(result.stats.total_received() == 0);
  CHECK(result.merges.empty());
  CHECK_FALSE(result.views[0].has_value());
  CHECK(result.locals[0].node_count() >= 4);

  EmbeddingTable tbl(default_embedding_spec(cfg.embedding_seed));
  MetricsBundle m = compute_metrics(result, cfg, tbl);
  CHECK(m.bytes_sent == 0);
  CHECK(m.merge_events == 0);
  CHECK(m.t_err == 0.0);
  CHECK(m.nodes == result.locals[0].node_count());
  CHECK(m.r_obj >= 0.6);  // local map alone already recovers most objects
}

TEST_CASE("metrics capture recall, translation error, and the byte ledger") {
  ScenarioConfig cfg = two_robot_scenario();
  ScenarioResult result = run_scenario(cfg, nullptr);
  EmbeddingTable tbl(default_embedding_spec(cfg.embedding_seed));
  MetricsBundle m = compute_metrics(result, cfg, tbl);

  CHECK(m.scene == "two_robot_room");
  CHECK(m.mode == "raw512");
  CHECK(m.pose_noise_sigma == 0.0);
  CHECK(m.r_obj >= 0.8);
  CHECK(m.r_at_1 == 1.0);  // five well-separated categories
  CHECK(m.r_at_5 == 1.0);
  CHECK(m.t_err == result.mean_t_error());
  CHECK(m.merge_events == result.merges.size());
  CHECK(m.bytes_sent == result.stats.total_sent());
  CHECK(m.bytes_received == result.stats.total_received());
  CHECK(m.messages == result.stats.log.size());
  CHECK(m.nodes == result.views[0]->merged.node_count());
  CHECK(m.edges == result.views[0]->merged.edge_count());

  // Determinism end to end: the serialized metrics are byte-identical.
  ScenarioResult again = run_scenario(cfg, nullptr);
  CHECK(metrics_to_json(compute_metrics(again, cfg, tbl)) == metrics_to_json(m));
}

TEST_CASE("metrics serialize to json and a parseable table") {
  MetricsBundle a;
  a.scene = "flat one";
  a.mode = "compressed";
  a.pose_noise_sigma = 0.05;
  a.r_obj = 0.875;
  a.r_at_1 = 1.0;
  a.r_at_5 = 1.0;
  a.t_err = 0.12345678901234567;
  a.merge_events = 3;
  a.bytes_sent = 56822;
  a.bytes_received = 56822;
  a.messages = 14;
  a.nodes = 23;
  a.edges = 31;
  MetricsBundle b;
  b.scene = "flat_two";
  b.mode = "raw512";
  b.t_err = 1.0 / 3.0;
  b.bytes_sent = 1209384;

  auto parsed = metrics_array_from_json(metrics_json_array({a, b}));
  REQUIRE(parsed.size() == 2);
  CHECK(parsed[0].scene == a.scene);
  CHECK(parsed[0].mode == a.mode);
  CHECK(parsed[0].pose_noise_sigma == a.pose_noise_sigma);
  CHECK(parsed[0].r_obj == a.r_obj);
  CHECK(parsed[0].t_err == a.t_err);
  CHECK(parsed[0].merge_events == a.merge_events);
  CHECK(parsed[0].bytes_sent == a.bytes_sent);
  CHECK(parsed[0].messages == a.messages);
  CHECK(parsed[0].nodes == a.nodes);
  CHECK(parsed[1].mode == "raw512");
  CHECK(parsed[1].t_err == b.t_err);

  std::string tab = metrics_table({a, b});
  auto rows = parse_metrics_table(tab);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].scene == "flat_one");  // whitespace flattened for the table
  CHECK(rows[0].mode == "compressed");
  CHECK(rows[0].pose_noise_sigma == a.pose_noise_sigma);  // exact round trip
  CHECK(rows[0].t_err == a.t_err);
  CHECK(rows[0].bytes_sent == a.bytes_sent);
  CHECK(rows[1].scene == "flat_two");
  CHECK(rows[1].mode == "raw512");
  CHECK(rows[1].pose_noise_sigma == 0.0);
  CHECK(rows[1].t_err == b.t_err);
  CHECK(rows[1].bytes_sent == b.bytes_sent);

  CHECK_THROWS_AS(parse_metrics_table("h\n-\nscene 7 gt 0.1 12\n"), Error);
  CHECK_THROWS_AS(parse_metrics_table("h\n-\nscene 3 sideways 0.1 12\n"), Error);
  CHECK_THROWS_AS(parse_metrics_table("h\n-\nscene 3 gt\n"), Error);
}

TEST_CASE("text queries rank graph nodes by feature similarity") {
  COGraph g(1);
  auto add = [&](const std::string& cat, Vec3 pos) {
    NodeRecord n;
    n.pos = pos;
    n.label = table().label_of(cat);
    n.feat512 = table().category_vector(cat);
    n.has_feat512 = true;
    return g.add_node(n);
  };
  NodeId chair_a = add("chair", {0, 0, 0});
  NodeId lamp = add("lamp", {1, 0, 0});
  NodeId chair_b = add("chair", {2, 0, 0});
  NodeRecord bare;
  bare.pos = {3, 0, 0};
  bare.label = table().label_of("vase");
  NodeId featureless = g.add_node(bare);

  QueryResult top = query_graph(g, table(), "chair", 2);
  REQUIRE(top.hits.size() == 2);
  CHECK(top.hits[0].similarity == doctest::Approx(1.0));
  CHECK(top.hits[1].similarity == doctest::Approx(1.0));
  // Identical similarities fall back to (robot, node id) order.
  CHECK(top.hits[0].node == chair_a);
  CHECK(top.hits[1].node == chair_b);
  CHECK(top.hits[0].label == table().label_of("chair"));

  QueryResult one = query_graph(g, table(), "lamp", 1);
  REQUIRE(one.hits.size() == 1);
  CHECK(one.hits[0].node == lamp);

  QueryResult all = query_graph(g, table(), "lamp", 99);
  CHECK(all.hits.size() == 3);  // the featureless node never ranks
  for (const QueryHit& h : all.hits) CHECK(h.node != featureless);

  COGraph empty(2);
  CHECK(query_graph(empty, table(), "chair", 5).hits.empty());
}
