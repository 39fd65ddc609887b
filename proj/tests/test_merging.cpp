#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>
#include <vector>

#include "cograph/corpus.hpp"
#include "cograph/embedding.hpp"
#include "cograph/merging.hpp"
#include "cograph/rng.hpp"

using namespace cograph;

namespace {

const EmbeddingTable& table() {
  static EmbeddingTable t{default_embedding_spec()};
  return t;
}

using Items = std::vector<std::pair<std::string, Vec3>>;

COGraph make_local(RobotId robot, const Items& items) {
  COGraph g(robot);
  for (const auto& [cat, pos] : items) {
    NodeRecord n;
    n.pos = pos;
    n.label = table().label_of(cat);
    n.feat512 = table().category_vector(cat);
    n.has_feat512 = true;
    n.set_bbox_extents({0.4, 0.4, 0.4});
    g.add_node(n);
  }
  return g;
}

ReceivedGraph make_remote(RobotId robot, const Items& items) {
  ReceivedGraph rg;
  rg.robot = robot;
  NodeId id = 0;
  for (const auto& [cat, pos] : items) {
    ReceivedNode n;
    n.wire.robot = robot;
    n.wire.id = id;
    n.wire.pos = {float(pos.x), float(pos.y), float(pos.z)};
    n.wire.label = table().label_of(cat);
    n.wire.bbox = {4, 4, 4};
    n.raw_feature = feature_to_bytes(table().category_vector(cat));
    n.raw_mode = true;
    rg.nodes[id] = n;
    ++id;
  }
  return rg;
}

Items shifted(const Items& items, const Vec3& offset) {
  Items out = items;
  for (auto& [cat, pos] : out) pos += offset;
  return out;
}

// Positions chosen to be exactly representable in f32 so wire rounding is
// a no-op and exact-arithmetic checks hold.
const Items kFiveObjects = {{"chair", {0.0, 0.0, 0.0}},
                            {"table", {1.5, 0.25, 0.0}},
                            {"lamp", {-0.75, 1.0, 0.5}},
                            {"bed", {2.0, 2.0, 0.0}},
                            {"plant", {0.5, -1.25, 0.25}}};

}  // namespace

TEST_CASE("received features: raw payloads round-trip, compressed needs a codec") {
  const Feature512 f = table().category_vector("vase");
  ReceivedNode n;
  n.raw_feature = feature_to_bytes(f);
  CHECK(cosine(received_feature(n, nullptr), f) > 0.995);

  ReceivedNode compressed;  // feat3 only
  try {
    received_feature(compressed, nullptr);
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::config);
  }
}

TEST_CASE("place recognition: self-match, disjoint vocabularies, pair gate") {
  MergeConfig cfg;
  const COGraph local = make_local(1, kFiveObjects);

  SUBCASE("a copy of the local graph matches node for node") {
    const auto pairs = place_recognition(local, make_remote(2, kFiveObjects), nullptr, cfg);
    REQUIRE(pairs.has_value());
    REQUIRE(pairs->size() == kFiveObjects.size());
    for (std::size_t i = 0; i < pairs->size(); ++i) {
      CHECK((*pairs)[i].local == NodeId(i));
      CHECK((*pairs)[i].remote == NodeId(i));
      CHECK((*pairs)[i].similarity > 0.99);
    }
    // Ordered by (local, remote).
    for (std::size_t i = 1; i < pairs->size(); ++i)
      CHECK(std::make_pair((*pairs)[i - 1].local, (*pairs)[i - 1].remote) <
            std::make_pair((*pairs)[i].local, (*pairs)[i].remote));
  }

  SUBCASE("disjoint category sets are insufficient") {
    const Items other = {{"sink", {0, 0, 0}}, {"toilet", {1, 0, 0}}, {"towel", {2, 0, 0}},
                         {"oven", {3, 0, 0}}, {"kettle", {4, 0, 0}}};
    CHECK_FALSE(place_recognition(local, make_remote(2, other), nullptr, cfg).has_value());
  }

  SUBCASE("an unreachable similarity gate yields no pairs") {
    MergeConfig strict = cfg;
    strict.theta_sim = 1.0 + 1e-9;
    CHECK_FALSE(place_recognition(local, make_remote(2, kFiveObjects), nullptr, strict).has_value());
  }

  SUBCASE("the pair count is compared against min_pairs") {
    const Items two = {{"chair", {0, 0, 0}}, {"table", {1, 0, 0}}};
    const auto remote = make_remote(2, two);
    CHECK_FALSE(place_recognition(local, remote, nullptr, cfg).has_value());  // 2 < 3
    MergeConfig loose = cfg;
    loose.min_pairs = 2;
    const auto pairs = place_recognition(local, remote, nullptr, loose);
    REQUIRE(pairs.has_value());
    CHECK(pairs->size() == 2);
  }

  SUBCASE("local nodes without a stored feature cannot match") {
    COGraph bare(1);
    for (const auto& [cat, pos] : kFiveObjects) {
      NodeRecord n;
      n.pos = pos;
      n.label = table().label_of(cat);
      bare.add_node(n);  // has_feat512 stays false
    }
    CHECK_FALSE(place_recognition(bare, make_remote(2, kFiveObjects), nullptr, cfg).has_value());
  }
}

TEST_CASE("translation estimation: exact shifts and the empty-pairs error") {
  MergeConfig cfg;
  const COGraph local = make_local(1, kFiveObjects);
  const Mat3 identity = Mat3::identity();

  SUBCASE("a rigid shift is recovered exactly") {
    const ReceivedGraph remote = make_remote(2, shifted(kFiveObjects, {2.0, 0.0, 0.0}));
    const auto pairs = place_recognition(local, remote, nullptr, cfg);
    REQUIRE(pairs.has_value());
    const TranslationCandidate win = estimate_translation(*pairs, local, remote, identity, cfg);
    CHECK(win.t.x == -2.0);
    CHECK(win.t.y == 0.0);
    CHECK(win.t.z == 0.0);
    CHECK(win.merged_count == kFiveObjects.size());
    CHECK(win.mean_residual == 0.0);
  }

  SUBCASE("no pairs is an error") {
    const ReceivedGraph remote = make_remote(2, kFiveObjects);
    try {
      estimate_translation({}, local, remote, identity, cfg);
      FAIL("expected no_pairs");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::no_pairs);
    }
  }
}

TEST_CASE("translation estimation ignores repeated-object decoys") {
  // Two chairs with identical features at different spots, plus three unique
  // objects. Only a correct alignment scores all pairs.
  MergeConfig cfg;
  const Items scene = {{"chair", {0.0, 0.0, 0.0}},
                       {"chair", {5.0, 5.0, 0.0}},
                       {"lamp", {1.0, 0.0, 0.0}},
                       {"vase", {0.0, 1.0, 0.0}},
                       {"clock", {1.0, 1.0, 0.0}}};
  const Vec3 t_true{-3.0, 0.0, 0.0};
  const COGraph local = make_local(1, scene);
  const ReceivedGraph remote = make_remote(2, shifted(scene, {3.0, 0.0, 0.0}));
  const auto pairs = place_recognition(local, remote, nullptr, cfg);
  REQUIRE(pairs.has_value());
  CHECK(pairs->size() == 7);  // 2x2 chair pairs + 3 unique self-pairs

  const Mat3 identity = Mat3::identity();
  const TranslationCandidate win = estimate_translation(*pairs, local, remote, identity, cfg);

  // Independent brute force over all candidates.
  std::size_t best_score = 0;
  for (const MatchPair& p : *pairs) {
    const Vec3 t = local.node(p.local).pos - remote.nodes.at(p.remote).pos();
    std::size_t score = 0;
    for (const MatchPair& q : *pairs) {
      const Vec3 mapped = remote.nodes.at(q.remote).pos() + t;
      if (distance(local.node(q.local).pos, mapped) <= cfg.d_merge) ++score;
    }
    best_score = std::max(best_score, score);
  }
  CHECK(win.merged_count == best_score);
  CHECK(win.merged_count == 5);  // both chairs and all three uniques align
  CHECK(win.t.x == t_true.x);
  CHECK(win.t.y == t_true.y);
  CHECK(win.t.z == t_true.z);
  CHECK(win.source.local == 0);  // ties resolved toward the smallest pair
  CHECK(win.source.remote == 0);
}

TEST_CASE("translation estimation under position noise stays within 0.1 m") {
  // Monte-Carlo of the noisy-alignment contract: sigma = 0.05 m per node and
  // axis, eight shared objects, success = error <= 0.1 m.
  MergeConfig cfg;
  const Items scene = {{"chair", {0.0, 0.0, 0.0}},   {"table", {2.0, 0.5, 0.0}},
                       {"lamp", {-1.5, 1.0, 0.25}},  {"bed", {3.0, 2.5, 0.0}},
                       {"plant", {0.5, -2.0, 0.5}},  {"desk", {-2.0, -1.0, 0.0}},
                       {"shelf", {1.0, 3.0, 0.75}},  {"mirror", {-0.5, 2.0, 1.0}}};
  const COGraph local = make_local(1, scene);
  const Mat3 identity = Mat3::identity();

  int ok = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Rng rng(mix_seed(4242, std::uint64_t(trial)));
    const Vec3 t_true{rng.uniform(-3, 3), rng.uniform(-3, 3), 0.0};
    Items noisy = shifted(scene, t_true);
    for (auto& [cat, pos] : noisy)
      pos += Vec3{0.05 * rng.gaussian(), 0.05 * rng.gaussian(), 0.05 * rng.gaussian()};
    const ReceivedGraph remote = make_remote(2, noisy);
    const auto pairs = place_recognition(local, remote, nullptr, cfg);
    if (!pairs) continue;
    const TranslationCandidate win = estimate_translation(*pairs, local, remote, identity, cfg);
    if (t_error(win.t, Vec3{} - t_true) <= 0.1) ++ok;
  }
  CHECK(ok >= 95);
}

TEST_CASE("winner score equals an exhaustive search on random instances") {
  MergeConfig cfg;
  cfg.min_pairs = 1;
  const std::vector<std::string> cats = {"chair", "table", "lamp", "bed",  "plant", "desk",
                                         "shelf", "mirror", "sink", "oven", "cup",  "book"};
  int evaluated = 0;
  for (int inst = 0; inst < 40; ++inst) {
    Rng rng(mix_seed(777, std::uint64_t(inst)));
    const std::size_t n_local = 3 + rng.below(10);
    const std::size_t n_remote = 3 + rng.below(10);
    const Mat3 R = Mat3::rot_z(rng.uniform(-3.0, 3.0));
    auto rand_pos = [&] { return Vec3{rng.uniform(-4, 4), rng.uniform(-4, 4), rng.uniform(0, 1)}; };

    Items local_items, remote_items;
    for (std::size_t i = 0; i < n_local; ++i)
      local_items.emplace_back(cats[rng.below(std::uint32_t(cats.size()))], rand_pos());
    for (std::size_t i = 0; i < n_remote; ++i)
      remote_items.emplace_back(cats[rng.below(std::uint32_t(cats.size()))], rand_pos());

    const COGraph local = make_local(1, local_items);
    const ReceivedGraph remote = make_remote(2, remote_items);
    const auto pairs = place_recognition(local, remote, nullptr, cfg);
    if (!pairs) continue;
    ++evaluated;
    const TranslationCandidate win = estimate_translation(*pairs, local, remote, R, cfg);

    // Oracle: evaluate every candidate from scratch and keep the best key.
    auto key_of = [&](const MatchPair& p) {
      const Vec3 t = local.node(p.local).pos - R * remote.nodes.at(p.remote).pos();
      std::size_t score = 0;
      double residual_sum = 0.0;
      for (const MatchPair& q : *pairs) {
        const double d = distance(local.node(q.local).pos, R * remote.nodes.at(q.remote).pos() + t);
        if (d <= cfg.d_merge) {
          ++score;
          residual_sum += d;
        }
      }
      return std::make_tuple(-double(score), score ? residual_sum / double(score) : 0.0,
                             p.local, p.remote);
    };
    auto best_key = key_of((*pairs)[0]);
    for (const MatchPair& p : *pairs) best_key = std::min(best_key, key_of(p));

    CHECK(-std::get<0>(best_key) == double(win.merged_count));
    CHECK(std::get<2>(best_key) == win.source.local);
    CHECK(std::get<3>(best_key) == win.source.remote);
  }
  CHECK(evaluated >= 20);  // the property must actually have been exercised
}

namespace {

bool graphs_identical(const COGraph& a, const COGraph& b) {
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  for (std::size_t i = 0; i < a.node_count(); ++i) {
    const NodeRecord &x = a.nodes()[i], &y = b.nodes()[i];
    if (x.id != y.id || x.label != y.label || x.pos.x != y.pos.x || x.pos.y != y.pos.y ||
        x.pos.z != y.pos.z || x.bbox != y.bbox || !(x.feat512 == y.feat512) ||
        x.has_feat512 != y.has_feat512 || !(x.feat3 == y.feat3))
      return false;
  }
  for (std::size_t i = 0; i < a.edge_count(); ++i)
    if (!(a.edges()[i] == b.edges()[i])) return false;
  return true;
}

}  // namespace

TEST_CASE("graph merging: fusion, appending, and id exhaustion") {
  MergeConfig cfg;
  const Mat3 identity = Mat3::identity();

  SUBCASE("identical graphs fuse completely") {
    COGraph local = make_local(1, kFiveObjects);
    local.add_edge(0, 1);
    local.add_edge(1, 2);
    ReceivedGraph remote = make_remote(2, kFiveObjects);
    remote.edges = {{0, 1}, {1, 2}};

    const MergeResult r = merge_graphs(local, remote, nullptr, identity, {0, 0, 0}, cfg);
    CHECK(r.merged.node_count() == kFiveObjects.size());
    CHECK(r.merged.edge_count() == 2);
    CHECK_FALSE(r.any_unmatched);
    REQUIRE(r.fused.size() == kFiveObjects.size());
    for (std::size_t i = 0; i < r.fused.size(); ++i) {
      CHECK(r.fused[i].first == NodeId(i));
      CHECK(r.fused[i].second == NodeId(i));
    }
    // Fused positions are the average of two equal positions.
    for (std::size_t i = 0; i < kFiveObjects.size(); ++i) {
      CHECK(r.merged.node(NodeId(i)).pos.x == kFiveObjects[i].second.x);
      CHECK(norm(r.merged.node(NodeId(i)).feat512) == doctest::Approx(1.0).epsilon(1e-5));
    }

    // Merging the same received graph again changes nothing.
    const MergeResult r2 = merge_graphs(local, remote, nullptr, identity, {0, 0, 0}, cfg);
    CHECK(graphs_identical(r.merged, r2.merged));
    CHECK(r2.fused == r.fused);
  }

  SUBCASE("disjoint graphs concatenate") {
    const COGraph local = make_local(1, {{"chair", {0, 0, 0}}, {"table", {1, 0, 0}},
                                         {"lamp", {2, 0, 0}}, {"bed", {3, 0, 0}}});
    ReceivedGraph remote = make_remote(2, {{"sink", {20, 0, 0}}, {"toilet", {21, 0, 0}},
                                           {"oven", {22, 0, 0}}, {"kettle", {23, 0, 0}}});
    remote.edges = {{0, 1}, {2, 3}};

    const MergeResult r = merge_graphs(local, remote, nullptr, identity, {0, 0, 0}, cfg);
    CHECK(r.merged.node_count() == 8);
    CHECK(r.fused.empty());
    CHECK(r.any_unmatched);
    // Remote ids 0..3 landed on fresh ids 4..7 in remote-id order.
    CHECK(r.remote_to_merged.at(0) == 4);
    CHECK(r.remote_to_merged.at(3) == 7);
    CHECK(r.merged.has_edge(4, 5));
    CHECK(r.merged.has_edge(6, 7));
    CHECK(r.merged.edge_count() == 2);
    CHECK(r.merged.node(4).label == table().label_of("sink"));
    CHECK(r.merged.node(4).has_feat512);
  }

  SUBCASE("partial overlap fuses exactly the shared objects") {
    // 10 + 10 with 4 shared: spec's constructed-correspondence example.
    const Items local_items = {{"chair", {0, 0, 0}},  {"table", {2, 0, 0}},
                               {"lamp", {4, 0, 0}},   {"bed", {6, 0, 0}},
                               {"plant", {0, 2, 0}},  {"desk", {2, 2, 0}},
                               {"shelf", {4, 2, 0}},  {"mirror", {6, 2, 0}},
                               {"cup", {0, 4, 0}},    {"book", {2, 4, 0}}};
    const Vec3 t_true{1.5, -0.5, 0.0};
    // Shared: chair, table, lamp, bed (remote positions = local - t_true so
    // that transforming by t_true aligns them); six others far away.
    Items remote_items = {{"chair", Vec3{0, 0, 0} - t_true},
                          {"table", Vec3{2, 0, 0} - t_true},
                          {"lamp", Vec3{4, 0, 0} - t_true},
                          {"bed", Vec3{6, 0, 0} - t_true},
                          {"sink", {30, 0, 0}},
                          {"toilet", {32, 0, 0}},
                          {"towel", {34, 0, 0}},
                          {"oven", {36, 0, 0}},
                          {"kettle", {38, 0, 0}},
                          {"bottle", {40, 0, 0}}};
    const COGraph local = make_local(1, local_items);
    const ReceivedGraph remote = make_remote(2, remote_items);

    const MergeResult r = merge_graphs(local, remote, nullptr, identity, t_true, cfg);
    CHECK(r.merged.node_count() == 16);
    REQUIRE(r.fused.size() == 4);
    for (NodeId i = 0; i < 4; ++i) {
      CHECK(r.fused[i].first == i);
      CHECK(r.fused[i].second == i);
    }
    CHECK(r.any_unmatched);
  }

  SUBCASE("running out of node ids is an error") {
    COGraph local(1);
    NodeRecord proto;
    proto.label = table().label_of("chair");
    proto.has_feat512 = false;
    for (int i = 0; i < 250; ++i) {
      proto.pos = {double(i), 0, 0};
      local.add_node(proto);
    }
    const ReceivedGraph remote = make_remote(2, {{"sink", {1000, 0, 0}},
                                                 {"toilet", {1002, 0, 0}},
                                                 {"oven", {1004, 0, 0}},
                                                 {"kettle", {1006, 0, 0}},
                                                 {"cup", {1008, 0, 0}},
                                                 {"plate", {1010, 0, 0}},
                                                 {"bowl", {1012, 0, 0}}});
    try {
      merge_graphs(local, remote, nullptr, identity, {0, 0, 0}, cfg);
      FAIL("expected id_space_exhausted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::id_space_exhausted);
    }
  }

  SUBCASE("bounding boxes take the world-space union") {
    COGraph local(1);
    NodeRecord n;
    n.pos = {0, 0, 0};
    n.label = table().label_of("sofa");
    n.feat512 = table().category_vector("sofa");
    n.has_feat512 = true;
    n.set_bbox_extents({0.4, 0.4, 0.2});
    local.add_node(n);

    ReceivedGraph remote;
    remote.robot = 2;
    ReceivedNode rn;
    rn.wire.id = 0;
    rn.wire.pos = {0.5f, 0.0f, 0.0f};
    rn.wire.label = table().label_of("sofa");
    rn.wire.bbox = {2, 6, 2};  // extents (0.2, 0.6, 0.2)
    rn.raw_feature = feature_to_bytes(table().category_vector("sofa"));
    remote.nodes[0] = rn;

    const MergeResult r = merge_graphs(local, remote, nullptr, identity, {0, 0, 0}, cfg);
    REQUIRE(r.fused.size() == 1);
    const NodeRecord& fused = r.merged.node(0);
    CHECK(fused.pos.x == doctest::Approx(0.25));
    // x: [-0.2, 0.2] u [0.4, 0.6] -> 0.8; y: [-0.2, 0.2] u [-0.3, 0.3] -> 0.6;
    // z: both boxes span 0.2.
    CHECK(fused.bbox == std::array<std::uint8_t, 3>{8, 6, 2});
  }
}

TEST_CASE("fused pairs are invariant to a common coordinate offset") {
  MergeConfig cfg;
  const Mat3 R = Mat3::rot_z(0.3);
  const Items scene = {{"chair", {0.0, 0.0, 0.0}},  {"table", {2.0, 0.5, 0.0}},
                       {"lamp", {-1.5, 1.0, 0.25}}, {"bed", {3.0, 2.5, 0.0}},
                       {"plant", {0.5, -2.0, 0.5}}};

  auto run = [&](const Vec3& offset) {
    const COGraph local = make_local(1, shifted(scene, offset));
    // Remote frame: positions are the local ones rotated back and shifted;
    // after the pipeline estimates (R, t) the scenes align again.
    Items remote_items;
    const Mat3 Rt = R.transposed();
    for (const auto& [cat, pos] : shifted(scene, offset))
      remote_items.emplace_back(cat, Rt * (pos - Vec3{4.0, 1.0, 0.0}));
    const ReceivedGraph remote = make_remote(2, remote_items);
    const auto pairs = place_recognition(local, remote, nullptr, cfg);
    REQUIRE(pairs.has_value());
    const TranslationCandidate win = estimate_translation(*pairs, local, remote, R, cfg);
    return merge_graphs(local, remote, nullptr, R, win.t, cfg).fused;
  };

  const auto base = run({0, 0, 0});
  REQUIRE(base.size() == scene.size());
  CHECK(run({10.0, -7.0, 3.0}) == base);
  CHECK(run({-250.0, 414.0, -12.0}) == base);
}

TEST_CASE("translation error is the Euclidean distance") {
  CHECK(t_error({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(t_error({1.3, 2.4, 3}, {1, 2, 3}) == doctest::Approx(0.5));
}

TEST_CASE("merge reports serialize the decision trail as JSON") {
  MergeConfig cfg;
  const COGraph local = make_local(1, kFiveObjects);
  const ReceivedGraph remote = make_remote(2, shifted(kFiveObjects, {1.0, 0.0, 0.0}));
  const auto pairs = place_recognition(local, remote, nullptr, cfg);
  REQUIRE(pairs.has_value());
  const Mat3 identity = Mat3::identity();
  const auto candidates = score_translation_candidates(*pairs, local, remote, identity, cfg);
  const TranslationCandidate win = estimate_translation(*pairs, local, remote, identity, cfg);
  const MergeResult result = merge_graphs(local, remote, nullptr, identity, win.t, cfg);

  const auto j = nlohmann::json::parse(merge_report_json(candidates, result, Vec3{-1.0, 0.0, 0.0}));
  CHECK(j.at("chosen_t").size() == 3);
  CHECK(j.at("chosen_t")[0].get<double>() == doctest::Approx(-1.0));
  CHECK(j.at("candidates").size() == candidates.size());
  CHECK(j.at("candidates")[0].at("merged_count").get<std::size_t>() == candidates[0].merged_count);
  CHECK(j.at("fused_pairs").size() == kFiveObjects.size());
  CHECK(j.at("merged_nodes").get<std::size_t>() == kFiveObjects.size());
  CHECK(j.at("t_error").get<double>() < 1e-9);
  CHECK(j.contains("any_unmatched"));

  const auto no_truth = nlohmann::json::parse(merge_report_json(candidates, result, std::nullopt));
  CHECK_FALSE(no_truth.contains("t_error"));
}
