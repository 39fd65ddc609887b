#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "cograph/corpus.hpp"
#include "cograph/error.hpp"
#include "cograph/rng.hpp"
#include "cograph/sim.hpp"

namespace cograph {

RobotTrajectory inject_pose_noise(const RobotTrajectory& trajectory, double sigma,
                                  std::uint64_t seed) {
  if (sigma == 0.0) return trajectory;
  if (!(sigma > 0) || !std::isfinite(sigma))
    raise(Errc::config, "pose noise sigma must be finite and non-negative");
  RobotTrajectory out = trajectory;
  Rng rng(mix_seed(seed, hash64("pose-noise")));
  for (auto& p : out.poses) {
    p.position.x += sigma * rng.gaussian();
    p.position.y += sigma * rng.gaussian();
    p.position.z += sigma * rng.gaussian();
  }
  return out;
}

void validate_scenario(const ScenarioConfig& cfg) {
  validate_world(cfg.world);
  if (cfg.trajectories.empty()) raise(Errc::config, "a scenario needs at least one robot");
  if (cfg.trajectories.size() > 255)
    raise(Errc::config, "at most 255 robots (robot ids are one byte)");
  for (std::size_t r = 0; r < cfg.trajectories.size(); ++r) {
    const auto& traj = cfg.trajectories[r];
    std::string who = "trajectory " + std::to_string(r);
    if (traj.poses.empty()) raise(Errc::config, who + " has no poses");
    if (traj.pose_noise_sigma < 0 || !std::isfinite(traj.pose_noise_sigma))
      raise(Errc::config, who + " has an invalid pose noise sigma");
    for (const auto& p : traj.poses)
      if (!std::isfinite(p.position.x) || !std::isfinite(p.position.y) ||
          !std::isfinite(p.position.z) || !std::isfinite(p.yaw))
        raise(Errc::config, who + " has a non-finite pose");
  }
  if (cfg.transmit_every < 1) raise(Errc::config, "transmit_every must be at least 1");
  if (!(cfg.grid_resolution > 0) || !std::isfinite(cfg.grid_resolution))
    raise(Errc::config, "grid resolution must be positive");
  if (cfg.raster.width <= 0 || cfg.raster.height <= 0)
    raise(Errc::config, "raster size must be positive");
  if (!(cfg.raster.k.fx > 0) || !(cfg.raster.k.fy > 0))
    raise(Errc::config, "focal lengths must be positive");
  if (cfg.pose_noise_sigma < 0 || !std::isfinite(cfg.pose_noise_sigma))
    raise(Errc::config, "pose noise sigma must be non-negative");
  if (!(cfg.theta_keep >= -1.0 && cfg.theta_keep <= 1.0))
    raise(Errc::config, "theta_keep must be a cosine threshold in [-1, 1]");
}

double ScenarioResult::mean_t_error() const {
  if (merges.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& m : merges) sum += m.error;
  return sum / double(merges.size());
}

namespace {

// Re-raises a module error with the robot and frame that produced it.
template <typename Fn>
auto tagged(RobotId robot, std::size_t frame, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    raise(e.code(), "robot " + std::to_string(int(robot)) + " frame " + std::to_string(frame) +
                        ": " + e.what());
  }
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg, const CodecParams* codec) {
  validate_scenario(cfg);
  if (cfg.mode == TransmitMode::compressed && codec == nullptr)
    raise(Errc::codec_not_found, "compressed transmission needs a trained codec");

  EmbeddingTable table(default_embedding_spec(cfg.embedding_seed));
  for (const auto& obj : cfg.world.objects) table.label_of(obj.category);

  const std::size_t n = cfg.trajectories.size();
  std::vector<Vec3> origin(n);
  std::vector<std::vector<Frame>> frames(n);
  std::vector<std::unique_ptr<MappingPipeline>> pipes(n);
  std::vector<ReceivedRegistry> registries(n);

  std::size_t total_frames = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const RobotTrajectory& traj = cfg.trajectories[r];
    origin[r] = traj.poses[0].position;
    total_frames = std::max(total_frames, traj.poses.size());

    // Render from the true world poses, then hand mapping the noisy pose
    // expressed in the robot's local frame (origin at its first position).
    frames[r] = generate_frames(cfg.world, traj, cfg.raster, table);
    double sigma = cfg.pose_noise_sigma > 0 ? cfg.pose_noise_sigma : traj.pose_noise_sigma;
    RobotTrajectory noisy = inject_pose_noise(traj, sigma, mix_seed(cfg.seed, r + 1));
    for (std::size_t k = 0; k < frames[r].size(); ++k) {
      TrajectoryPose local = noisy.poses[k];
      local.position = local.position - origin[r];
      frames[r][k].pose = camera_pose(local);
    }

    OccupancyGrid grid = rasterize_walls(cfg.world, cfg.grid_resolution, origin[r]);
    pipes[r] = std::make_unique<MappingPipeline>(RobotId(r + 1), cfg.mapping, std::move(grid),
                                                 cfg.threaded_mapping);
    if (cfg.mode == TransmitMode::compressed)
      pipes[r]->set_feature_encoder([codec, theta = cfg.theta_keep](NodeRecord& rec) {
        rec.feat3 = encode_quantized(*codec, rec.feat512);
        rec.keep_raw = validate_compression(rec.feat512, *codec, theta);
      });
  }

  Channel channel;
  ScenarioResult result;
  result.mode = cfg.mode;
  result.views.resize(n);

  // Rebuilds receiver s's merged view from its pristine local graph plus the
  // full registry, chaining one merge per sender (ascending sender id). The
  // rebuild is idempotent: nothing from a previous merge leaks into the next.
  auto rebuild_view = [&](std::size_t s, std::size_t frame) {
    COGraph current = pipes[s]->graph();
    std::optional<MergeResult> last;
    for (const auto& [sender, remote] : registries[s].graphs()) {
      auto pairs = place_recognition(current, remote, codec, cfg.merging);
      if (!pairs) continue;  // too few matches yet; the registry keeps the data
      Mat3 rotation = Mat3::identity();
      TranslationCandidate win = estimate_translation(*pairs, current, remote, rotation,
                                                      cfg.merging);
      MergeResult merged = merge_graphs(current, remote, codec, rotation, win.t, cfg.merging);
      Vec3 t_truth = origin[sender - 1] - origin[s];
      auto candidates = score_translation_candidates(*pairs, current, remote, rotation,
                                                     cfg.merging);
      MergeEvent event;
      event.receiver = RobotId(s + 1);
      event.sender = sender;
      event.t_estimated = win.t;
      event.t_truth = t_truth;
      event.error = t_error(win.t, t_truth);
      event.report_json = merge_report_json(candidates, merged, t_truth);
      result.merges.push_back(std::move(event));
      current = merged.merged;
      last = std::move(merged);
    }
    if (last) result.views[s] = std::move(last);
    (void)frame;
  };

  for (std::size_t t = 0; t < total_frames; ++t) {
    for (std::size_t r = 0; r < n; ++r)
      if (t < frames[r].size())
        tagged(RobotId(r + 1), t, [&] { pipes[r]->push_frame(frames[r][t]); });

    bool flush = ((t + 1) % cfg.transmit_every == 0) || (t + 1 == total_frames);
    if (!flush) continue;
    for (std::size_t r = 0; r < n; ++r) tagged(RobotId(r + 1), t, [&] { pipes[r]->sync(); });
    if (n == 1) continue;  // nobody to talk to: the channel stays silent

    for (std::size_t r = 0; r < n; ++r) {
      std::vector<std::uint8_t> bytes =
          tagged(RobotId(r + 1), t, [&] { return serialize_delta(pipes[r]->graph(), cfg.mode); });
      if (bytes.size() <= kWireHeaderBytes) continue;  // empty delta: suppressed
      for (std::size_t s = 0; s < n; ++s)
        if (s != r) channel.send(RobotId(r + 1), RobotId(s + 1), t, "delta", bytes);
    }

    for (std::size_t s = 0; s < n; ++s) {
      bool got_any = false;
      while (auto d = channel.receive(RobotId(s + 1))) {
        tagged(RobotId(s + 1), t, [&] {
          registries[s].apply_delta(deserialize_delta(d->bytes, cfg.mode), cfg.mode);
        });
        got_any = true;
      }
      if (got_any) tagged(RobotId(s + 1), t, [&] { rebuild_view(s, t); });
    }
  }

  for (std::size_t r = 0; r < n; ++r) result.locals.push_back(pipes[r]->graph());
  result.stats = channel.stats();
  return result;
}

}  // namespace cograph
