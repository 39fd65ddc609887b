#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "cograph/mapping.hpp"

namespace cograph {

namespace {

// Everything stage 2 needs from one frame, immutable once enqueued.
struct StageMsg {
  std::vector<NodeCandidate> clusters;
  std::vector<std::pair<std::size_t, Feature512>> contributions;  // track idx -> 2D feature
  std::vector<std::pair<FeatureLabel, Vec3>> track_geometry;      // label, centroid per track
};

}  // namespace

struct MappingPipeline::Impl {
  MappingConfig cfg;
  OccupancyGrid grid;
  bool threaded = false;

  // Stage 1 state, touched only by the pushing thread.
  std::vector<ObjectTrack> geo_tracks;

  // Stage 2 state, touched only by the consumer (worker thread or inline).
  GraphBuilder builder;
  std::vector<std::array<double, kFeatureDim>> feat_sums;  // by track index
  std::vector<std::size_t> feat_obs;

  std::mutex mu;
  std::condition_variable cv_work, cv_idle;
  std::deque<StageMsg> queue;
  bool busy = false;
  bool stop = false;
  std::thread worker;

  Impl(RobotId robot, MappingConfig c, OccupancyGrid g, bool thr)
      : cfg(c), grid(std::move(g)), threaded(thr), builder(robot, c) {
    if (threaded)
      worker = std::thread([this] { run_worker(); });
  }

  ~Impl() {
    if (threaded) {
      {
        std::lock_guard<std::mutex> lk(mu);
        stop = true;
      }
      cv_work.notify_all();
      worker.join();
    }
  }

  StageMsg stage1(const Frame& frame) {
    StageMsg msg;
    const std::vector<FOPointCloud> clouds =
        back_project(frame.fo, frame.depth, frame.pose, frame.k, frame.features);
    for (const FOPointCloud& cloud : clouds)
      msg.contributions.emplace_back(fuse_cloud_geometry(geo_tracks, cloud, cfg), cloud.feat2d);
    msg.clusters = cluster_nodes(geo_tracks, cfg);
    msg.track_geometry.reserve(geo_tracks.size());
    for (const ObjectTrack& t : geo_tracks)
      msg.track_geometry.emplace_back(t.label, t.centroid());
    return msg;
  }

  void stage2(const StageMsg& msg) {
    for (const auto& [tid, feat] : msg.contributions) {
      if (tid >= feat_sums.size()) {
        feat_sums.resize(tid + 1);
        feat_obs.resize(tid + 1, 0);
      }
      for (std::size_t i = 0; i < kFeatureDim; ++i)
        feat_sums[tid][i] += static_cast<double>(feat.v[i]);
      feat_obs[tid] += 1;
    }

    std::vector<TrackSnapshot> snaps(msg.track_geometry.size());
    for (std::size_t t = 0; t < snaps.size(); ++t) {
      snaps[t].label = msg.track_geometry[t].first;
      snaps[t].centroid = msg.track_geometry[t].second;
      if (t < feat_sums.size()) {
        snaps[t].feat_sum = feat_sums[t];
        snaps[t].observations = feat_obs[t];
      }
    }
    builder.apply(msg.clusters, snaps, grid);
  }

  void run_worker() {
    std::unique_lock<std::mutex> lk(mu);
    for (;;) {
      cv_work.wait(lk, [this] { return stop || !queue.empty(); });
      if (queue.empty()) {
        if (stop) return;
        continue;
      }
      StageMsg msg = std::move(queue.front());
      queue.pop_front();
      busy = true;
      lk.unlock();
      stage2(msg);
      lk.lock();
      busy = false;
      if (queue.empty()) cv_idle.notify_all();
    }
  }

  void push(const Frame& frame) {
    StageMsg msg = stage1(frame);
    if (!threaded) {
      stage2(msg);
      return;
    }
    {
      std::lock_guard<std::mutex> lk(mu);
      queue.push_back(std::move(msg));
    }
    cv_work.notify_one();
  }

  void sync() {
    if (!threaded) return;
    std::unique_lock<std::mutex> lk(mu);
    cv_idle.wait(lk, [this] { return queue.empty() && !busy; });
  }
};

MappingPipeline::MappingPipeline(RobotId robot, MappingConfig cfg, OccupancyGrid grid,
                                 bool threaded)
    : impl_(std::make_unique<Impl>(robot, cfg, std::move(grid), threaded)) {}

MappingPipeline::~MappingPipeline() = default;

void MappingPipeline::set_feature_encoder(std::function<void(NodeRecord&)> fn) {
  impl_->builder.set_feature_encoder(std::move(fn));
}

void MappingPipeline::push_frame(const Frame& frame) { impl_->push(frame); }

void MappingPipeline::sync() { impl_->sync(); }

COGraph& MappingPipeline::graph() { return impl_->builder.graph(); }

std::vector<ObjectTrack> MappingPipeline::tracks() const {
  std::vector<ObjectTrack> out = impl_->geo_tracks;
  for (std::size_t t = 0; t < out.size() && t < impl_->feat_sums.size(); ++t) {
    out[t].feat_sum = impl_->feat_sums[t];
    out[t].observations = impl_->feat_obs[t];
  }
  return out;
}

}  // namespace cograph
