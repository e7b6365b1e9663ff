#pragma once

// Depth sensing and motion features: ray-cast point clouds from the two
// mounted cameras (with robot self-occlusion), a uniform-grid nearest
// neighbor index, point-to-point ICP, and per-point backward flow.

#include "handover/config.hpp"
#include "handover/geom.hpp"
#include "handover/robot.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace handover {

enum PointLabel : int { pl_body = 0, pl_hand = 1, pl_object = 2 };
const char* point_label_name(int label);

struct PointCloud {
  std::vector<Vector3d> points;  // world frame
  std::vector<int> labels;       // PointLabel per point

  size_t size() const { return points.size(); }
};

void to_json(json& j, const PointCloud& c);
void from_json(const json& j, PointCloud& c);

// Ray-cast both cameras against the human capsules and the held object.
// Robot capsules occlude (blocked rays produce no point). The pooled hits are
// downsampled to cfg.cloud_cap with a seeded draw, original ray order kept.
PointCloud render_cloud(const PerceptionCfg& cfg, const RobotSpec& spec,
                        const RobotState& state, const SdfScene& human,
                        const Shape& object, const Pose3& object_pose,
                        uint64_t seed);

// Uniform-grid nearest neighbor over a fixed point set (cell = nn_cell).
// Exact: expanding shell search with a conservative lower bound.
class GridNn {
 public:
  GridNn(double cell, const std::vector<Vector3d>& pts);
  // index of the nearest stored point within max_dist, or -1
  int nearest(const Vector3d& q, double max_dist) const;
  size_t size() const { return pts_.size(); }

 private:
  double cell_;
  std::vector<Vector3d> pts_;
  std::unordered_map<uint64_t, std::vector<int>> cells_;
};

struct IcpResult {
  Pose3 transform;  // maps source points onto the target cloud
  double rms = 0;
  int iters = 0;
  bool degenerate = false;  // "icp-degenerate": too few points or matches
  std::vector<double> rms_history;
};

// Point-to-point ICP, SVD fit per iteration, warm-started at identity.
IcpResult icp_register(const PerceptionCfg& cfg,
                       const std::vector<Vector3d>& source,
                       const std::vector<Vector3d>& target);

// Backward flow for each current point: match against each past cloud
// (aligned by ICP, label-aware with any-label fallback) and average the
// per-control-period displacement, expressed in the EE frame.
// `past` is ordered oldest first; cloud i is (past.size() - i) periods old.
std::vector<Vector3d> compute_flow(const PerceptionCfg& cfg,
                                   const PointCloud& current,
                                   const Pose3& current_ee,
                                   const std::vector<PointCloud>& past);

}  // namespace handover
