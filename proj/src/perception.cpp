#include "handover/perception.hpp"

#include "handover/rng.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace handover {

namespace {

uint64_t cell_key(int x, int y, int z) {
  // spread hash; collisions only add candidates, never wrong answers
  uint64_t h = static_cast<uint64_t>(static_cast<uint32_t>(x)) * 73856093ULL;
  h ^= static_cast<uint64_t>(static_cast<uint32_t>(y)) * 19349663ULL;
  h ^= static_cast<uint64_t>(static_cast<uint32_t>(z)) * 83492791ULL;
  return h;
}

int cell_of(double v, double cell) {
  return static_cast<int>(std::floor(v / cell));
}

// Rigid fit src -> dst minimizing sum |R*src + t - dst|^2 (Kabsch/SVD).
Pose3 rigid_fit(const std::vector<Vector3d>& src, const std::vector<Vector3d>& dst) {
  Vector3d cs = Vector3d::Zero(), cd = Vector3d::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= static_cast<double>(src.size());
  cd /= static_cast<double>(src.size());
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (size_t i = 0; i < src.size(); ++i)
    h += (src[i] - cs) * (dst[i] - cd).transpose();
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Matrix3d r = v * u.transpose();
  if (r.determinant() < 0) {
    v.col(2) *= -1;
    r = v * u.transpose();
  }
  Pose3 out;
  out.q = Eigen::Quaterniond(r).normalized();
  out.t = cd - r * cs;
  return out;
}

}  // namespace

const char* point_label_name(int label) {
  switch (label) {
    case pl_body: return "body";
    case pl_hand: return "hand";
    case pl_object: return "object";
  }
  return "body";
}

void to_json(json& j, const PointCloud& c) {
  json pts = json::array();
  for (const auto& p : c.points) pts.push_back({p.x(), p.y(), p.z()});
  j = json{{"points", pts}, {"labels", c.labels}};
}

void from_json(const json& j, PointCloud& c) {
  c.points.clear();
  c.labels.clear();
  for (const auto& p : j.at("points"))
    c.points.emplace_back(p[0].get<double>(), p[1].get<double>(),
                          p[2].get<double>());
  c.labels = j.at("labels").get<std::vector<int>>();
}

PointCloud render_cloud(const PerceptionCfg& cfg, const RobotSpec& spec,
                        const RobotState& state, const SdfScene& human,
                        const Shape& object, const Pose3& object_pose,
                        uint64_t seed) {
  RobotFk fk = robot_fk(spec, state);
  SdfScene self;
  for (const auto& c : fk.capsules) {
    self.capsules.push_back(c);
    self.labels.emplace_back("robot");
  }

  PointCloud pool;
  double tan_v = std::tan(cfg.vfov / 2);
  double tan_h = tan_v * static_cast<double>(cfg.grid_w) / cfg.grid_h;

  for (const Pose3* cam : {&fk.head_cam, &fk.wrist_cam}) {
    for (int v = 0; v < cfg.grid_h; ++v) {
      for (int u = 0; u < cfg.grid_w; ++u) {
        double nx = (u + 0.5) / cfg.grid_w * 2 - 1;
        double ny = (v + 0.5) / cfg.grid_h * 2 - 1;
        Vector3d dir = cam->rotate(Vector3d(nx * tan_h, ny * tan_v, 1.0));

        double best_t = cfg.max_range;
        int label = -1;
        if (auto hit = raycast(human, cam->t, dir, best_t)) {
          best_t = hit->t;
          label = human.labels[hit->index] == "hand" ? pl_hand : pl_body;
        }
        // the held object; ray_shape wants a unit direction
        Vector3d unit = dir.normalized();
        if (auto ot = ray_shape(object, object_pose, cam->t, unit)) {
          if (*ot > 1e-12 && *ot < best_t) {
            best_t = *ot;
            label = pl_object;
          }
        }
        if (label < 0) continue;
        // robot self-occlusion: a closer self hit blocks the ray
        if (auto self_hit = raycast(self, cam->t, dir, best_t)) {
          if (self_hit->t < best_t) continue;
        }
        pool.points.push_back(cam->t + unit * best_t);
        pool.labels.push_back(label);
      }
    }
  }

  if (static_cast<int>(pool.size()) <= cfg.cloud_cap) return pool;

  // seeded downsample without replacement, original order preserved
  std::vector<int> idx(pool.size());
  std::iota(idx.begin(), idx.end(), 0);
  auto rng = make_rng(seed);
  for (int i = 0; i < cfg.cloud_cap; ++i) {
    int j = uniform_int(rng, i, static_cast<int>(idx.size()) - 1);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cfg.cloud_cap);
  std::sort(idx.begin(), idx.end());
  PointCloud out;
  out.points.reserve(cfg.cloud_cap);
  out.labels.reserve(cfg.cloud_cap);
  for (int i : idx) {
    out.points.push_back(pool.points[i]);
    out.labels.push_back(pool.labels[i]);
  }
  return out;
}

GridNn::GridNn(double cell, const std::vector<Vector3d>& pts)
    : cell_(cell), pts_(pts) {
  for (size_t i = 0; i < pts_.size(); ++i) {
    const Vector3d& p = pts_[i];
    cells_[cell_key(cell_of(p.x(), cell_), cell_of(p.y(), cell_),
                    cell_of(p.z(), cell_))]
        .push_back(static_cast<int>(i));
  }
}

int GridNn::nearest(const Vector3d& q, double max_dist) const {
  if (pts_.empty()) return -1;
  int cx = cell_of(q.x(), cell_);
  int cy = cell_of(q.y(), cell_);
  int cz = cell_of(q.z(), cell_);
  int best = -1;
  double best_d2 = max_dist * max_dist;
  int max_ring = static_cast<int>(std::ceil(max_dist / cell_)) + 1;
  for (int ring = 0; ring <= max_ring; ++ring) {
    // any point in a shell at Chebyshev distance `ring` is at least
    // (ring - 1) * cell away from q
    if (best >= 0) {
      double lower = (ring - 1) * cell_;
      if (lower > 0 && lower * lower > best_d2) break;
    }
    for (int dx = -ring; dx <= ring; ++dx) {
      for (int dy = -ring; dy <= ring; ++dy) {
        for (int dz = -ring; dz <= ring; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring)
            continue;
          auto it = cells_.find(cell_key(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (int i : it->second) {
            double d2 = (pts_[i] - q).squaredNorm();
            if (d2 < best_d2) {
              best_d2 = d2;
              best = i;
            }
          }
        }
      }
    }
  }
  return best;
}

IcpResult icp_register(const PerceptionCfg& cfg,
                       const std::vector<Vector3d>& source,
                       const std::vector<Vector3d>& target) {
  IcpResult res;
  if (source.size() < 3 || target.size() < 3) {
    res.degenerate = true;
    return res;
  }
  GridNn grid(cfg.nn_cell, target);
  const double max_match = 0.5;

  Pose3 t;  // current estimate
  double prev_rms = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.icp_max_iters; ++iter) {
    std::vector<Vector3d> ms, md;
    ms.reserve(source.size());
    md.reserve(source.size());
    double sq = 0;
    for (const auto& p : source) {
      Vector3d tp = t.apply(p);
      int j = grid.nearest(tp, max_match);
      if (j < 0) continue;
      ms.push_back(p);
      md.push_back(target[j]);
      sq += (tp - target[j]).squaredNorm();
    }
    if (ms.size() < 3) {
      res.degenerate = true;
      return res;
    }
    double rms = std::sqrt(sq / ms.size());
    res.rms_history.push_back(rms);
    res.rms = rms;
    res.iters = iter + 1;
    if (std::abs(prev_rms - rms) < cfg.icp_tol) break;
    prev_rms = rms;
    t = rigid_fit(ms, md);
  }
  res.transform = t;
  return res;
}

std::vector<Vector3d> compute_flow(const PerceptionCfg& cfg,
                                   const PointCloud& current,
                                   const Pose3& current_ee,
                                   const std::vector<PointCloud>& past) {
  std::vector<Vector3d> flow(current.size(), Vector3d::Zero());
  if (past.empty() || current.size() == 0) return flow;

  std::vector<int> counts(current.size(), 0);
  Eigen::Quaterniond to_ee = current_ee.q.conjugate();
  const double max_match = 0.3;

  int depth = static_cast<int>(past.size());
  for (int i = 0; i < depth; ++i) {
    const PointCloud& pc = past[i];
    double lag = depth - i;  // control periods behind the current cloud
    if (pc.size() < 3) continue;
    IcpResult icp = icp_register(cfg, pc.points, current.points);
    if (icp.degenerate) continue;

    // grids over the ICP-aligned past points: one per label plus a fallback
    std::vector<Vector3d> aligned(pc.size());
    for (size_t k = 0; k < pc.size(); ++k) aligned[k] = icp.transform.apply(pc.points[k]);
    std::vector<std::vector<Vector3d>> by_label(3);
    std::vector<std::vector<int>> label_idx(3);
    for (size_t k = 0; k < pc.size(); ++k) {
      int l = pc.labels[k];
      if (l < 0 || l > 2) l = pl_body;
      by_label[l].push_back(aligned[k]);
      label_idx[l].push_back(static_cast<int>(k));
    }
    std::vector<GridNn> label_grid;
    label_grid.reserve(3);
    for (int l = 0; l < 3; ++l) label_grid.emplace_back(cfg.nn_cell, by_label[l]);
    GridNn all_grid(cfg.nn_cell, aligned);

    for (size_t k = 0; k < current.size(); ++k) {
      int l = current.labels[k];
      if (l < 0 || l > 2) l = pl_body;
      int match = -1;
      int g = label_grid[l].nearest(current.points[k], max_match);
      if (g >= 0) {
        match = label_idx[l][g];
      } else {
        match = all_grid.nearest(current.points[k], max_match);
      }
      if (match < 0) continue;
      flow[k] += (current.points[k] - pc.points[match]) / lag;
      ++counts[k];
    }
  }

  for (size_t k = 0; k < current.size(); ++k) {
    if (counts[k] > 0) flow[k] /= counts[k];
    flow[k] = to_ee * flow[k];
  }
  return flow;
}

}  // namespace handover
