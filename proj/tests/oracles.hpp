#pragma once

// Independent reference implementations used only by tests. These recompute
// expected values through a different path than the library (homogeneous
// matrices instead of quaternion algebra, central differences instead of
// analytic gradients, brute force instead of spatial indexing).

#include "handover/geom.hpp"

#include <Eigen/Dense>

#include <functional>
#include <random>
#include <vector>

namespace oracles {

using Eigen::Matrix4d;
using Eigen::Vector3d;

inline Matrix4d pose_to_matrix(const handover::Pose3& p) {
  Matrix4d m = Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = p.q.toRotationMatrix();
  m.topRightCorner<3, 1>() = p.t;
  return m;
}

// Central finite difference of a scalar field.
inline Vector3d fd_gradient(const std::function<double(const Vector3d&)>& f,
                            const Vector3d& p, double h = 1e-5) {
  Vector3d g;
  for (int i = 0; i < 3; ++i) {
    Vector3d hi = p, lo = p;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

// Central finite difference of a scalar function of a parameter vector.
inline Eigen::VectorXd fd_gradient_vec(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Eigen::VectorXd hi = x, lo = x;
    hi[i] += h;
    lo[i] -= h;
    g[i] = (f(hi) - f(lo)) / (2.0 * h);
  }
  return g;
}

inline int brute_force_nn(const std::vector<Vector3d>& pts, const Vector3d& q) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    const double d = (pts[i] - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

inline handover::Pose3 random_pose(std::mt19937_64& rng, double span = 2.0) {
  std::uniform_real_distribution<double> u(-span, span);
  std::normal_distribution<double> n(0.0, 1.0);
  handover::Pose3 p;
  p.t = {u(rng), u(rng), u(rng)};
  p.q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
  return p;
}

}  // namespace oracles
