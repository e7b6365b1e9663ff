#include "handover/features.hpp"

#include <algorithm>
#include <cmath>

namespace handover {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Vector6d sixd_from_rot(const Matrix3d& r) {
  Vector6d v;
  v << r.col(0), r.col(1);
  return v;
}

Eigen::Matrix3d rot_from_sixd(const Vector6d& v) {
  Vector3d a1 = v.head<3>(), a2 = v.tail<3>();
  Vector3d b1 = a1.norm() > 1e-9 ? Vector3d(a1.normalized()) : Vector3d::UnitX();
  Vector3d a2p = a2 - b1.dot(a2) * b1;
  Vector3d b2;
  if (a2p.norm() > 1e-9) {
    b2 = a2p.normalized();
  } else {
    // any direction orthogonal to b1
    Vector3d pick = std::abs(b1.x()) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
    b2 = b1.cross(pick).normalized();
  }
  Matrix3d r;
  r.col(0) = b1;
  r.col(1) = b2;
  r.col(2) = b1.cross(b2);
  return r;
}

VectorXd cloud_features(const PerceptionCfg& cfg, const RobotSpec& spec,
                        const RobotState& state, const PointCloud& cloud) {
  VectorXd f = VectorXd::Zero(kCloudFeatureDim);
  const Pose3 to_base = inverse(lift(state.base));
  const RobotFk fk = robot_fk(spec, state);
  const size_t total = cloud.size();

  for (int label = 0; label < 3; ++label) {
    Vector3d lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
    Vector3d hi = -lo;
    Vector3d sum = Vector3d::Zero();
    int count = 0;
    for (size_t i = 0; i < total; ++i) {
      if (cloud.labels[i] != label) continue;
      Vector3d p = to_base.apply(cloud.points[i]);
      sum += p;
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
      ++count;
    }
    int base = label * 7;
    if (count > 0) {
      f(base) = static_cast<double>(count) / static_cast<double>(total);
      f.segment<3>(base + 1) = sum / count;
      f.segment<3>(base + 4) = hi - lo;
    }
  }

  int n_object = 0;
  double range_sum = 0;
  for (size_t i = 0; i < total; ++i) {
    if (cloud.labels[i] != pl_object) continue;
    ++n_object;
    range_sum += (cloud.points[i] - fk.head_cam.t).norm();
  }
  f(21) = static_cast<double>(n_object) / cfg.cloud_cap;
  f(22) = static_cast<double>(total) / cfg.cloud_cap;
  f(23) = n_object > 0 ? range_sum / n_object / cfg.max_range : 0.0;
  return f;
}

Pose3 object_in_base(const RobotState& state, const Pose3& object_world) {
  return compose(inverse(lift(state.base)), object_world);
}

VectorXd pose_to_vec9(const Pose3& pose) {
  VectorXd v(9);
  v.head<3>() = pose.t;
  v.tail<6>() = sixd_from_rot(pose.q.toRotationMatrix());
  return v;
}

Pose3 vec9_to_pose(const VectorXd& v) {
  Pose3 p;
  p.t = v.head<3>();
  p.q = Eigen::Quaterniond(rot_from_sixd(v.tail<6>()));
  return p;
}

double vision_neural_loss(const VectorXd& pred9, const Pose3& truth) {
  Pose3 pred = vec9_to_pose(pred9);
  return (pred.t - truth.t).norm() + 0.5 * geodesic_angle(pred.q, truth.q);
}

OracleState oracle_state(const SceneState& ss) {
  OracleState os;
  os.keypoints = ss.skeleton.keypoints;
  os.root = ss.frame.root;
  os.root_height = ss.frame.root_height;
  os.hand = ss.hand;
  os.object = ss.object;
  return os;
}

namespace {

// world angular (omega) and linear (v) velocity of a feature frame per
// waypoint dof
struct FrameRates {
  Pose3 pose;
  Eigen::Matrix<double, 3, 10> omega = Eigen::Matrix<double, 3, 10>::Zero();
  Eigen::Matrix<double, 3, 10> vel = Eigen::Matrix<double, 3, 10>::Zero();
};

// quaternion product treating coefficients generically
Eigen::Quaterniond qmul(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return Eigen::Quaterniond(
      a.w() * b.w() - a.x() * b.x() - a.y() * b.y() - a.z() * b.z(),
      a.w() * b.x() + a.x() * b.w() + a.y() * b.z() - a.z() * b.y(),
      a.w() * b.y() - a.x() * b.z() + a.y() * b.w() + a.z() * b.x(),
      a.w() * b.z() + a.x() * b.y() - a.y() * b.x() + a.z() * b.w());
}

// writes one frame's 67 features (and optionally their rows of the jacobian)
void frame_features(const FrameRates& fr, const OracleState& os, int row0,
                    VectorXd& f, MatrixXd* jac) {
  const Matrix3d rt = fr.pose.q.toRotationMatrix().transpose();
  const Vector3d p = fr.pose.t;

  auto point_block = [&](int row, const Vector3d& k) {
    Vector3d u = k - p;
    f.segment<3>(row) = rt * u;
    if (!jac) return;
    for (int j = 0; j < 10; ++j)
      jac->block<3, 1>(row, j) = rt * (u.cross(fr.omega.col(j)) - fr.vel.col(j));
  };
  auto quat_block = [&](int row, const Eigen::Quaterniond& qx) {
    Eigen::Quaterniond qrel = qmul(fr.pose.q.conjugate(), qx);
    double sign = qrel.w() < 0 ? -1.0 : 1.0;
    f(row) = sign * qrel.w();
    f.segment<3>(row + 1) = sign * qrel.vec();
    if (!jac) return;
    for (int j = 0; j < 10; ++j) {
      Eigen::Quaterniond wq(0, fr.omega.col(j).x(), fr.omega.col(j).y(),
                            fr.omega.col(j).z());
      Eigen::Quaterniond dq = qmul(qmul(fr.pose.q.conjugate(), wq), qx);
      (*jac)(row, j) = sign * -0.5 * dq.w();
      jac->block<3, 1>(row + 1, j) = sign * -0.5 * dq.vec();
    }
  };

  int row = row0;
  for (int k = 0; k < kp_count; ++k, row += 3) point_block(row, os.keypoints[k]);

  point_block(row, Vector3d(os.root.x, os.root.y, os.root_height));
  row += 3;
  // planar facing direction, normalized in the frame's xy plane
  {
    Vector3d d(std::cos(os.root.heading), std::sin(os.root.heading), 0);
    Vector3d w = rt * d;
    Eigen::Vector2d g = w.head<2>();
    double n = g.norm();
    if (n > 1e-9) {
      f.segment<2>(row) = g / n;
      if (jac) {
        Eigen::Matrix2d proj =
            (Eigen::Matrix2d::Identity() - (g / n) * (g / n).transpose()) / n;
        for (int j = 0; j < 10; ++j) {
          Vector3d dw = rt * d.cross(fr.omega.col(j));
          jac->block<2, 1>(row, j) = proj * dw.head<2>();
        }
      }
    } else {
      f(row) = 1.0;  // degenerate: facing along frame z; fixed token
    }
    row += 2;
  }

  point_block(row, os.hand.t);
  quat_block(row + 3, os.hand.q);
  row += 7;
  point_block(row, os.object.t);
  quat_block(row + 3, os.object.q);
}

}  // namespace

Eigen::Matrix<double, 6, 10> ee_waypoint_jacobian(const RobotSpec& spec,
                                                  const RobotState& state,
                                                  const RobotFk& fk) {
  Eigen::Matrix<double, 6, 10> j = Eigen::Matrix<double, 6, 10>::Zero();
  j(0, 0) = 1.0;
  j(1, 1) = 1.0;
  Vector3d pb(state.base.x, state.base.y, 0.0);
  j.block<3, 1>(0, 2) = Vector3d::UnitZ().cross(fk.ee.t - pb);
  j.block<3, 1>(3, 2) = Vector3d::UnitZ();

  KinematicChain wc = spec.arm;
  wc.root = compose(lift(state.base), spec.arm.root);
  MatrixXd ja = chain_jacobian(wc, fk.arm_fk);
  j.block(0, 3, 6, 7) = ja;
  return j;
}

VectorXd state_features(const RobotSpec& spec, const RobotState& state,
                        const OracleState& os) {
  VectorXd f;
  MatrixXd* no_jac = nullptr;
  const RobotFk fk = robot_fk(spec, state);
  f.setZero(kStateFeatureDim);

  FrameRates ee;
  ee.pose = fk.ee;
  frame_features(ee, os, 0, f, no_jac);
  FrameRates base;
  base.pose = lift(state.base);
  frame_features(base, os, 67, f, no_jac);
  return f;
}

void state_features_jac(const RobotSpec& spec, const RobotState& state,
                        const OracleState& os, VectorXd& f, MatrixXd& jac) {
  const RobotFk fk = robot_fk(spec, state);
  f.setZero(kStateFeatureDim);
  jac.setZero(kStateFeatureDim, 10);

  FrameRates ee;
  ee.pose = fk.ee;
  Eigen::Matrix<double, 6, 10> j = ee_waypoint_jacobian(spec, state, fk);
  ee.vel = j.topRows<3>();
  ee.omega = j.bottomRows<3>();
  frame_features(ee, os, 0, f, &jac);

  FrameRates base;
  base.pose = lift(state.base);
  base.vel.col(0) = Vector3d::UnitX();
  base.vel.col(1) = Vector3d::UnitY();
  base.omega.col(2) = Vector3d::UnitZ();
  frame_features(base, os, 67, f, &jac);
}

}  // namespace handover
