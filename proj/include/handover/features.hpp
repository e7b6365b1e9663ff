#pragma once

// Fixed-width feature encodings shared by the pose predictor, the state
// estimator, and the planner's neural loss. Everything here is a pure
// function with an analytic Jacobian where the planner needs one.

#include "handover/human.hpp"
#include "handover/perception.hpp"
#include "handover/robot.hpp"

#include <Eigen/Dense>

namespace handover {

// --- 6D rotation encoding (first two rotation matrix columns) ---

using Vector6d = Eigen::Matrix<double, 6, 1>;

Vector6d sixd_from_rot(const Eigen::Matrix3d& r);
// Gram-Schmidt reconstruction; total (degenerate input falls back to a
// well-formed frame instead of NaN).
Eigen::Matrix3d rot_from_sixd(const Vector6d& v);

// --- pooled cloud statistics (pose predictor input) ---

constexpr int kCloudFeatureDim = 24;

// Per label {body, hand, object}: [count/total, centroid xyz, extent xyz]
// with positions in the robot base frame; then object count / cloud cap,
// total / cloud cap, and mean object range from the head camera / max range.
Eigen::VectorXd cloud_features(const PerceptionCfg& cfg, const RobotSpec& spec,
                               const RobotState& state,
                               const PointCloud& cloud);

// object pose expressed in the robot base frame
Pose3 object_in_base(const RobotState& state, const Pose3& object_world);

// 9-dim regression target / prediction: position + 6D rotation
Eigen::VectorXd pose_to_vec9(const Pose3& pose);
Pose3 vec9_to_pose(const Eigen::VectorXd& v);

// prediction quality metric: ||dpos|| + 0.5 * rotation geodesic error
double vision_neural_loss(const Eigen::VectorXd& pred9, const Pose3& truth);

// --- oracle state features (state estimator input) ---

constexpr int kStateFeatureDim = 134;

// world-frame quantities the scene oracle exposes at one instant
struct OracleState {
  std::array<Vector3d, kp_count> keypoints;
  Pose2 root;
  double root_height = 0.95;
  Pose3 hand;
  Pose3 object;
};

OracleState oracle_state(const SceneState& ss);

// 67 features per frame, computed in the EE frame then the base frame:
// 16 keypoints (48), root position + planar facing cos/sin (5), hand pose
// (7: position + quaternion, w >= 0), object pose (7).
Eigen::VectorXd state_features(const RobotSpec& spec, const RobotState& state,
                               const OracleState& os);

// features plus d(features)/d(waypoint) with waypoint dofs ordered
// [base x, base y, base heading, arm q0..q6].
void state_features_jac(const RobotSpec& spec, const RobotState& state,
                        const OracleState& os, Eigen::VectorXd& f,
                        Eigen::MatrixXd& jac);

// 6 x 10 world EE twist per waypoint dof (rows: linear, angular), shared by
// the feature Jacobian and the planner losses.
Eigen::Matrix<double, 6, 10> ee_waypoint_jacobian(const RobotSpec& spec,
                                                  const RobotState& state,
                                                  const RobotFk& fk);

}  // namespace handover
