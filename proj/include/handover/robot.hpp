#pragma once

// Mobile manipulator: planar base plus a 7R arm, collision capsules, and the
// two depth camera mounts. The action interface moves the base in its own
// frame and the end effector in its own frame; the arm absorbs whatever the
// base did so the commanded EE motion happens in the world.

#include "handover/chain.hpp"
#include "handover/config.hpp"
#include "handover/geom.hpp"

#include <optional>

namespace handover {

struct CapsuleAttachment {
  int frame = -1;  // -1 = base frame, otherwise arm joint frame index
  Capsule capsule; // local coordinates of the attachment frame
  std::string name;
};

struct CameraMount {
  int frame = -1;
  Pose3 local;  // optical axis +z, x right
};

struct RobotSpec {
  std::string version = "robot-spec-v1";
  double footprint_radius = 0.30;
  double max_base_speed = 0.8;    // m/s
  double max_joint_speed = 2.0;   // rad/s
  KinematicChain arm;             // rooted in the base frame
  std::vector<CapsuleAttachment> capsules;
  CameraMount head_cam;
  CameraMount wrist_cam;

  static RobotSpec default_spec();
  json to_json() const;
  static RobotSpec from_json(const json& j);
};

struct RobotState {
  Pose2 base;
  Eigen::VectorXd arm;  // 7 joint angles
  bool gripper_closed = false;
};

// Per-control-step deltas. arm_trans/arm_rot move the EE in its current
// frame; base is (dx, dy, dtheta) in the current base frame.
struct Action {
  Vector3d arm_trans{0, 0, 0};
  Vector3d arm_rot{0, 0, 0};  // axis-angle
  Vector3d base{0, 0, 0};

  json to_json() const;
  static Action from_json(const json& j);
};

struct Trajectory {
  double t0 = 0;
  double period = 0.15;
  std::vector<RobotState> waypoints;
};

struct RobotFk {
  Pose3 ee;
  std::vector<Capsule> capsules;  // world frame, parallel to spec.capsules
  Pose3 head_cam;
  Pose3 wrist_cam;
  ChainFk arm_fk;  // frames in world
};

RobotFk robot_fk(const RobotSpec& spec, const RobotState& state);
Pose3 robot_ee(const RobotSpec& spec, const RobotState& state);

struct ApplyResult {
  RobotState state;
  bool ik_failed = false;  // "ik-unreachable": robot stayed put
};

// Throws "action-cap-exceeded" when a delta is outside the configured caps.
ApplyResult apply_action(const RobotSpec& spec, const RobotCfg& cfg,
                         const RobotState& state, const Action& action);

// Arm-only IK with the base held fixed; target in world frame.
IkResult solve_fullbody_ik(const RobotSpec& spec, const RobotCfg& cfg,
                           const Pose2& base, const Pose3& target_ee,
                           const Eigen::VectorXd& q0);

struct CollisionResult {
  double min_distance = std::numeric_limits<double>::infinity();
  bool contact = false;
  int robot_index = -1;
  int scene_index = -1;
};

CollisionResult robot_collision(const RobotSpec& spec, const RobotState& state,
                                const SdfScene& scene);
CollisionResult robot_collision(const RobotFk& fk, const SdfScene& scene);

// Eight fixed points around the gripper jaws, EE frame. Used by the
// keypoint-matching losses and nowhere else.
const std::vector<Vector3d>& gripper_keypoints();
// Coarse gripper occupancy (jaw span + approach shaft) posed at an EE-frame
// grasp pose; used to prefilter grasps that would pinch the human hand.
std::vector<Capsule> gripper_proxy(const Pose3& ee_world);

void to_json(json& j, const RobotState& s);
void from_json(const json& j, RobotState& s);

}  // namespace handover
