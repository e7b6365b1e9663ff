#pragma once

// Interactive human for handover scenes: a 16-keypoint skeleton posed by a
// small joint set, scripted full-body motion profiles, a cache of handover
// arm motions indexed by trigger time, and the phase machine that switches
// between them. Everything derives deterministically from the scene seed.

#include "handover/chain.hpp"
#include "handover/config.hpp"
#include "handover/geom.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>

namespace handover {

// Keypoint order used everywhere (features, serialization, capsules).
enum Keypoint : int {
  kp_pelvis = 0,
  kp_head,
  kp_l_shoulder,
  kp_l_elbow,
  kp_l_wrist,
  kp_l_hand,
  kp_r_shoulder,
  kp_r_elbow,
  kp_r_wrist,
  kp_r_hand,
  kp_l_hip,
  kp_l_knee,
  kp_l_ankle,
  kp_r_hip,
  kp_r_knee,
  kp_r_ankle,
  kp_count
};

// Joint vector layout (19 scalars) for a BodyFrame.
enum BodyJoint : int {
  bj_torso_pitch = 0,
  bj_l_arm0,  // 7 arm joints: shoulder yaw/pitch/roll, elbow, wrist yaw/pitch/roll
  bj_r_arm0 = bj_l_arm0 + 7,
  bj_l_hip = bj_r_arm0 + 7,
  bj_l_knee,
  bj_r_hip,
  bj_r_knee,
  bj_count
};

struct HumanModel {
  bool right_handed = true;
  // skeleton dimensions, meters
  double shoulder_lateral = 0.20;
  double shoulder_height = 0.50;  // above pelvis
  double head_height = 0.72;
  double hip_lateral = 0.10;
  double thigh = 0.40;
  double shin = 0.40;
  double upper_arm = 0.34;
  double forearm = 0.30;
  double hand_length = 0.09;
  double stand_height = 0.95;  // pelvis above ground when standing
  // capsule radii (one table, filled from config)
  double r_torso = 0.13;
  double r_head = 0.10;
  double r_upper_arm = 0.05;
  double r_forearm = 0.045;
  double r_hand = 0.04;
  double r_thigh = 0.07;
  double r_shin = 0.055;

  json to_json() const;
  static HumanModel from_json(const json& j);
};

HumanModel build_human_model(const HumanCfg& cfg, std::mt19937_64& rng);

struct BodyFrame {
  Pose2 root;          // ground-plane pose of the pelvis
  double root_height = 0.95;
  Eigen::VectorXd joints{Eigen::VectorXd::Zero(bj_count)};
};

BodyFrame interpolate_frames(const BodyFrame& a, const BodyFrame& b, double s);

enum class Profile { walk_straight, walk_curved, sit, descend, oscillate };
const char* profile_name(Profile p);
Profile profile_from_name(const std::string& name);

struct BodyMotion {
  Profile profile = Profile::walk_straight;
  double dt = 0.05;
  std::vector<BodyFrame> frames;  // covers [0, prehandover_duration]

  BodyFrame at(double t) const;  // clamped, linear interpolation
  double duration() const { return dt * (frames.size() - 1); }
};

BodyMotion gen_prehandover_motion(const HumanCfg& cfg, Profile profile,
                                  double dt, std::mt19937_64& rng);

// Posed skeleton: world keypoints, labeled capsules, hand poses.
struct SkeletonPose {
  std::array<Vector3d, kp_count> keypoints;
  Pose3 torso;   // pelvis-origin frame (heading + torso pitch)
  Pose3 l_hand;  // tool frame at the hand keypoint
  Pose3 r_hand;
};

SkeletonPose pose_skeleton(const HumanModel& m, const BodyFrame& f);
SdfScene human_capsules(const HumanModel& m, const SkeletonPose& pose);
// The 7-joint arm chain of one side, rooted in the world (torso frame applied).
KinematicChain human_arm_chain(const HumanModel& m, const Pose3& torso, bool right);

// Handover target region: distance from the handover shoulder, height above
// the pelvis, azimuth around the torso forward axis, near-vertical grip.
Pose3 sample_handover_target(const HumanCfg& cfg, const HumanModel& m,
                             const BodyFrame& frame, std::mt19937_64& rng);
bool target_in_region(const HumanCfg& cfg, const HumanModel& m,
                      const BodyFrame& frame, const Pose3& target);

enum class ArmIkStatus { ok, unreachable, infeasible };

struct ArmIkResult {
  ArmIkStatus status = ArmIkStatus::unreachable;
  Eigen::VectorXd q;
};

// DLS with restarts; solutions interpenetrating the torso are rejected
// ("ik-infeasible"), non-converged targets are "ik-unreachable".
ArmIkResult solve_arm_ik(const HumanCfg& cfg, const HumanModel& m,
                         const BodyFrame& frame, const Pose3& target_hand,
                         std::mt19937_64& rng);

struct ArmMotion {
  double bucket_time = 0;
  std::vector<Eigen::VectorXd> frames;  // 7 joint angles per tick
  Pose3 final_object_pose;              // at the bucket body frame

  json to_json() const;
  static ArmMotion from_json(const json& j);
};

// Min-jerk joint interpolation from start to target over `duration`.
ArmMotion interpolate_arm_motion(const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& target, double duration,
                                 double dt);
double min_jerk(double s);

enum class Phase { pre_handover, reacting, handover, frozen };
const char* phase_name(Phase p);

struct PhaseState {
  Phase phase = Phase::pre_handover;
  double entry_time = 0;
  double trigger_distance = 1.0;
  double reaction_delay = 0.2;
  double handover_entry = -1;  // kept once handover starts (also in frozen)
  double frozen_entry = -1;    // freeze moment; caps arm playback mid-motion

  json to_json() const;
  static PhaseState from_json(const json& j);
};

struct Scene; // fwd

// Advance the phase machine to time t given the two ground positions.
// Transitions are monotone; frozen absorbs. `touched` forces frozen (the
// robot reached the object).
void step_phase_machine(PhaseState& state, const Scene& scene,
                        const Vector2d& robot_xy, const Vector2d& human_xy,
                        double t, bool touched = false);

struct Scene {
  uint64_t seed = 0;
  std::string profile_tag;
  HumanModel human;
  BodyMotion body;
  std::vector<ArmMotion> arm_cache;
  Shape object;
  Pose3 object_in_hand;  // object frame relative to the hand frame
  std::vector<Pose3> grasps;  // grasp frames in the object frame
  Pose2 global_offset;
  double trigger_distance = 1.0;
  double reaction_delay = 0.2;  // sampled at generation time
  double prehandover_duration = 6.0;
  double handover_duration = 1.05;
  double dt = 0.05;

  PhaseState initial_phase() const;

  json to_json() const;
  static Scene from_json(const json& j);
};

struct SceneState {
  SkeletonPose skeleton;
  SdfScene capsules;
  Pose3 hand;    // handover hand
  Pose3 object;  // world
  BodyFrame frame;
  Phase phase = Phase::pre_handover;
};

// Pure function of scene + phase history up to t. Throws on t outside
// [0, t_max-ish]; callers pass tick-aligned times.
SceneState scene_state_at(const Scene& scene, const PhaseState& track, double t);

// Predicted state at future time tf assuming no *new* robot-induced trigger:
// scheduled transitions (reaction timer, prehandover timeout, arm completion)
// still fire. Used by the planner's oracle window.
SceneState scene_predict(const Scene& scene, const PhaseState& track, double tf);

// Procedural antipodal grasp set for a primitive (count from config).
std::vector<Pose3> gen_grasps(const Shape& shape, int count);

// The reaction delay a scene built from (profile, seed, attempt) would carry.
// Exposed so distribution checks can draw through the same stream.
double sample_reaction_delay(const HumanCfg& cfg, Profile profile,
                             uint64_t seed, int attempt);

// Full scene synthesis with rejection on failed arm-cache buckets.
Scene build_scene(const Config& cfg, Profile profile, uint64_t seed);
Scene build_scene_any_profile(const Config& cfg, uint64_t seed);  // n0-style

}  // namespace handover
