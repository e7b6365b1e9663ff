#include "handover/robot.hpp"

#include <stdexcept>

namespace handover {

using Eigen::VectorXd;

RobotSpec RobotSpec::default_spec() {
  RobotSpec s;
  s.arm.root.t = {0.10, 0.0, 0.55};

  auto joint = [](Vector3d off, Vector3d axis, double lo, double hi) {
    ChainJoint j;
    j.offset = std::move(off);
    j.axis = std::move(axis);
    j.lo = lo;
    j.hi = hi;
    return j;
  };
  // S-R-S arrangement: three axes meeting at the shoulder, elbow pitch,
  // roll-pitch-roll wrist. Zero posture points the arm along +x.
  s.arm.joints = {
      joint({0, 0, 0}, {0, 0, 1}, -2.9, 2.9),
      joint({0, 0, 0}, {0, 1, 0}, -2.0, 2.0),
      joint({0, 0, 0}, {1, 0, 0}, -2.9, 2.9),
      joint({0.42, 0, 0}, {0, 1, 0}, -2.4, 2.4),
      joint({0.38, 0, 0}, {1, 0, 0}, -2.9, 2.9),
      joint({0, 0, 0}, {0, 1, 0}, -2.0, 2.0),
      joint({0, 0, 0}, {1, 0, 0}, -2.9, 2.9),
  };
  s.arm.tip.t = {0.10, 0.0, 0.0};
  s.arm.rest = VectorXd::Zero(7);
  s.arm.rest << 0.0, 0.8, 0.0, -1.6, 0.0, 0.8, 0.0;

  s.capsules = {
      {-1, {{0.0, 0, 0.06}, {0.0, 0, 0.10}, 0.30}, "base"},
      {-1, {{0.0, 0, 0.10}, {0.10, 0, 0.55}, 0.13}, "column"},
      {2, {{0, 0, 0}, {0.42, 0, 0}, 0.055}, "upper_arm"},
      {3, {{0, 0, 0}, {0.38, 0, 0}, 0.05}, "forearm"},
      {6, {{0, 0, 0}, {0.14, 0, 0}, 0.045}, "gripper"},
  };

  s.head_cam.frame = -1;
  s.head_cam.local.t = {0.05, 0.0, 1.30};
  s.head_cam.local.q =
      Eigen::Quaterniond(Eigen::AngleAxisd(110.0 * M_PI / 180.0, Vector3d::UnitY()));
  s.wrist_cam.frame = 6;
  s.wrist_cam.local.t = {0.02, 0.0, 0.06};
  s.wrist_cam.local.q =
      Eigen::Quaterniond(Eigen::AngleAxisd(M_PI / 2.0, Vector3d::UnitY()));
  return s;
}

json RobotSpec::to_json() const {
  json j;
  j["version"] = version;
  j["footprint_radius"] = footprint_radius;
  j["max_base_speed"] = max_base_speed;
  j["max_joint_speed"] = max_joint_speed;
  j["arm"]["root"] = arm.root;
  j["arm"]["tip"] = arm.tip;
  j["arm"]["rest"] = std::vector<double>(arm.rest.data(), arm.rest.data() + arm.rest.size());
  j["arm"]["joints"] = json::array();
  for (const auto& jt : arm.joints) {
    j["arm"]["joints"].push_back(
        {{"offset", {jt.offset.x(), jt.offset.y(), jt.offset.z()}},
         {"axis", {jt.axis.x(), jt.axis.y(), jt.axis.z()}},
         {"lo", jt.lo},
         {"hi", jt.hi}});
  }
  j["capsules"] = json::array();
  for (const auto& c : capsules) {
    j["capsules"].push_back(
        {{"frame", c.frame}, {"capsule", c.capsule}, {"name", c.name}});
  }
  j["head_cam"] = {{"frame", head_cam.frame}, {"local", head_cam.local}};
  j["wrist_cam"] = {{"frame", wrist_cam.frame}, {"local", wrist_cam.local}};
  return j;
}

RobotSpec RobotSpec::from_json(const json& j) {
  RobotSpec s;
  s.version = j.at("version").get<std::string>();
  s.footprint_radius = j.at("footprint_radius").get<double>();
  s.max_base_speed = j.at("max_base_speed").get<double>();
  s.max_joint_speed = j.at("max_joint_speed").get<double>();
  s.arm.root = j.at("arm").at("root").get<Pose3>();
  s.arm.tip = j.at("arm").at("tip").get<Pose3>();
  const auto rest = j.at("arm").at("rest").get<std::vector<double>>();
  s.arm.rest = Eigen::Map<const VectorXd>(rest.data(), rest.size());
  s.arm.joints.clear();
  for (const auto& jt : j.at("arm").at("joints")) {
    ChainJoint cj;
    const auto& off = jt.at("offset");
    cj.offset = {off[0].get<double>(), off[1].get<double>(), off[2].get<double>()};
    const auto& ax = jt.at("axis");
    cj.axis = {ax[0].get<double>(), ax[1].get<double>(), ax[2].get<double>()};
    cj.lo = jt.at("lo").get<double>();
    cj.hi = jt.at("hi").get<double>();
    s.arm.joints.push_back(cj);
  }
  s.capsules.clear();
  for (const auto& c : j.at("capsules")) {
    s.capsules.push_back({c.at("frame").get<int>(), c.at("capsule").get<Capsule>(),
                          c.at("name").get<std::string>()});
  }
  s.head_cam = {j.at("head_cam").at("frame").get<int>(),
                j.at("head_cam").at("local").get<Pose3>()};
  s.wrist_cam = {j.at("wrist_cam").at("frame").get<int>(),
                 j.at("wrist_cam").at("local").get<Pose3>()};
  return s;
}

RobotFk robot_fk(const RobotSpec& spec, const RobotState& state) {
  RobotFk out;
  const Pose3 base = lift(state.base);

  KinematicChain world_chain = spec.arm;
  world_chain.root = compose(base, spec.arm.root);
  out.arm_fk = chain_fk(world_chain, state.arm);
  out.ee = out.arm_fk.tip;

  auto frame_pose = [&](int frame) -> Pose3 {
    return frame < 0 ? base : out.arm_fk.frames[frame];
  };
  out.capsules.reserve(spec.capsules.size());
  for (const auto& att : spec.capsules) {
    const Pose3 f = frame_pose(att.frame);
    out.capsules.push_back(
        {f.apply(att.capsule.a), f.apply(att.capsule.b), att.capsule.radius});
  }
  out.head_cam = compose(frame_pose(spec.head_cam.frame), spec.head_cam.local);
  out.wrist_cam = compose(frame_pose(spec.wrist_cam.frame), spec.wrist_cam.local);
  return out;
}

Pose3 robot_ee(const RobotSpec& spec, const RobotState& state) {
  KinematicChain world_chain = spec.arm;
  world_chain.root = compose(lift(state.base), spec.arm.root);
  return chain_fk(world_chain, state.arm).tip;
}

IkResult solve_fullbody_ik(const RobotSpec& spec, const RobotCfg& cfg,
                           const Pose2& base, const Pose3& target_ee,
                           const VectorXd& q0) {
  // Solve in the base frame so the chain stays fixed.
  const Pose3 target_local = compose(inverse(lift(base)), target_ee);
  IkParams p;
  p.pos_tol = cfg.ik_pos_tol;
  p.rot_tol = cfg.ik_rot_tol;
  p.max_iters = cfg.ik_max_iters;
  p.lambda = cfg.ik_lambda;
  p.null_gain = cfg.ik_null_gain;
  return chain_ik_dls(spec.arm, q0, target_local, p);
}

ApplyResult apply_action(const RobotSpec& spec, const RobotCfg& cfg,
                         const RobotState& state, const Action& a) {
  constexpr double kSlack = 1e-9;
  if (a.arm_trans.norm() > cfg.cap_arm_trans + kSlack ||
      a.arm_rot.norm() > cfg.cap_arm_rot + kSlack ||
      a.base.head<2>().norm() > cfg.cap_base_trans + kSlack ||
      std::abs(a.base.z()) > cfg.cap_base_rot + kSlack) {
    throw std::runtime_error("action-cap-exceeded");
  }

  const Pose3 old_ee = robot_ee(spec, state);
  Pose3 delta;
  delta.t = a.arm_trans;
  delta.q = Eigen::Quaterniond(rodrigues(a.arm_rot)).normalized();
  const Pose3 target_ee = compose(old_ee, delta);

  const Pose2 new_base = compose(state.base, {a.base.x(), a.base.y(), a.base.z()});
  const IkResult ik = solve_fullbody_ik(spec, cfg, new_base, target_ee, state.arm);

  ApplyResult out;
  if (!ik.converged) {
    out.state = state;
    out.ik_failed = true;
    return out;
  }
  out.state = RobotState{new_base, ik.q, state.gripper_closed};
  return out;
}

CollisionResult robot_collision(const RobotFk& fk, const SdfScene& scene) {
  CollisionResult res;
  for (int i = 0; i < static_cast<int>(fk.capsules.size()); ++i) {
    for (int k = 0; k < static_cast<int>(scene.capsules.size()); ++k) {
      const double d = capsule_capsule_distance(fk.capsules[i], scene.capsules[k]);
      if (d < res.min_distance) {
        res.min_distance = d;
        res.robot_index = i;
        res.scene_index = k;
      }
    }
  }
  res.contact = res.min_distance < 0.0;
  return res;
}

CollisionResult robot_collision(const RobotSpec& spec, const RobotState& state,
                                const SdfScene& scene) {
  return robot_collision(robot_fk(spec, state), scene);
}

const std::vector<Vector3d>& gripper_keypoints() {
  static const std::vector<Vector3d> pts = {
      {0.04, 0.03, 0.02},  {0.04, 0.03, -0.02},  {0.04, -0.03, 0.02},
      {0.04, -0.03, -0.02}, {-0.04, 0.03, 0.02}, {-0.04, 0.03, -0.02},
      {-0.04, -0.03, 0.02}, {-0.04, -0.03, -0.02}};
  return pts;
}

std::vector<Capsule> gripper_proxy(const Pose3& ee) {
  return {
      {ee.apply({0.0, 0, -0.05}), ee.apply({0.0, 0, 0.05}), 0.03},  // jaw span
      {ee.apply({-0.09, 0, 0.0}), ee.apply({-0.01, 0, 0.0}), 0.025} // shaft
  };
}

void to_json(json& j, const RobotState& s) {
  j = json{{"base", s.base},
           {"arm", std::vector<double>(s.arm.data(), s.arm.data() + s.arm.size())},
           {"gripper_closed", s.gripper_closed}};
}

void from_json(const json& j, RobotState& s) {
  s.base = j.at("base").get<Pose2>();
  const auto arm = j.at("arm").get<std::vector<double>>();
  s.arm = Eigen::Map<const VectorXd>(arm.data(), arm.size());
  s.gripper_closed = j.at("gripper_closed").get<bool>();
}

json Action::to_json() const {
  return json{{"arm_trans", {arm_trans.x(), arm_trans.y(), arm_trans.z()}},
              {"arm_rot", {arm_rot.x(), arm_rot.y(), arm_rot.z()}},
              {"base", {base.x(), base.y(), base.z()}}};
}

Action Action::from_json(const json& j) {
  Action a;
  const auto& t = j.at("arm_trans");
  a.arm_trans = {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()};
  const auto& r = j.at("arm_rot");
  a.arm_rot = {r[0].get<double>(), r[1].get<double>(), r[2].get<double>()};
  const auto& b = j.at("base");
  a.base = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>()};
  return a;
}

}  // namespace handover
