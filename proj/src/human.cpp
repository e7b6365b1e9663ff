#include "handover/human.hpp"

#include "handover/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace handover {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Seed stream ids; every generator draws from its own child stream so adding
// draws to one stage never shifts another.
enum : uint64_t {
  stream_scene = 0xA11CE,
  stream_model = 1,
  stream_motion = 2,
  stream_object = 3,
  stream_target = 4,
  stream_arm_ik = 5,
  stream_offset = 6,
  stream_reaction = 7,
};

Eigen::Quaterniond yaw_quat(double a) {
  return Eigen::Quaterniond(Eigen::AngleAxisd(a, Vector3d::UnitZ()));
}

// Right-handed frame with column x = x_axis and z as close to z_hint as the
// orthogonality constraint allows.
Eigen::Quaterniond frame_from_xz(const Vector3d& x_axis, const Vector3d& z_hint) {
  Vector3d x = x_axis.normalized();
  Vector3d y = z_hint.cross(x);
  if (y.norm() < 1e-9) {
    Vector3d alt = std::abs(x.z()) < 0.9 ? Vector3d::UnitZ() : Vector3d::UnitY();
    y = alt.cross(x);
  }
  y.normalize();
  Vector3d z = x.cross(y);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return Eigen::Quaterniond(r).normalized();
}

double smoothstep01(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

json vec_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::VectorXd json_vec(const json& j) {
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<int>(i)] = j[i].get<double>();
  return v;
}

json frame_json(const BodyFrame& f) {
  return json{{"root", {f.root.x, f.root.y, f.root.heading}},
              {"h", f.root_height},
              {"j", vec_json(f.joints)}};
}

BodyFrame frame_from(const json& j) {
  BodyFrame f;
  f.root.x = j.at("root")[0].get<double>();
  f.root.y = j.at("root")[1].get<double>();
  f.root.heading = j.at("root")[2].get<double>();
  f.root_height = j.at("h").get<double>();
  f.joints = json_vec(j.at("j"));
  return f;
}

// Walking pose as a function of gait phase and planar speed. Both arms swing
// lightly (the human carries the object, so no full swing on either side).
void apply_gait(BodyFrame& f, double phase, double speed) {
  double a_leg = 0.55 * std::clamp(speed, 0.0, 1.2);
  double sl = std::sin(phase);
  double sr = std::sin(phase + kPi);
  f.joints[bj_l_hip] = a_leg * sl;
  f.joints[bj_r_hip] = a_leg * sr;
  double k = 0.25 + 0.3 * std::min(speed, 1.0);
  f.joints[bj_l_knee] = 0.08 + k * std::max(0.0, std::sin(phase + 2.2));
  f.joints[bj_r_knee] = 0.08 + k * std::max(0.0, std::sin(phase + kPi + 2.2));
  double swing = 0.22 * a_leg;
  f.joints[bj_l_arm0 + 1] = swing * sr;
  f.joints[bj_r_arm0 + 1] = swing * sl;
  f.joints[bj_l_arm0 + 2] = 0.12;
  f.joints[bj_r_arm0 + 2] = -0.12;
  f.joints[bj_l_arm0 + 3] = 0.35 + 0.05 * sr;
  f.joints[bj_r_arm0 + 3] = 0.35 + 0.05 * sl;
  f.joints[bj_torso_pitch] = 0.05;
}

Eigen::VectorXd arm_motion_at(const ArmMotion& am, double tau, double dt) {
  int n = static_cast<int>(am.frames.size());
  if (n == 1) return am.frames[0];
  double x = std::clamp(tau / dt, 0.0, static_cast<double>(n - 1));
  int i = std::min(static_cast<int>(std::floor(x)), n - 2);
  double s = x - i;
  return am.frames[i] + s * (am.frames[i + 1] - am.frames[i]);
}

Phase phase_of(const Scene& scene, const PhaseState& track, double t) {
  if (track.frozen_entry >= 0 && t >= track.frozen_entry) return Phase::frozen;
  if (track.handover_entry >= 0 && t >= track.handover_entry) {
    return t < track.handover_entry + scene.handover_duration ? Phase::handover
                                                              : Phase::frozen;
  }
  return track.phase;
}

Shape sample_object(std::mt19937_64& rng) {
  Shape s;
  int kind = uniform_int(rng, 0, 2);
  if (kind == 0) {
    s.kind = Shape::Kind::box;
    s.dims = Vector3d(uniform(rng, 0.02, 0.05), uniform(rng, 0.02, 0.05),
                      uniform(rng, 0.02, 0.05));
  } else if (kind == 1) {
    s.kind = Shape::Kind::cylinder;
    s.dims = Vector3d(uniform(rng, 0.02, 0.04), uniform(rng, 0.04, 0.08), 0);
  } else {
    s.kind = Shape::Kind::sphere;
    s.dims = Vector3d(uniform(rng, 0.025, 0.045), 0, 0);
  }
  return s;
}

std::vector<Vector3d> fibonacci_dirs(int k) {
  std::vector<Vector3d> dirs;
  dirs.reserve(k);
  double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < k; ++i) {
    double z = 1.0 - 2.0 * (i + 0.5) / k;
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = golden * i;
    dirs.emplace_back(r * std::cos(th), r * std::sin(th), z);
  }
  return dirs;
}

}  // namespace

json HumanModel::to_json() const {
  return json{{"right_handed", right_handed},
              {"shoulder_lateral", shoulder_lateral},
              {"shoulder_height", shoulder_height},
              {"head_height", head_height},
              {"hip_lateral", hip_lateral},
              {"thigh", thigh},
              {"shin", shin},
              {"upper_arm", upper_arm},
              {"forearm", forearm},
              {"hand_length", hand_length},
              {"stand_height", stand_height},
              {"r_torso", r_torso},
              {"r_head", r_head},
              {"r_upper_arm", r_upper_arm},
              {"r_forearm", r_forearm},
              {"r_hand", r_hand},
              {"r_thigh", r_thigh},
              {"r_shin", r_shin}};
}

HumanModel HumanModel::from_json(const json& j) {
  HumanModel m;
  m.right_handed = j.at("right_handed").get<bool>();
  m.shoulder_lateral = j.at("shoulder_lateral").get<double>();
  m.shoulder_height = j.at("shoulder_height").get<double>();
  m.head_height = j.at("head_height").get<double>();
  m.hip_lateral = j.at("hip_lateral").get<double>();
  m.thigh = j.at("thigh").get<double>();
  m.shin = j.at("shin").get<double>();
  m.upper_arm = j.at("upper_arm").get<double>();
  m.forearm = j.at("forearm").get<double>();
  m.hand_length = j.at("hand_length").get<double>();
  m.stand_height = j.at("stand_height").get<double>();
  m.r_torso = j.at("r_torso").get<double>();
  m.r_head = j.at("r_head").get<double>();
  m.r_upper_arm = j.at("r_upper_arm").get<double>();
  m.r_forearm = j.at("r_forearm").get<double>();
  m.r_hand = j.at("r_hand").get<double>();
  m.r_thigh = j.at("r_thigh").get<double>();
  m.r_shin = j.at("r_shin").get<double>();
  return m;
}

HumanModel build_human_model(const HumanCfg& cfg, std::mt19937_64& rng) {
  HumanModel m;
  m.right_handed = uniform(rng, 0.0, 1.0) < 0.5;
  m.r_torso = cfg.r_torso;
  m.r_head = cfg.r_head;
  m.r_upper_arm = cfg.r_upper_arm;
  m.r_forearm = cfg.r_forearm;
  m.r_hand = cfg.r_hand;
  m.r_thigh = cfg.r_thigh;
  m.r_shin = cfg.r_shin;
  // keep shoulders clear of the torso capsule regardless of configured radii
  m.shoulder_lateral = std::max(0.20, cfg.r_torso + cfg.r_upper_arm + 0.01);
  return m;
}

BodyFrame interpolate_frames(const BodyFrame& a, const BodyFrame& b, double s) {
  BodyFrame f;
  f.root.x = a.root.x + s * (b.root.x - a.root.x);
  f.root.y = a.root.y + s * (b.root.y - a.root.y);
  f.root.heading =
      wrap_angle(a.root.heading + s * wrap_angle(b.root.heading - a.root.heading));
  f.root_height = a.root_height + s * (b.root_height - a.root_height);
  f.joints = a.joints + s * (b.joints - a.joints);
  return f;
}

const char* profile_name(Profile p) {
  switch (p) {
    case Profile::walk_straight: return "walk-straight";
    case Profile::walk_curved: return "walk-curved";
    case Profile::sit: return "sit";
    case Profile::descend: return "descend";
    case Profile::oscillate: return "oscillate";
  }
  return "walk-straight";
}

Profile profile_from_name(const std::string& name) {
  for (Profile p : {Profile::walk_straight, Profile::walk_curved, Profile::sit,
                    Profile::descend, Profile::oscillate}) {
    if (name == profile_name(p)) return p;
  }
  throw std::runtime_error("unknown profile: " + name);
}

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::pre_handover: return "pre-handover";
    case Phase::reacting: return "reacting";
    case Phase::handover: return "handover";
    case Phase::frozen: return "frozen";
  }
  return "pre-handover";
}

BodyFrame BodyMotion::at(double t) const {
  if (frames.empty()) throw std::runtime_error("empty body motion");
  if (frames.size() == 1) return frames.front();
  double x = std::clamp(t / dt, 0.0, static_cast<double>(frames.size() - 1));
  int i = std::min(static_cast<int>(std::floor(x)),
                   static_cast<int>(frames.size()) - 2);
  return interpolate_frames(frames[i], frames[i + 1], x - i);
}

BodyMotion gen_prehandover_motion(const HumanCfg& cfg, Profile profile,
                                  double dt, std::mt19937_64& rng) {
  BodyMotion m;
  m.profile = profile;
  m.dt = dt;
  int n = static_cast<int>(std::lround(cfg.prehandover_duration / dt)) + 1;
  m.frames.reserve(n);

  const double stand = 0.95;
  double h0 = uniform(rng, -kPi, kPi);
  double gait0 = uniform(rng, 0, 2 * kPi);
  double speed = 0, curvature = 0, drop = 0, amp = 0, freq = 0;
  switch (profile) {
    case Profile::walk_straight:
      speed = uniform(rng, 0.4, 1.2);
      break;
    case Profile::walk_curved:
      speed = uniform(rng, 0.4, 1.0);
      curvature = (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) *
                  uniform(rng, 0.1, 0.5);
      break;
    case Profile::sit:
      drop = uniform(rng, 0.30, 0.45);
      break;
    case Profile::descend:
      speed = uniform(rng, 0.4, 0.8);
      break;
    case Profile::oscillate:
      amp = uniform(rng, 0.15, 0.4);
      freq = uniform(rng, 0.2, 0.5);
      break;
  }

  double phase = gait0;
  for (int i = 0; i < n; ++i) {
    double t = i * dt;
    BodyFrame f;
    double v = speed;  // instantaneous planar speed, drives the gait
    double height = stand;
    double sit_frac = 0;
    switch (profile) {
      case Profile::walk_straight:
        f.root = {speed * t * std::cos(h0), speed * t * std::sin(h0), h0};
        break;
      case Profile::walk_curved: {
        double hh = h0 + curvature * speed * t;
        f.root = {(std::sin(hh) - std::sin(h0)) / curvature,
                  -(std::cos(hh) - std::cos(h0)) / curvature, wrap_angle(hh)};
        break;
      }
      case Profile::sit: {
        f.root = {0, 0, h0};
        sit_frac = smoothstep01((t - 1.0) / 2.0);
        height = stand - drop * sit_frac;
        v = 0;
        break;
      }
      case Profile::descend:
        f.root = {speed * t * std::cos(h0), speed * t * std::sin(h0), h0};
        height = stand + 0.30 * std::max(0.0, 1.0 - t / 4.0);
        break;
      case Profile::oscillate: {
        Vector2d dir(std::cos(h0), std::sin(h0));
        Vector2d perp(-std::sin(h0), std::cos(h0));
        Vector2d pos = 0.2 * t * dir + amp * std::sin(2 * kPi * freq * t) * perp;
        f.root = {pos.x(), pos.y(), h0};
        double vy = amp * 2 * kPi * freq * std::cos(2 * kPi * freq * t);
        v = std::hypot(0.2, vy);
        break;
      }
    }
    apply_gait(f, phase, v);
    if (profile == Profile::sit) {
      f.joints[bj_l_hip] = f.joints[bj_r_hip] = -1.15 * sit_frac * (drop / 0.35);
      f.joints[bj_l_knee] = f.joints[bj_r_knee] =
          0.08 + 1.25 * sit_frac * (drop / 0.35);
      f.joints[bj_torso_pitch] = 0.05 + 0.08 * sit_frac;
    } else {
      height += 0.012 * std::sin(2 * phase);
    }
    f.root_height = height;
    m.frames.push_back(f);
    phase += 2 * kPi * (std::max(v, 0.0) / 1.3) * dt;
  }
  return m;
}

KinematicChain human_arm_chain(const HumanModel& m, const Pose3& torso,
                               bool right) {
  KinematicChain c;
  c.root = torso;
  double lat = right ? -m.shoulder_lateral : m.shoulder_lateral;
  c.joints = {
      {{0, lat, m.shoulder_height}, Vector3d::UnitZ(), -2.9, 2.9},
      {{0, 0, 0}, Vector3d::UnitY(), -2.9, 2.9},
      {{0, 0, 0}, Vector3d::UnitX(), -2.9, 2.9},
      {{0, 0, -m.upper_arm}, Vector3d(0, -1, 0), 0.0, 2.6},  // elbow flexion
      {{0, 0, -m.forearm}, Vector3d::UnitZ(), -2.0, 2.0},
      {{0, 0, 0}, Vector3d::UnitY(), -2.0, 2.0},
      {{0, 0, 0}, Vector3d::UnitX(), -2.0, 2.0},
  };
  c.tip.t = Vector3d(0, 0, -m.hand_length);
  c.rest = Eigen::VectorXd(7);
  c.rest << 0, 0.1, (right ? -0.15 : 0.15), 0.5, 0, 0, 0;
  return c;
}

SkeletonPose pose_skeleton(const HumanModel& m, const BodyFrame& f) {
  SkeletonPose out;
  Vector3d pelvis(f.root.x, f.root.y, f.root_height);
  Eigen::Quaterniond q_yaw = yaw_quat(f.root.heading);
  Eigen::Quaterniond q_torso =
      q_yaw * Eigen::Quaterniond(
                  Eigen::AngleAxisd(f.joints[bj_torso_pitch], Vector3d::UnitY()));
  out.torso.t = pelvis;
  out.torso.q = q_torso.normalized();
  out.keypoints[kp_pelvis] = pelvis;
  out.keypoints[kp_head] = out.torso.apply(Vector3d(0, 0, m.head_height));

  for (int side = 0; side < 2; ++side) {
    bool right = side == 1;
    KinematicChain chain = human_arm_chain(m, out.torso, right);
    int a0 = right ? bj_r_arm0 : bj_l_arm0;
    ChainFk fk = chain_fk(chain, f.joints.segment(a0, 7));
    int base = right ? kp_r_shoulder : kp_l_shoulder;
    out.keypoints[base + 0] = fk.frames[0].t;
    out.keypoints[base + 1] = fk.frames[3].t;
    out.keypoints[base + 2] = fk.frames[4].t;
    out.keypoints[base + 3] = fk.tip.t;
    (right ? out.r_hand : out.l_hand) = fk.tip;
  }

  for (int side = 0; side < 2; ++side) {
    bool right = side == 1;
    int base = right ? kp_r_hip : kp_l_hip;
    double lat = right ? -m.hip_lateral : m.hip_lateral;
    double hip_pitch = f.joints[right ? bj_r_hip : bj_l_hip];
    double knee = f.joints[right ? bj_r_knee : bj_l_knee];
    Vector3d hip = pelvis + q_yaw * Vector3d(0, lat, 0);
    Eigen::Quaterniond q_thigh =
        q_yaw * Eigen::Quaterniond(Eigen::AngleAxisd(hip_pitch, Vector3d::UnitY()));
    Vector3d knee_p = hip + q_thigh * Vector3d(0, 0, -m.thigh);
    Eigen::Quaterniond q_shin =
        q_thigh * Eigen::Quaterniond(Eigen::AngleAxisd(knee, Vector3d::UnitY()));
    Vector3d ankle = knee_p + q_shin * Vector3d(0, 0, -m.shin);
    out.keypoints[base + 0] = hip;
    out.keypoints[base + 1] = knee_p;
    out.keypoints[base + 2] = ankle;
  }
  return out;
}

SdfScene human_capsules(const HumanModel& m, const SkeletonPose& s) {
  SdfScene sc;
  auto add = [&sc](const Vector3d& a, const Vector3d& b, double r,
                   const char* label) {
    sc.capsules.push_back({a, b, r});
    sc.labels.emplace_back(label);
  };
  const auto& kp = s.keypoints;
  Vector3d neck = s.torso.apply(Vector3d(0, 0, m.shoulder_height));
  Vector3d up = s.torso.rotate(Vector3d::UnitZ());
  add(kp[kp_pelvis], neck, m.r_torso, "body");
  add(kp[kp_head] - 0.05 * up, kp[kp_head] + 0.03 * up, m.r_head, "body");
  add(kp[kp_l_shoulder], kp[kp_l_elbow], m.r_upper_arm, "body");
  add(kp[kp_l_elbow], kp[kp_l_wrist], m.r_forearm, "body");
  add(kp[kp_l_wrist], kp[kp_l_hand], m.r_hand, m.right_handed ? "body" : "hand");
  add(kp[kp_r_shoulder], kp[kp_r_elbow], m.r_upper_arm, "body");
  add(kp[kp_r_elbow], kp[kp_r_wrist], m.r_forearm, "body");
  add(kp[kp_r_wrist], kp[kp_r_hand], m.r_hand, m.right_handed ? "hand" : "body");
  add(kp[kp_l_hip], kp[kp_l_knee], m.r_thigh, "body");
  add(kp[kp_l_knee], kp[kp_l_ankle], m.r_shin, "body");
  add(kp[kp_r_hip], kp[kp_r_knee], m.r_thigh, "body");
  add(kp[kp_r_knee], kp[kp_r_ankle], m.r_shin, "body");
  return sc;
}

Pose3 sample_handover_target(const HumanCfg& cfg, const HumanModel& m,
                             const BodyFrame& frame, std::mt19937_64& rng) {
  SkeletonPose sp = pose_skeleton(m, frame);
  Vector3d sh(0, m.right_handed ? -m.shoulder_lateral : m.shoulder_lateral,
              m.shoulder_height);
  for (int tries = 0; tries < 512; ++tries) {
    double d = uniform(rng, cfg.target_dist_min, cfg.target_dist_max);
    double h = uniform(rng, cfg.target_height_min, cfg.target_height_max);
    double az = uniform(rng, -cfg.target_azimuth, cfg.target_azimuth);
    // solve for the cylindrical radius that puts the point at distance d
    // from the shoulder while sitting at height h and azimuth az
    double b = sh.x() * std::cos(az) + sh.y() * std::sin(az);
    double c = sh.head<2>().squaredNorm() + (h - sh.z()) * (h - sh.z()) - d * d;
    double disc = b * b - c;
    if (disc < 0) continue;
    double rho = b + std::sqrt(disc);
    if (rho < 0.18) continue;  // keep the target outside the torso
    Vector3d local(rho * std::cos(az), rho * std::sin(az), h);
    // the forearm has to occupy the shoulder-target corridor; skip targets
    // whose corridor crosses the torso or head (cross-body reaches)
    Capsule corridor{sp.torso.apply(sh), sp.torso.apply(local), m.r_forearm};
    Vector3d neck = sp.torso.apply(Vector3d(0, 0, m.shoulder_height));
    Vector3d up = sp.torso.rotate(Vector3d::UnitZ());
    Capsule torso_c{sp.torso.t, neck, m.r_torso};
    Vector3d head = sp.torso.apply(Vector3d(0, 0, m.head_height));
    Capsule head_c{head - 0.05 * up, head + 0.03 * up, m.r_head};
    if (capsule_capsule_distance(corridor, torso_c) < 0.01) continue;
    if (capsule_capsule_distance(corridor, head_c) < 0.01) continue;
    double yaw = frame.root.heading + az + kPi + uniform(rng, -0.26, 0.26);
    double tilt = uniform(rng, 0, cfg.target_tilt_max);
    double tilt_dir = uniform(rng, -kPi, kPi);
    Vector3d tilt_axis(std::cos(tilt_dir), std::sin(tilt_dir), 0);
    Pose3 target;
    target.t = sp.torso.apply(local);
    target.q = (Eigen::Quaterniond(Eigen::AngleAxisd(tilt, tilt_axis)) *
                yaw_quat(yaw))
                   .normalized();
    return target;
  }
  throw std::runtime_error("handover target sampling stalled");
}

bool target_in_region(const HumanCfg& cfg, const HumanModel& m,
                      const BodyFrame& frame, const Pose3& target) {
  SkeletonPose sp = pose_skeleton(m, frame);
  Vector3d local = inverse(sp.torso).apply(target.t);
  Vector3d sh(0, m.right_handed ? -m.shoulder_lateral : m.shoulder_lateral,
              m.shoulder_height);
  const double tol = 1e-9;
  double d = (local - sh).norm();
  if (d < cfg.target_dist_min - tol || d > cfg.target_dist_max + tol) return false;
  if (local.z() < cfg.target_height_min - tol ||
      local.z() > cfg.target_height_max + tol)
    return false;
  double az = std::atan2(local.y(), local.x());
  if (std::abs(az) > cfg.target_azimuth + tol) return false;
  Vector3d grip = target.rotate(Vector3d::UnitZ());
  double tilt = std::acos(std::clamp(grip.z(), -1.0, 1.0));
  return tilt <= cfg.target_tilt_max + 1e-6;
}

ArmIkResult solve_arm_ik(const HumanCfg& cfg, const HumanModel& m,
                         const BodyFrame& frame, const Pose3& target_hand,
                         std::mt19937_64& rng) {
  SkeletonPose sp = pose_skeleton(m, frame);
  KinematicChain chain = human_arm_chain(m, sp.torso, m.right_handed);
  IkParams params;
  params.pos_tol = cfg.ik_pos_tol;
  params.rot_tol = cfg.ik_rot_tol;
  params.max_iters = cfg.ik_max_iters;
  params.lambda = cfg.ik_lambda;
  int a0 = m.right_handed ? bj_r_arm0 : bj_l_arm0;
  Eigen::VectorXd q_now = frame.joints.segment(a0, 7);

  SdfScene body = human_capsules(m, sp);
  const Capsule& torso_c = body.capsules[0];
  const Capsule& head_c = body.capsules[1];

  bool any_converged = false;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd q0 = q_now;
    if (attempt > 0) {
      q0 = chain.rest;
      for (int j = 0; j < 7; ++j) q0[j] += uniform(rng, -0.9, 0.9);
      q0 = chain.clamp(q0);
    }
    IkResult r = chain_ik_dls(chain, q0, target_hand, params);
    if (!r.converged) continue;
    any_converged = true;
    ChainFk fk = chain_fk(chain, r.q);
    Capsule upper{fk.frames[0].t, fk.frames[3].t, m.r_upper_arm};
    Capsule fore{fk.frames[3].t, fk.frames[4].t, m.r_forearm};
    Capsule hand{fk.frames[4].t, fk.tip.t, m.r_hand};
    double clear = 1e9;
    for (const Capsule* arm_c : {&upper, &fore, &hand}) {
      clear = std::min(clear, capsule_capsule_distance(*arm_c, torso_c));
      clear = std::min(clear, capsule_capsule_distance(*arm_c, head_c));
    }
    if (clear >= -1e-9) return {ArmIkStatus::ok, r.q};
  }
  return {any_converged ? ArmIkStatus::infeasible : ArmIkStatus::unreachable,
          Eigen::VectorXd()};
}

double min_jerk(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

ArmMotion interpolate_arm_motion(const Eigen::VectorXd& start,
                                 const Eigen::VectorXd& target, double duration,
                                 double dt) {
  ArmMotion m;
  int n = static_cast<int>(std::lround(duration / dt)) + 1;
  m.frames.reserve(n);
  for (int i = 0; i < n; ++i) {
    double s = min_jerk((i * dt) / duration);
    m.frames.push_back(start + s * (target - start));
  }
  return m;
}

json ArmMotion::to_json() const {
  json frames_j = json::array();
  for (const auto& f : frames) frames_j.push_back(vec_json(f));
  json obj;
  handover::to_json(obj, final_object_pose);
  return json{{"t0", bucket_time}, {"frames", frames_j}, {"obj", obj}};
}

ArmMotion ArmMotion::from_json(const json& j) {
  ArmMotion m;
  m.bucket_time = j.at("t0").get<double>();
  for (const auto& f : j.at("frames")) m.frames.push_back(json_vec(f));
  handover::from_json(j.at("obj"), m.final_object_pose);
  return m;
}

json PhaseState::to_json() const {
  return json{{"phase", phase_name(phase)},
              {"entry_time", entry_time},
              {"trigger_distance", trigger_distance},
              {"reaction_delay", reaction_delay},
              {"handover_entry", handover_entry},
              {"frozen_entry", frozen_entry}};
}

PhaseState PhaseState::from_json(const json& j) {
  PhaseState p;
  std::string name = j.at("phase").get<std::string>();
  for (Phase ph : {Phase::pre_handover, Phase::reacting, Phase::handover,
                   Phase::frozen}) {
    if (name == phase_name(ph)) p.phase = ph;
  }
  p.entry_time = j.at("entry_time").get<double>();
  p.trigger_distance = j.at("trigger_distance").get<double>();
  p.reaction_delay = j.at("reaction_delay").get<double>();
  p.handover_entry = j.at("handover_entry").get<double>();
  p.frozen_entry = j.at("frozen_entry").get<double>();
  return p;
}

void step_phase_machine(PhaseState& state, const Scene& scene,
                        const Vector2d& robot_xy, const Vector2d& human_xy,
                        double t, bool touched) {
  if (state.phase == Phase::frozen) return;
  if (touched) {
    state.phase = Phase::frozen;
    state.entry_time = t;
    state.frozen_entry = t;
    return;
  }
  switch (state.phase) {
    case Phase::pre_handover:
      if (t >= scene.prehandover_duration) {
        state.phase = Phase::handover;
        state.entry_time = t;
        state.handover_entry = t;
      } else if ((robot_xy - human_xy).norm() < state.trigger_distance) {
        state.phase = Phase::reacting;
        state.entry_time = t;
      }
      break;
    case Phase::reacting:
      if (t >= scene.prehandover_duration ||
          t >= state.entry_time + state.reaction_delay) {
        state.phase = Phase::handover;
        state.entry_time = t;
        state.handover_entry = t;
      }
      break;
    case Phase::handover:
      if (t >= state.entry_time + scene.handover_duration) {
        state.phase = Phase::frozen;
        state.entry_time = t;
        state.frozen_entry = t;
      }
      break;
    case Phase::frozen:
      break;
  }
}

PhaseState Scene::initial_phase() const {
  PhaseState p;
  p.trigger_distance = trigger_distance;
  p.reaction_delay = reaction_delay;
  return p;
}

SceneState scene_state_at(const Scene& scene, const PhaseState& track, double t) {
  double stop = std::numeric_limits<double>::infinity();
  if (track.handover_entry >= 0) stop = track.handover_entry;
  if (track.frozen_entry >= 0) stop = std::min(stop, track.frozen_entry);
  BodyFrame f = scene.body.at(std::min(t, stop));

  if (track.handover_entry >= 0 && t >= track.handover_entry &&
      !scene.arm_cache.empty()) {
    double he = track.handover_entry;
    double tau = t - he;
    if (track.frozen_entry >= 0) tau = std::min(tau, track.frozen_entry - he);
    tau = std::clamp(tau, 0.0, scene.handover_duration);
    double tb = std::min(he, scene.body.duration());
    int bucket = 0;
    for (size_t k = 0; k < scene.arm_cache.size(); ++k) {
      if (scene.arm_cache[k].bucket_time <= tb + 1e-9) bucket = static_cast<int>(k);
    }
    const ArmMotion& am = scene.arm_cache[bucket];
    Eigen::VectorXd q = arm_motion_at(am, tau, scene.dt);
    int a0 = scene.human.right_handed ? bj_r_arm0 : bj_l_arm0;
    // the cached motion starts from the bucket body frame; shift by the actual
    // entry angles and let the offset decay with the same min-jerk profile
    Eigen::VectorXd offset = f.joints.segment(a0, 7) - am.frames.front();
    double s = min_jerk(std::min(tau / scene.handover_duration, 1.0));
    f.joints.segment(a0, 7) = q + (1.0 - s) * offset;
  }

  BodyFrame eff = f;
  eff.root = compose(scene.global_offset, f.root);

  SceneState st;
  st.frame = eff;
  st.skeleton = pose_skeleton(scene.human, eff);
  st.capsules = human_capsules(scene.human, st.skeleton);
  st.hand = scene.human.right_handed ? st.skeleton.r_hand : st.skeleton.l_hand;
  st.object = compose(st.hand, scene.object_in_hand);
  st.phase = phase_of(scene, track, t);
  return st;
}

SceneState scene_predict(const Scene& scene, const PhaseState& track, double tf) {
  PhaseState p = track;
  if (p.phase == Phase::reacting && p.handover_entry < 0) {
    double he = std::min(p.entry_time + p.reaction_delay,
                         scene.prehandover_duration);
    if (tf >= he) {
      p.phase = Phase::handover;
      p.entry_time = he;
      p.handover_entry = he;
    }
  }
  if (p.phase == Phase::pre_handover && tf >= scene.prehandover_duration) {
    p.phase = Phase::handover;
    p.entry_time = scene.prehandover_duration;
    p.handover_entry = scene.prehandover_duration;
  }
  return scene_state_at(scene, p, tf);
}

std::vector<Pose3> gen_grasps(const Shape& shape, int count) {
  std::vector<Pose3> out;
  out.reserve(count);
  auto push = [&out](const Vector3d& t, const Vector3d& x, const Vector3d& z) {
    Pose3 g;
    g.t = t;
    g.q = frame_from_xz(x, z);
    out.push_back(g);
  };
  auto radial = [&push](const std::vector<Vector3d>& dirs) {
    for (const auto& d : dirs) {
      Vector3d x = -d;
      Vector3d hint = std::abs(d.z()) < 0.9 ? Vector3d::UnitZ() : Vector3d::UnitX();
      push(Vector3d::Zero(), x, hint);
    }
  };
  switch (shape.kind) {
    case Shape::Kind::box: {
      const Vector3d axes[6] = {Vector3d::UnitX(),  -Vector3d::UnitX(),
                                Vector3d::UnitY(),  -Vector3d::UnitY(),
                                Vector3d::UnitZ(),  -Vector3d::UnitZ()};
      int face = std::min(count, 12);
      for (int i = 0; i < face; ++i) {
        Vector3d n = axes[i / 2];
        Vector3d u = std::abs(n.z()) < 0.9 ? n.cross(Vector3d::UnitZ()).normalized()
                                           : Vector3d::UnitX();
        Vector3d v = n.cross(u);
        push(Vector3d::Zero(), -n, i % 2 == 0 ? u : v);
      }
      if (count > face) radial(fibonacci_dirs(count - face));
      break;
    }
    case Shape::Kind::cylinder: {
      int side = count / 2;
      for (int i = 0; i < side; ++i) {
        double th = 2 * kPi * (i / 2) / std::max(1, side / 2);
        double z = (i % 2 == 0 ? -0.5 : 0.5) * shape.dims.y();
        push(Vector3d(0, 0, z), Vector3d(-std::cos(th), -std::sin(th), 0),
             Vector3d::UnitZ());
      }
      int caps = count - side;
      for (int i = 0; i < caps; ++i) {
        double th = 2 * kPi * i / caps;
        double sgn = i % 2 == 0 ? 1.0 : -1.0;  // alternate top/bottom approach
        push(Vector3d::Zero(), Vector3d(0, 0, -sgn),
             Vector3d(std::cos(th), std::sin(th), 0));
      }
      break;
    }
    case Shape::Kind::sphere:
      radial(fibonacci_dirs(count));
      break;
  }
  return out;
}

json Scene::to_json() const {
  json cache = json::array();
  for (const auto& am : arm_cache) cache.push_back(am.to_json());
  json grasps_j = json::array();
  for (const auto& g : grasps) {
    json gj;
    handover::to_json(gj, g);
    grasps_j.push_back(gj);
  }
  json frames_j = json::array();
  for (const auto& f : body.frames) frames_j.push_back(frame_json(f));
  json shape_j, in_hand_j, offset_j;
  handover::to_json(shape_j, object);
  handover::to_json(in_hand_j, object_in_hand);
  handover::to_json(offset_j, global_offset);
  return json{{"seed", seed},
              {"profile_tag", profile_tag},
              {"human_model", human.to_json()},
              {"body_motion", json{{"dt", body.dt}, {"frames", frames_j}}},
              {"arm_motion_cache", cache},
              {"object", json{{"shape", shape_j}, {"in_hand", in_hand_j}}},
              {"grasp_set", grasps_j},
              {"global_offset", offset_j},
              {"trigger_distance", trigger_distance},
              {"reaction_delay", reaction_delay},
              {"prehandover_duration", prehandover_duration},
              {"handover_duration", handover_duration},
              {"dt", dt}};
}

Scene Scene::from_json(const json& j) {
  Scene sc;
  sc.seed = j.at("seed").get<uint64_t>();
  sc.profile_tag = j.at("profile_tag").get<std::string>();
  sc.human = HumanModel::from_json(j.at("human_model"));
  sc.body.profile = profile_from_name(sc.profile_tag);
  sc.body.dt = j.at("body_motion").at("dt").get<double>();
  for (const auto& fj : j.at("body_motion").at("frames"))
    sc.body.frames.push_back(frame_from(fj));
  for (const auto& aj : j.at("arm_motion_cache"))
    sc.arm_cache.push_back(ArmMotion::from_json(aj));
  handover::from_json(j.at("object").at("shape"), sc.object);
  handover::from_json(j.at("object").at("in_hand"), sc.object_in_hand);
  for (const auto& gj : j.at("grasp_set")) {
    Pose3 g;
    handover::from_json(gj, g);
    sc.grasps.push_back(g);
  }
  handover::from_json(j.at("global_offset"), sc.global_offset);
  sc.trigger_distance = j.at("trigger_distance").get<double>();
  sc.reaction_delay = j.at("reaction_delay").get<double>();
  sc.prehandover_duration = j.at("prehandover_duration").get<double>();
  sc.handover_duration = j.at("handover_duration").get<double>();
  sc.dt = j.at("dt").get<double>();
  return sc;
}

Scene build_scene(const Config& cfg, Profile profile, uint64_t seed) {
  const HumanCfg& hc = cfg.human;
  for (int attempt = 0; attempt < 64; ++attempt) {
    uint64_t s = derive_seed(derive_seed(seed, stream_scene),
                             static_cast<uint64_t>(profile), attempt);
    Scene sc;
    sc.seed = seed;
    sc.profile_tag = profile_name(profile);
    sc.trigger_distance = hc.trigger_distance;
    sc.prehandover_duration = hc.prehandover_duration;
    sc.handover_duration = hc.handover_duration;
    sc.dt = cfg.sim.dt;

    auto rng_model = make_rng(derive_seed(s, stream_model));
    sc.human = build_human_model(hc, rng_model);
    auto rng_motion = make_rng(derive_seed(s, stream_motion));
    sc.body = gen_prehandover_motion(hc, profile, cfg.sim.dt, rng_motion);

    auto rng_obj = make_rng(derive_seed(s, stream_object));
    sc.object = sample_object(rng_obj);
    sc.object_in_hand.t = Vector3d(0, 0, -0.035);
    sc.object_in_hand.q =
        Eigen::Quaterniond(Eigen::AngleAxisd(uniform(rng_obj, -kPi, kPi),
                                             Vector3d::UnitZ()));
    sc.grasps = gen_grasps(sc.object, hc.grasps_per_object);

    auto rng_target = make_rng(derive_seed(s, stream_target));
    const BodyFrame& f0 = sc.body.frames.front();
    Pose3 target_w = sample_handover_target(hc, sc.human, f0, rng_target);
    Pose3 target_local = compose(inverse(pose_skeleton(sc.human, f0).torso),
                                 target_w);

    int buckets = static_cast<int>(std::floor(hc.prehandover_duration /
                                              hc.arm_cache_interval)) + 1;
    bool ok = true;
    int a0 = sc.human.right_handed ? bj_r_arm0 : bj_l_arm0;
    for (int k = 0; k < buckets && ok; ++k) {
      double tk = k * hc.arm_cache_interval;
      BodyFrame fk = sc.body.at(tk);
      Pose3 torso_k = pose_skeleton(sc.human, fk).torso;
      auto rng_ik = make_rng(derive_seed(s, stream_arm_ik, k));
      bool solved = false;
      for (int jitter = 0; jitter < 5 && !solved; ++jitter) {
        Pose3 tl = target_local;
        if (jitter > 0) {
          tl.t += Vector3d(uniform(rng_ik, -0.02, 0.02),
                           uniform(rng_ik, -0.02, 0.02),
                           uniform(rng_ik, -0.02, 0.02));
          tl.q = (Eigen::Quaterniond(Eigen::AngleAxisd(
                      uniform(rng_ik, -0.17, 0.17), Vector3d::UnitZ())) *
                  tl.q)
                     .normalized();
        }
        Pose3 obj_target = compose(torso_k, tl);
        Pose3 hand_target = compose(obj_target, inverse(sc.object_in_hand));
        ArmIkResult r = solve_arm_ik(hc, sc.human, fk, hand_target, rng_ik);
        if (r.status != ArmIkStatus::ok) continue;
        ArmMotion am = interpolate_arm_motion(fk.joints.segment(a0, 7), r.q,
                                              hc.handover_duration, cfg.sim.dt);
        am.bucket_time = tk;
        KinematicChain chain =
            human_arm_chain(sc.human, torso_k, sc.human.right_handed);
        am.final_object_pose =
            compose(chain_fk(chain, r.q).tip, sc.object_in_hand);
        sc.arm_cache.push_back(am);
        solved = true;
      }
      if (!solved) ok = false;
    }
    if (!ok) continue;

    auto rng_off = make_rng(derive_seed(s, stream_offset));
    BodyFrame fend = sc.body.at(hc.prehandover_duration);
    bool placed = false;
    for (int pt = 0; pt < 20 && !placed; ++pt) {
      double bearing = uniform(rng_off, -kPi, kPi);
      double dist = uniform(rng_off, hc.start_dist_min, hc.start_dist_max);
      double yaw = uniform(rng_off, -kPi, kPi);
      Pose2 desired{dist * std::cos(bearing), dist * std::sin(bearing), yaw};
      Pose2 off = compose(desired, inverse(fend.root));
      Pose2 r0 = compose(off, sc.body.frames.front().root);
      double d0 = std::hypot(r0.x, r0.y);
      if (d0 >= 1.2 && d0 <= 7.5) {
        sc.global_offset = off;
        placed = true;
      }
    }
    if (!placed) continue;

    sc.reaction_delay = sample_reaction_delay(hc, profile, seed, attempt);
    return sc;
  }
  throw std::runtime_error("scene generation stalled");
}

double sample_reaction_delay(const HumanCfg& cfg, Profile profile,
                             uint64_t seed, int attempt) {
  uint64_t s = derive_seed(derive_seed(seed, stream_scene),
                           static_cast<uint64_t>(profile), attempt);
  auto rng = make_rng(derive_seed(s, stream_reaction));
  return uniform(rng, cfg.reaction_delay_min, cfg.reaction_delay_max);
}

Scene build_scene_any_profile(const Config& cfg, uint64_t seed) {
  auto rng = make_rng(derive_seed(seed, 0xBEEF));
  Profile p = static_cast<Profile>(uniform_int(rng, 0, 4));
  return build_scene(cfg, p, seed);
}

}  // namespace handover
