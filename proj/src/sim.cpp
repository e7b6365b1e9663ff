#include "handover/sim.hpp"

#include <chrono>
#include <cmath>

#include "handover/rng.hpp"

namespace handover {

RobotState initial_robot_state(const RobotSpec& spec) {
  RobotState s;
  s.base = {0, 0, 0};
  s.arm = spec.arm.rest;
  return s;
}

PointCloud render_tick_cloud(const Config& cfg, const RobotSpec& spec,
                             const Scene& scene, const SceneState& ss,
                             const RobotState& robot, int tick) {
  return render_cloud(cfg.perception, spec, robot, ss.capsules, scene.object,
                      ss.object, derive_seed(scene.seed, kObsStream, tick));
}

RolloutSession::RolloutSession(const Config& cfg, const RobotSpec& spec,
                               const Scene& scene)
    : cfg_(cfg), spec_(spec), scene_(scene) {}

Outcome RolloutSession::run(const Controller& controller,
                            const Recorder& recorder) {
  const double dt = cfg_.sim.dt;
  const int subs =
      static_cast<int>(std::lround(cfg_.sim.control_period / dt));
  const int max_ticks = static_cast<int>(
      std::lround(cfg_.sim.t_max / cfg_.sim.control_period)) + 2;

  RobotState robot = initial_robot_state(spec_);
  PhaseState track = scene_.initial_phase();
  std::deque<PointCloud> history;
  double inference = 0;

  Outcome out;
  bool done = false;
  for (int tick = 0; tick < max_ticks && !done; ++tick) {
    // all times are integer multiples of dt so phase deadlines land exactly
    const double t = (tick * subs) * dt;
    SceneState ss = scene_state_at(scene_, track, t);

    Observation obs;
    obs.cloud = render_tick_cloud(cfg_, spec_, scene_, ss, robot, tick);
    if (!history.empty()) {
      std::vector<PointCloud> past(history.begin(), history.end());
      obs.flow = compute_flow(cfg_.perception, obs.cloud,
                              robot_ee(spec_, robot), past);
    } else {
      obs.flow.assign(obs.cloud.size(), Vector3d::Zero());
    }

    const auto clock0 = std::chrono::steady_clock::now();
    Action action = controller(robot, obs, ss, t);
    inference += std::chrono::duration<double>(
                     std::chrono::steady_clock::now() - clock0)
                     .count();

    ApplyResult applied = apply_action(spec_, cfg_.robot, robot, action);

    if (recorder) {
      TickRecord rec;
      rec.tick = tick;
      rec.t = t;
      rec.phase = track;
      rec.robot_before = robot;
      rec.action = action;
      rec.robot_after = applied.state;
      rec.ik_failed = applied.ik_failed;
      rec.obs = &obs;
      rec.scene_state = &ss;
      recorder(rec);
    }
    robot = applied.state;

    history.push_back(obs.cloud);
    while (static_cast<int>(history.size()) > cfg_.perception.flow_k)
      history.pop_front();

    for (int s = 1; s <= subs && !done; ++s) {
      const double ts = (tick * subs + s) * dt;
      SceneState pre = scene_state_at(scene_, track, ts);
      track = step_phase_machine(track, scene_, Eigen::Vector2d(robot.base.x,
                                                                robot.base.y),
                                 Eigen::Vector2d(pre.frame.root.x,
                                                 pre.frame.root.y),
                                 ts, touched_);
      SceneState now = scene_state_at(scene_, track, ts);
      JudgeResult jr =
          judge_step(spec_, cfg_.eval, cfg_.sim.t_max, robot, now.capsules,
                     scene_.object, now.object, scene_.grasps, ts);
      if (jr.done) {
        out = jr.outcome;
        done = true;
        if (out.kind == OutcomeKind::success) robot.gripper_closed = true;
      }
    }
  }
  if (!done) {
    // defensive: the judge's timeout should have fired at t_max
    out.kind = OutcomeKind::timeout;
    out.t_end = cfg_.sim.t_max;
    out.execution_time = out.t_end;
  }
  out.inference_time = inference;
  return out;
}

json Demonstration::to_json() const {
  json rows = json::array();
  for (const DemoRecord& r : records) {
    json jr;
    jr["tick"] = r.tick;
    jr["t"] = r.t;
    handover::to_json(jr["phase"], r.phase);
    handover::to_json(jr["robot"], r.robot);
    jr["action"] = r.action.to_json();
    rows.push_back(jr);
  }
  json j;
  j["scene_seed"] = scene_seed;
  j["profile_tag"] = profile_tag;
  j["goal_grasp"] = goal_grasp;
  j["outcome"] = outcome.to_json();
  j["wall_time"] = wall_time;
  j["records"] = rows;
  return j;
}

Demonstration Demonstration::from_json(const json& j) {
  Demonstration d;
  d.scene_seed = j.at("scene_seed").get<uint64_t>();
  d.profile_tag = j.at("profile_tag").get<std::string>();
  d.goal_grasp = j.at("goal_grasp").get<int>();
  d.outcome = Outcome::from_json(j.at("outcome"));
  d.wall_time = j.value("wall_time", 0.0);
  for (const json& jr : j.at("records")) {
    DemoRecord r;
    r.tick = jr.at("tick").get<int>();
    r.t = jr.at("t").get<double>();
    handover::from_json(jr.at("phase"), r.phase);
    handover::from_json(jr.at("robot"), r.robot);
    r.action = Action::from_json(jr.at("action"));
    d.records.push_back(r);
  }
  return d;
}

std::vector<Observation> replay_observations(const Config& cfg,
                                             const RobotSpec& spec,
                                             const Scene& scene,
                                             const Demonstration& demo) {
  std::vector<Observation> out;
  out.reserve(demo.records.size());
  std::deque<PointCloud> history;
  for (const DemoRecord& r : demo.records) {
    SceneState ss = scene_state_at(scene, r.phase, r.t);
    Observation obs;
    obs.cloud = render_tick_cloud(cfg, spec, scene, ss, r.robot, r.tick);
    if (!history.empty()) {
      std::vector<PointCloud> past(history.begin(), history.end());
      obs.flow =
          compute_flow(cfg.perception, obs.cloud, robot_ee(spec, r.robot), past);
    } else {
      obs.flow.assign(obs.cloud.size(), Vector3d::Zero());
    }
    history.push_back(obs.cloud);
    while (static_cast<int>(history.size()) > cfg.perception.flow_k)
      history.pop_front();
    out.push_back(std::move(obs));
  }
  return out;
}

}  // namespace handover
