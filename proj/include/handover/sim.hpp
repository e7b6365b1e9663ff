#pragma once

// Closed-loop rollout harness: plays a scene's oracle forward at the sim
// rate, lets an injected controller act at the control rate, renders the
// tick-seeded observations, and judges outcomes. Demonstrations store only
// states and actions; observations are regenerated bit-exactly on load.

#include "handover/config.hpp"
#include "handover/eval.hpp"
#include "handover/human.hpp"
#include "handover/perception.hpp"
#include "handover/robot.hpp"

#include <deque>
#include <functional>
#include <vector>

namespace handover {

// stream tag for per-tick observation seeds
constexpr uint64_t kObsStream = 0xB0B;

struct Observation {
  PointCloud cloud;              // world frame
  std::vector<Vector3d> flow;    // EE frame, parallel to cloud
};

RobotState initial_robot_state(const RobotSpec& spec);

// the observation the robot sees at one control tick, deterministic in
// (scene seed, tick)
PointCloud render_tick_cloud(const Config& cfg, const RobotSpec& spec,
                             const Scene& scene, const SceneState& ss,
                             const RobotState& robot, int tick);

struct TickRecord {
  int tick = 0;
  double t = 0;
  PhaseState phase;          // track at observation time
  RobotState robot_before;
  Action action;
  RobotState robot_after;
  bool ik_failed = false;
  const Observation* obs = nullptr;      // valid during the callback only
  const SceneState* scene_state = nullptr;
};

class RolloutSession {
 public:
  using Controller = std::function<Action(
      const RobotState&, const Observation&, const SceneState&, double t)>;
  using Recorder = std::function<void(const TickRecord&)>;

  RolloutSession(const Config& cfg, const RobotSpec& spec, const Scene& scene);

  Outcome run(const Controller& controller, const Recorder& recorder = {});

  // test hook: the human freezes at the next phase step
  void force_freeze() { touched_ = true; }

 private:
  const Config& cfg_;
  const RobotSpec& spec_;
  const Scene& scene_;
  bool touched_ = false;
};

// --- demonstration storage (observations replayed, not stored) ---

struct DemoRecord {
  int tick = 0;
  double t = 0;
  PhaseState phase;
  RobotState robot;  // state the observation was rendered from
  Action action;
};

struct Demonstration {
  uint64_t scene_seed = 0;
  std::string profile_tag;
  int goal_grasp = -1;  // grasp index the expert committed to (-1: none)
  Outcome outcome;
  double wall_time = 0;
  std::vector<DemoRecord> records;

  json to_json() const;
  static Demonstration from_json(const json& j);
};

// regenerates every recorded tick's observation, in order, bit-identical to
// what the rollout saw
std::vector<Observation> replay_observations(const Config& cfg,
                                             const RobotSpec& spec,
                                             const Scene& scene,
                                             const Demonstration& demo);

}  // namespace handover
