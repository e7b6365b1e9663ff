#pragma once

// Outcome judging and metric aggregation. Success is geometric: a kinematic
// grasp-frame alignment check, not force closure.

#include "handover/config.hpp"
#include "handover/geom.hpp"
#include "handover/robot.hpp"

#include <string>
#include <vector>

namespace handover {

enum class OutcomeKind { success, human_contact, object_drop, timeout };

const char* outcome_name(OutcomeKind k);
OutcomeKind outcome_from_name(const std::string& name);

struct Outcome {
  OutcomeKind kind = OutcomeKind::timeout;
  double t_end = 0;
  double inference_time = 0;  // measured wall clock; excluded from digests
  double execution_time = 0;  // simulated time, equals t_end

  json to_json() const;
  static Outcome from_json(const json& j);
};

struct JudgeResult {
  bool done = false;
  Outcome outcome;
  int grasp_index = -1;  // set on success
};

// One tick of outcome judging. Precedence on simultaneous conditions:
// human contact > object drop > success; timeout only fires when nothing
// else did.
JudgeResult judge_step(const RobotSpec& spec, const EvalCfg& cfg, double t_max,
                       const RobotState& state, const SdfScene& human,
                       const Shape& object, const Pose3& object_pose,
                       const std::vector<Pose3>& grasps, double t);

// exact integral of the time-truncated success rate over the normalized
// horizon: sum over successes of (1 - t_end/t_max) / n.
// Throws "no-outcomes" on an empty set.
double average_success(const std::vector<Outcome>& outcomes, double t_max);

struct Report {
  int n = 0;
  double success_rate = 0;
  double mean_time_s = 0;  // inference + execution, wall-clock component
  double as = 0;
  double contact = 0;
  double drop = 0;
  double timeout = 0;
  double grasp_pos_tol = 0;  // judging tolerances, stated up front
  double grasp_rot_tol = 0;
  std::string config_digest;

  json to_json() const;
  static Report from_json(const json& j);
};

Report aggregate(const std::vector<Outcome>& outcomes, double t_max,
                 const EvalCfg& cfg, const std::string& config_digest);

// content hash of everything deterministic in a run: excludes the measured
// wall-clock fields so identical replays digest identically.
std::string report_digest(const Report& r, const std::vector<Outcome>& outcomes);

// plot-ready success-vs-t curve, 100 samples over the normalized horizon
std::string success_curve_csv(const std::vector<Outcome>& outcomes,
                              double t_max);

}  // namespace handover
