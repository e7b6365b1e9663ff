#include "handover/eval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "handover/io.hpp"

namespace handover {

const char* outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::success: return "success";
    case OutcomeKind::human_contact: return "human-contact";
    case OutcomeKind::object_drop: return "object-drop";
    case OutcomeKind::timeout: return "timeout";
  }
  return "timeout";
}

OutcomeKind outcome_from_name(const std::string& name) {
  if (name == "success") return OutcomeKind::success;
  if (name == "human-contact") return OutcomeKind::human_contact;
  if (name == "object-drop") return OutcomeKind::object_drop;
  if (name == "timeout") return OutcomeKind::timeout;
  throw std::runtime_error("unknown outcome kind: " + name);
}

json Outcome::to_json() const {
  return {{"kind", outcome_name(kind)},
          {"t_end", t_end},
          {"inference_time", inference_time},
          {"execution_time", execution_time}};
}

Outcome Outcome::from_json(const json& j) {
  Outcome o;
  o.kind = outcome_from_name(j.at("kind").get<std::string>());
  o.t_end = j.at("t_end").get<double>();
  o.inference_time = j.value("inference_time", 0.0);
  o.execution_time = j.value("execution_time", 0.0);
  return o;
}

JudgeResult judge_step(const RobotSpec& spec, const EvalCfg& cfg, double t_max,
                       const RobotState& state, const SdfScene& human,
                       const Shape& object, const Pose3& object_pose,
                       const std::vector<Pose3>& grasps, double t) {
  const RobotFk fk = robot_fk(spec, state);

  bool contact = false;
  for (const Capsule& rc : fk.capsules) {
    for (const Capsule& hc : human.capsules) {
      if (capsule_capsule_distance(rc, hc) < 0) {
        contact = true;
        break;
      }
    }
    if (contact) break;
  }

  int grasp_index = -1;
  if (!state.gripper_closed) {
    for (size_t i = 0; i < grasps.size(); ++i) {
      Pose3 target = compose(object_pose, grasps[i]);
      if ((fk.ee.t - target.t).norm() <= cfg.grasp_pos_tol &&
          geodesic_angle(fk.ee.q, target.q) <= cfg.grasp_rot_tol) {
        grasp_index = static_cast<int>(i);
        break;
      }
    }
  }

  bool touches_object = false;
  for (const Capsule& rc : fk.capsules) {
    if (capsule_shape_clearance(rc, object, object_pose) < 0) {
      touches_object = true;
      break;
    }
  }

  JudgeResult r;
  if (contact) {
    r.done = true;
    r.outcome.kind = OutcomeKind::human_contact;
  } else if (touches_object && grasp_index < 0) {
    r.done = true;
    r.outcome.kind = OutcomeKind::object_drop;
  } else if (grasp_index >= 0) {
    r.done = true;
    r.outcome.kind = OutcomeKind::success;
    r.grasp_index = grasp_index;
  } else if (t >= t_max) {
    r.done = true;
    r.outcome.kind = OutcomeKind::timeout;
  }
  if (r.done) {
    r.outcome.t_end = std::min(t, t_max);
    r.outcome.execution_time = r.outcome.t_end;
  }
  return r;
}

double average_success(const std::vector<Outcome>& outcomes, double t_max) {
  if (outcomes.empty()) throw std::runtime_error("no-outcomes");
  double sum = 0;
  for (const Outcome& o : outcomes)
    if (o.kind == OutcomeKind::success) sum += 1.0 - o.t_end / t_max;
  return sum / static_cast<double>(outcomes.size());
}

Report aggregate(const std::vector<Outcome>& outcomes, double t_max,
                 const EvalCfg& cfg, const std::string& config_digest) {
  if (outcomes.empty()) throw std::runtime_error("no-outcomes");
  Report r;
  r.n = static_cast<int>(outcomes.size());
  double time_sum = 0;
  int counts[4] = {0, 0, 0, 0};
  for (const Outcome& o : outcomes) {
    ++counts[static_cast<int>(o.kind)];
    time_sum += o.inference_time + o.execution_time;
  }
  const double n = static_cast<double>(r.n);
  r.success_rate = counts[static_cast<int>(OutcomeKind::success)] / n;
  r.contact = counts[static_cast<int>(OutcomeKind::human_contact)] / n;
  r.drop = counts[static_cast<int>(OutcomeKind::object_drop)] / n;
  r.timeout = counts[static_cast<int>(OutcomeKind::timeout)] / n;
  r.mean_time_s = time_sum / n;
  r.as = average_success(outcomes, t_max);
  r.grasp_pos_tol = cfg.grasp_pos_tol;
  r.grasp_rot_tol = cfg.grasp_rot_tol;
  r.config_digest = config_digest;
  return r;
}

json Report::to_json() const {
  return {{"n", n},
          {"success_rate", success_rate},
          {"mean_time_s", mean_time_s},
          {"as", as},
          {"contact", contact},
          {"drop", drop},
          {"timeout", timeout},
          {"grasp_pos_tol", grasp_pos_tol},
          {"grasp_rot_tol", grasp_rot_tol},
          {"config_digest", config_digest}};
}

Report Report::from_json(const json& j) {
  Report r;
  r.n = j.at("n").get<int>();
  r.success_rate = j.at("success_rate").get<double>();
  r.mean_time_s = j.at("mean_time_s").get<double>();
  r.as = j.at("as").get<double>();
  r.contact = j.at("contact").get<double>();
  r.drop = j.at("drop").get<double>();
  r.timeout = j.at("timeout").get<double>();
  r.grasp_pos_tol = j.value("grasp_pos_tol", 0.0);
  r.grasp_rot_tol = j.value("grasp_rot_tol", 0.0);
  r.config_digest = j.value("config_digest", std::string());
  return r;
}

std::string report_digest(const Report& r, const std::vector<Outcome>& outcomes) {
  json j = r.to_json();
  j.erase("mean_time_s");  // wall-clock dependent
  json rows = json::array();
  for (const Outcome& o : outcomes)
    rows.push_back({{"kind", outcome_name(o.kind)}, {"t_end", o.t_end}});
  j["outcomes"] = rows;
  return json_digest(j);
}

std::string success_curve_csv(const std::vector<Outcome>& outcomes,
                              double t_max) {
  std::ostringstream out;
  out << "t_frac,success_rate\n";
  const double n = static_cast<double>(outcomes.size());
  for (int i = 1; i <= 100; ++i) {
    double t = i / 100.0;
    int count = 0;
    for (const Outcome& o : outcomes)
      if (o.kind == OutcomeKind::success && o.t_end <= t * t_max) ++count;
    char line[64];
    std::snprintf(line, sizeof(line), "%.2f,%.6f\n", t,
                  outcomes.empty() ? 0.0 : count / n);
    out << line;
  }
  return out.str();
}

}  // namespace handover
