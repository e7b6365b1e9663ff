#include "handover/config.hpp"

#include "handover/io.hpp"

namespace handover {

using nlohmann::json;

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

json Config::to_json() const {
  json j;
  j["seed"] = seed;
  j["jobs"] = jobs;
  j["sim"] = {{"dt", sim.dt},
              {"control_period", sim.control_period},
              {"t_max", sim.t_max}};
  j["human"] = {{"prehandover_duration", human.prehandover_duration},
                {"handover_duration", human.handover_duration},
                {"trigger_distance", human.trigger_distance},
                {"reaction_delay_min", human.reaction_delay_min},
                {"reaction_delay_max", human.reaction_delay_max},
                {"arm_cache_interval", human.arm_cache_interval},
                {"max_root_speed", human.max_root_speed},
                {"r_torso", human.r_torso},
                {"r_head", human.r_head},
                {"r_upper_arm", human.r_upper_arm},
                {"r_forearm", human.r_forearm},
                {"r_hand", human.r_hand},
                {"r_thigh", human.r_thigh},
                {"r_shin", human.r_shin},
                {"target_dist_min", human.target_dist_min},
                {"target_dist_max", human.target_dist_max},
                {"target_height_min", human.target_height_min},
                {"target_height_max", human.target_height_max},
                {"target_azimuth", human.target_azimuth},
                {"target_tilt_max", human.target_tilt_max},
                {"ik_pos_tol", human.ik_pos_tol},
                {"ik_rot_tol", human.ik_rot_tol},
                {"ik_max_iters", human.ik_max_iters},
                {"ik_lambda", human.ik_lambda},
                {"grasps_per_object", human.grasps_per_object},
                {"start_dist_min", human.start_dist_min},
                {"start_dist_max", human.start_dist_max}};
  j["robot"] = {{"spec_path", robot.spec_path},
                {"cap_arm_trans", robot.cap_arm_trans},
                {"cap_arm_rot", robot.cap_arm_rot},
                {"cap_base_trans", robot.cap_base_trans},
                {"cap_base_rot", robot.cap_base_rot},
                {"ik_pos_tol", robot.ik_pos_tol},
                {"ik_rot_tol", robot.ik_rot_tol},
                {"ik_max_iters", robot.ik_max_iters},
                {"ik_lambda", robot.ik_lambda},
                {"ik_null_gain", robot.ik_null_gain}};
  j["perception"] = {{"grid_w", perception.grid_w},
                     {"grid_h", perception.grid_h},
                     {"vfov", perception.vfov},
                     {"max_range", perception.max_range},
                     {"cloud_cap", perception.cloud_cap},
                     {"icp_max_iters", perception.icp_max_iters},
                     {"icp_tol", perception.icp_tol},
                     {"nn_cell", perception.nn_cell},
                     {"flow_k", perception.flow_k}};
  j["planner"] = {{"replan_interval", planner.replan_interval},
                  {"foresee", planner.foresee},
                  {"w_smooth", planner.w_smooth},
                  {"w_obs", planner.w_obs},
                  {"w_final", planner.w_final},
                  {"w_neural", planner.w_neural},
                  {"w_camera", planner.w_camera},
                  {"epsilon", planner.epsilon},
                  {"opt_steps", planner.opt_steps},
                  {"step_size", planner.step_size},
                  {"standoff", planner.standoff},
                  {"standoff_release", planner.standoff_release},
                  {"max_base_samples", planner.max_base_samples},
                  {"base_dist_min", planner.base_dist_min},
                  {"base_dist_max", planner.base_dist_max},
                  {"base_bearing", planner.base_bearing},
                  {"base_heading_jitter", planner.base_heading_jitter},
                  {"goal_clearance", planner.goal_clearance},
                  {"divergence_factor", planner.divergence_factor}};
  j["net"] = {{"p_hidden", net.p_hidden},
              {"e_hidden", net.e_hidden},
              {"point_hidden", net.point_hidden},
              {"point_out", net.point_out},
              {"branch_out", net.branch_out},
              {"decoder_hidden", net.decoder_hidden},
              {"centroids_body", net.centroids_body},
              {"centroids_handobj", net.centroids_handobj},
              {"radius_body", net.radius_body},
              {"radius_handobj", net.radius_handobj},
              {"ball_cap", net.ball_cap},
              {"lr", net.lr},
              {"batch", net.batch},
              {"weight_decay", net.weight_decay},
              {"policy_epochs", net.policy_epochs},
              {"pe_epochs", net.pe_epochs},
              {"init_seed", net.init_seed}};
  j["eval"] = {{"grasp_pos_tol", eval.grasp_pos_tol},
               {"grasp_rot_tol", eval.grasp_rot_tol}};
  return j;
}

Config Config::from_json(const json& j) {
  Config c;
  get_if(j, "seed", c.seed);
  get_if(j, "jobs", c.jobs);
  if (j.contains("sim")) {
    const auto& s = j["sim"];
    get_if(s, "dt", c.sim.dt);
    get_if(s, "control_period", c.sim.control_period);
    get_if(s, "t_max", c.sim.t_max);
  }
  if (j.contains("human")) {
    const auto& h = j["human"];
    get_if(h, "prehandover_duration", c.human.prehandover_duration);
    get_if(h, "handover_duration", c.human.handover_duration);
    get_if(h, "trigger_distance", c.human.trigger_distance);
    get_if(h, "reaction_delay_min", c.human.reaction_delay_min);
    get_if(h, "reaction_delay_max", c.human.reaction_delay_max);
    get_if(h, "arm_cache_interval", c.human.arm_cache_interval);
    get_if(h, "max_root_speed", c.human.max_root_speed);
    get_if(h, "r_torso", c.human.r_torso);
    get_if(h, "r_head", c.human.r_head);
    get_if(h, "r_upper_arm", c.human.r_upper_arm);
    get_if(h, "r_forearm", c.human.r_forearm);
    get_if(h, "r_hand", c.human.r_hand);
    get_if(h, "r_thigh", c.human.r_thigh);
    get_if(h, "r_shin", c.human.r_shin);
    get_if(h, "target_dist_min", c.human.target_dist_min);
    get_if(h, "target_dist_max", c.human.target_dist_max);
    get_if(h, "target_height_min", c.human.target_height_min);
    get_if(h, "target_height_max", c.human.target_height_max);
    get_if(h, "target_azimuth", c.human.target_azimuth);
    get_if(h, "target_tilt_max", c.human.target_tilt_max);
    get_if(h, "ik_pos_tol", c.human.ik_pos_tol);
    get_if(h, "ik_rot_tol", c.human.ik_rot_tol);
    get_if(h, "ik_max_iters", c.human.ik_max_iters);
    get_if(h, "ik_lambda", c.human.ik_lambda);
    get_if(h, "grasps_per_object", c.human.grasps_per_object);
    get_if(h, "start_dist_min", c.human.start_dist_min);
    get_if(h, "start_dist_max", c.human.start_dist_max);
  }
  if (j.contains("robot")) {
    const auto& r = j["robot"];
    get_if(r, "spec_path", c.robot.spec_path);
    get_if(r, "cap_arm_trans", c.robot.cap_arm_trans);
    get_if(r, "cap_arm_rot", c.robot.cap_arm_rot);
    get_if(r, "cap_base_trans", c.robot.cap_base_trans);
    get_if(r, "cap_base_rot", c.robot.cap_base_rot);
    get_if(r, "ik_pos_tol", c.robot.ik_pos_tol);
    get_if(r, "ik_rot_tol", c.robot.ik_rot_tol);
    get_if(r, "ik_max_iters", c.robot.ik_max_iters);
    get_if(r, "ik_lambda", c.robot.ik_lambda);
    get_if(r, "ik_null_gain", c.robot.ik_null_gain);
  }
  if (j.contains("perception")) {
    const auto& p = j["perception"];
    get_if(p, "grid_w", c.perception.grid_w);
    get_if(p, "grid_h", c.perception.grid_h);
    get_if(p, "vfov", c.perception.vfov);
    get_if(p, "max_range", c.perception.max_range);
    get_if(p, "cloud_cap", c.perception.cloud_cap);
    get_if(p, "icp_max_iters", c.perception.icp_max_iters);
    get_if(p, "icp_tol", c.perception.icp_tol);
    get_if(p, "nn_cell", c.perception.nn_cell);
    get_if(p, "flow_k", c.perception.flow_k);
  }
  if (j.contains("planner")) {
    const auto& p = j["planner"];
    get_if(p, "replan_interval", c.planner.replan_interval);
    get_if(p, "foresee", c.planner.foresee);
    get_if(p, "w_smooth", c.planner.w_smooth);
    get_if(p, "w_obs", c.planner.w_obs);
    get_if(p, "w_final", c.planner.w_final);
    get_if(p, "w_neural", c.planner.w_neural);
    get_if(p, "w_camera", c.planner.w_camera);
    get_if(p, "epsilon", c.planner.epsilon);
    get_if(p, "opt_steps", c.planner.opt_steps);
    get_if(p, "step_size", c.planner.step_size);
    get_if(p, "standoff", c.planner.standoff);
    get_if(p, "standoff_release", c.planner.standoff_release);
    get_if(p, "max_base_samples", c.planner.max_base_samples);
    get_if(p, "base_dist_min", c.planner.base_dist_min);
    get_if(p, "base_dist_max", c.planner.base_dist_max);
    get_if(p, "base_bearing", c.planner.base_bearing);
    get_if(p, "base_heading_jitter", c.planner.base_heading_jitter);
    get_if(p, "goal_clearance", c.planner.goal_clearance);
    get_if(p, "divergence_factor", c.planner.divergence_factor);
  }
  if (j.contains("net")) {
    const auto& n = j["net"];
    get_if(n, "p_hidden", c.net.p_hidden);
    get_if(n, "e_hidden", c.net.e_hidden);
    get_if(n, "point_hidden", c.net.point_hidden);
    get_if(n, "point_out", c.net.point_out);
    get_if(n, "branch_out", c.net.branch_out);
    get_if(n, "decoder_hidden", c.net.decoder_hidden);
    get_if(n, "centroids_body", c.net.centroids_body);
    get_if(n, "centroids_handobj", c.net.centroids_handobj);
    get_if(n, "radius_body", c.net.radius_body);
    get_if(n, "radius_handobj", c.net.radius_handobj);
    get_if(n, "ball_cap", c.net.ball_cap);
    get_if(n, "lr", c.net.lr);
    get_if(n, "batch", c.net.batch);
    get_if(n, "weight_decay", c.net.weight_decay);
    get_if(n, "policy_epochs", c.net.policy_epochs);
    get_if(n, "pe_epochs", c.net.pe_epochs);
    get_if(n, "init_seed", c.net.init_seed);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    get_if(e, "grasp_pos_tol", c.eval.grasp_pos_tol);
    get_if(e, "grasp_rot_tol", c.eval.grasp_rot_tol);
  }
  return c;
}

Config Config::load(const std::string& path) {
  return from_json(json::parse(read_text(path)));
}

std::string Config::digest() const { return json_digest(to_json()); }

}  // namespace handover
