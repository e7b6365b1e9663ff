#pragma once

// One table for every tunable in the pipeline. Values here are defaults;
// a JSON config file overrides by key (missing keys keep defaults).

#include <json.hpp>

#include <cstdint>
#include <string>

namespace handover {

struct SimCfg {
  double dt = 0.05;              // scene tick
  double control_period = 0.15;  // robot action period (3 ticks)
  double t_max = 15.0;           // episode horizon
};

struct HumanCfg {
  double prehandover_duration = 6.0;
  double handover_duration = 1.05;
  double trigger_distance = 1.0;  // proximity trigger; 0.5 also supported
  double reaction_delay_min = 0.15;
  double reaction_delay_max = 0.25;
  double arm_cache_interval = 0.25;  // bucket spacing over [0, prehandover]
  double max_root_speed = 1.5;

  // capsule radii, one entry per bone class
  double r_torso = 0.14;
  double r_head = 0.10;
  double r_upper_arm = 0.05;
  double r_forearm = 0.045;
  double r_hand = 0.04;
  double r_thigh = 0.07;
  double r_shin = 0.055;

  // handover target region, relative to shoulder / pelvis / torso forward
  double target_dist_min = 0.35;
  double target_dist_max = 0.60;
  double target_height_min = 0.0;
  double target_height_max = 0.45;
  double target_azimuth = 1.0471975511965976;  // 60 deg
  double target_tilt_max = 0.5235987755982988; // 30 deg

  // human arm IK
  double ik_pos_tol = 0.01;
  double ik_rot_tol = 0.05;
  int ik_max_iters = 200;
  double ik_lambda = 0.05;

  int grasps_per_object = 32;
  double start_dist_min = 1.5;  // human root distance from origin at handover time
  double start_dist_max = 3.0;
};

struct RobotCfg {
  std::string spec_path;  // empty = built-in default spec
  double cap_arm_trans = 0.08;
  double cap_arm_rot = 0.2;
  double cap_base_trans = 0.12;
  double cap_base_rot = 0.25;
  double ik_pos_tol = 0.01;
  double ik_rot_tol = 0.05;
  int ik_max_iters = 200;
  double ik_lambda = 0.05;
  double ik_null_gain = 0.05;
};

struct PerceptionCfg {
  int grid_w = 96;
  int grid_h = 72;
  double vfov = 1.0471975511965976;  // 60 deg vertical
  double max_range = 8.0;
  int cloud_cap = 1024;
  int icp_max_iters = 50;
  double icp_tol = 1e-6;
  double nn_cell = 0.05;
  int flow_k = 3;
};

struct PlannerCfg {
  double replan_interval = 1.5;
  double foresee = 1.5;
  double w_smooth = 1.0;
  double w_obs = 20.0;
  double w_final = 5.0;
  double w_neural = 1.0;
  double w_camera = 0.0;
  double epsilon = 0.05;       // obstacle clearance margin
  int opt_steps = 40;
  double step_size = 0.01;
  double standoff = 0.08;      // pre-grasp offset along approach axis
  double standoff_release = 0.15;  // within this EE-grasp distance, target the grasp itself
  int max_base_samples = 32;
  double base_dist_min = 0.5;
  double base_dist_max = 0.8;
  double base_bearing = 0.7853981633974483;  // +-45 deg sector
  double base_heading_jitter = 0.17453292519943295;  // +-10 deg
  double goal_clearance = 0.05;
  double divergence_factor = 10.0;  // loss above factor * initial -> flag
};

struct NetCfg {
  int p_hidden = 64;
  int e_hidden = 64;
  int point_hidden = 32;
  int point_out = 64;
  int branch_out = 128;
  int decoder_hidden = 128;
  int centroids_body = 64;
  int centroids_handobj = 32;
  double radius_body = 0.35;
  double radius_handobj = 0.08;
  int ball_cap = 16;  // max points pooled per centroid
  double lr = 0.003;
  int batch = 512;
  double weight_decay = 1e-5;
  int policy_epochs = 10;
  int pe_epochs = 30;
  uint64_t init_seed = 7;
};

struct EvalCfg {
  double grasp_pos_tol = 0.025;
  double grasp_rot_tol = 0.25;
};

struct Config {
  uint64_t seed = 0;
  int jobs = 0;  // 0 = hardware concurrency
  SimCfg sim;
  HumanCfg human;
  RobotCfg robot;
  PerceptionCfg perception;
  PlannerCfg planner;
  NetCfg net;
  EvalCfg eval;

  nlohmann::json to_json() const;
  static Config from_json(const nlohmann::json& j);
  static Config load(const std::string& path);  // defaults overlaid with file
  std::string digest() const;                   // sha256 of canonical dump
};

}  // namespace handover
