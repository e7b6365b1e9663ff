#pragma once

// Serial revolute chain: FK, geometric Jacobians, damped-least-squares IK
// with joint limit clamping and a rest-posture nullspace bias. Shared by the
// robot arm and the simulated human arm.

#include "handover/geom.hpp"

#include <Eigen/Dense>

#include <vector>

namespace handover {

struct ChainJoint {
  Vector3d offset{0, 0, 0};  // translation from the previous joint frame
  Vector3d axis{0, 0, 1};    // unit rotation axis, local frame
  double lo = -3.1415926535897931;
  double hi = 3.1415926535897931;
};

struct KinematicChain {
  Pose3 root;  // reference frame -> first joint parent frame
  std::vector<ChainJoint> joints;
  Pose3 tip;   // last joint frame -> tool frame
  Eigen::VectorXd rest;

  int dof() const { return static_cast<int>(joints.size()); }
  Eigen::VectorXd clamp(const Eigen::VectorXd& q) const;
};

struct ChainFk {
  Pose3 tip;
  std::vector<Pose3> frames;  // frame after each joint's rotation
};

ChainFk chain_fk(const KinematicChain& chain, const Eigen::VectorXd& q);

// 6 x dof tip Jacobian, rows = (linear xyz, angular xyz), reference frame.
Eigen::MatrixXd chain_jacobian(const KinematicChain& chain, const ChainFk& fk);

// d(world point attached to frame `link`)/dq. Columns j > link are zero.
Eigen::MatrixXd chain_point_jacobian(const KinematicChain& chain,
                                     const ChainFk& fk, int link,
                                     const Vector3d& point);

struct IkParams {
  double pos_tol = 0.01;
  double rot_tol = 0.05;
  int max_iters = 200;
  double lambda = 0.05;
  double null_gain = 0.05;
  double max_step = 0.5;  // per-iteration joint delta clamp
};

struct IkResult {
  Eigen::VectorXd q;
  bool converged = false;
  int iters = 0;
  double pos_err = 0;
  double rot_err = 0;
};

IkResult chain_ik_dls(const KinematicChain& chain, const Eigen::VectorXd& q0,
                      const Pose3& target, const IkParams& params);

}  // namespace handover
