#include "handover/chain.hpp"

namespace handover {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd KinematicChain::clamp(const VectorXd& q) const {
  VectorXd out = q;
  for (int i = 0; i < dof(); ++i) {
    out[i] = std::clamp(out[i], joints[i].lo, joints[i].hi);
  }
  return out;
}

ChainFk chain_fk(const KinematicChain& chain, const VectorXd& q) {
  ChainFk fk;
  fk.frames.reserve(chain.joints.size());
  Pose3 t = chain.root;
  for (int i = 0; i < chain.dof(); ++i) {
    const auto& j = chain.joints[i];
    Pose3 step;
    step.t = j.offset;
    step.q = Eigen::Quaterniond(Eigen::AngleAxisd(q[i], j.axis));
    t = compose(t, step);
    fk.frames.push_back(t);
  }
  fk.tip = compose(t, chain.tip);
  return fk;
}

MatrixXd chain_jacobian(const KinematicChain& chain, const ChainFk& fk) {
  const int n = chain.dof();
  MatrixXd jac = MatrixXd::Zero(6, n);
  for (int i = 0; i < n; ++i) {
    const Vector3d axis = fk.frames[i].q * chain.joints[i].axis;
    const Vector3d arm = fk.tip.t - fk.frames[i].t;
    jac.col(i).head<3>() = axis.cross(arm);
    jac.col(i).tail<3>() = axis;
  }
  return jac;
}

MatrixXd chain_point_jacobian(const KinematicChain& chain, const ChainFk& fk,
                              int link, const Vector3d& point) {
  const int n = chain.dof();
  MatrixXd jac = MatrixXd::Zero(3, n);
  for (int i = 0; i <= link && i < n; ++i) {
    const Vector3d axis = fk.frames[i].q * chain.joints[i].axis;
    jac.col(i) = axis.cross(point - fk.frames[i].t);
  }
  return jac;
}

IkResult chain_ik_dls(const KinematicChain& chain, const VectorXd& q0,
                      const Pose3& target, const IkParams& params) {
  const int n = chain.dof();
  IkResult res;
  res.q = chain.clamp(q0);

  const Eigen::Matrix3d rt = target.q.toRotationMatrix();
  for (int it = 0; it <= params.max_iters; ++it) {
    const ChainFk fk = chain_fk(chain, res.q);
    const Vector3d ep = target.t - fk.tip.t;
    const Vector3d er = log_rotation(rt * fk.tip.q.toRotationMatrix().transpose());
    res.pos_err = ep.norm();
    res.rot_err = er.norm();
    res.iters = it;
    if (res.pos_err < params.pos_tol && res.rot_err < params.rot_tol) {
      res.converged = true;
      return res;
    }
    if (it == params.max_iters) break;

    Eigen::Matrix<double, 6, 1> e;
    e << ep, er;
    const MatrixXd jac = chain_jacobian(chain, fk);
    const Eigen::Matrix<double, 6, 6> a =
        jac * jac.transpose() +
        params.lambda * params.lambda * Eigen::Matrix<double, 6, 6>::Identity();
    const Eigen::Matrix<double, 6, 1> y = a.ldlt().solve(e);
    VectorXd dq = jac.transpose() * y;

    if (params.null_gain > 0.0 && chain.rest.size() == n) {
      // Project the rest-posture pull through I - J^+ J.
      const VectorXd bias = params.null_gain * (chain.rest - res.q);
      const VectorXd jb = jac * bias;
      dq += bias - jac.transpose() * a.ldlt().solve(jb);
    }

    const double step = dq.cwiseAbs().maxCoeff();
    if (step > params.max_step) dq *= params.max_step / step;
    res.q = chain.clamp(res.q + dq);
  }
  return res;
}

}  // namespace handover
