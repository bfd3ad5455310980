#include "rbsim/kindyn.hpp"

#include <Eigen/Cholesky>

#include "rbsim/errors.hpp"

namespace rbsim {

RobotState RobotState::Zero(const RobotModel& model) {
  RobotState s;
  s.joint_positions = VecX::Zero(model.joint_count());
  s.joint_velocities = VecX::Zero(model.joint_count());
  return s;
}

VecX RobotState::generalized_velocity(const RobotModel& model) const {
  VecX nu(model.velocity_size());
  if (model.floating) {
    nu.head<6>() = base_twist;
    nu.tail(model.joint_count()) = joint_velocities;
  } else {
    nu = joint_velocities;
  }
  return nu;
}

void RobotState::set_generalized_velocity(const RobotModel& model, const VecX& nu) {
  if (nu.size() != model.velocity_size()) {
    throw DimensionError("generalized velocity has wrong size");
  }
  if (model.floating) {
    base_twist = nu.head<6>();
    joint_velocities = nu.tail(model.joint_count());
  } else {
    base_twist.setZero();
    joint_velocities = nu;
  }
}

void check_state(const RobotModel& model, const RobotState& state) {
  const int n = model.joint_count();
  if (state.joint_positions.size() != n || state.joint_velocities.size() != n) {
    throw DimensionError("state joint vectors do not match the model joint count");
  }
  if (std::abs(state.base_orientation.norm() - 1.0) > 1e-9) {
    throw DimensionError("base orientation quaternion is not unit norm");
  }
}

namespace {

/// Per-link pose and velocity in world coordinates. Linear entries always
/// refer to the link-frame origin as a material point of the link.
struct LinkKin {
  Transform X;                  // world <- link
  Vec3 axis_w = Vec3::Zero();   // parent joint axis in world (undefined for the base)
  Vec3 omega = Vec3::Zero();    // angular velocity
  Vec3 v = Vec3::Zero();        // origin linear velocity
};

std::vector<LinkKin> link_kinematics(const RobotModel& model, const RobotState& state) {
  check_state(model, state);
  std::vector<LinkKin> kin(model.link_count());
  kin[0].X = {state.base_orientation.toRotationMatrix(), state.base_position};
  if (model.floating) {
    kin[0].v = state.base_twist.head<3>();
    kin[0].omega = state.base_twist.tail<3>();
  }
  for (int j = 0; j < model.joint_count(); ++j) {
    const Joint& joint = model.joints[j];
    const LinkKin& parent = kin[joint.parent_link];
    LinkKin& child = kin[joint.child_link];
    const Transform Xj = parent.X * joint.origin;  // joint frame at q = 0
    const double q = state.joint_positions[j];
    const double qd = state.joint_velocities[j];
    if (joint.kind == JointKind::Revolute) {
      child.X = Xj * Transform{axis_angle(joint.axis, q), Vec3::Zero()};
      child.axis_w = Xj.R * joint.axis;
      child.omega = parent.omega + child.axis_w * qd;
      child.v = parent.v + parent.omega.cross(child.X.p - parent.X.p);
    } else {
      child.X = {Xj.R, Xj.p + Xj.R * (joint.axis * q)};
      child.axis_w = Xj.R * joint.axis;
      child.omega = parent.omega;
      child.v = parent.v + parent.omega.cross(child.X.p - parent.X.p) + child.axis_w * qd;
    }
  }
  return kin;
}

struct LinkAcc {
  Vec3 alpha = Vec3::Zero();  // angular acceleration
  Vec3 a = Vec3::Zero();      // origin linear acceleration (material point)
};

/// Outward acceleration propagation. `base_lin` / `base_ang` are the base
/// origin accelerations; callers implement gravity by offsetting base_lin
/// with -g (the standard accelerating-frame trick).
std::vector<LinkAcc> link_accelerations(const RobotModel& model, const RobotState& state,
                                        const std::vector<LinkKin>& kin, const Vec3& base_lin,
                                        const Vec3& base_ang, const VecX& qdd) {
  std::vector<LinkAcc> acc(model.link_count());
  acc[0].a = base_lin;
  acc[0].alpha = base_ang;
  for (int j = 0; j < model.joint_count(); ++j) {
    const Joint& joint = model.joints[j];
    const LinkKin& pk = kin[joint.parent_link];
    const LinkKin& ck = kin[joint.child_link];
    const LinkAcc& pa = acc[joint.parent_link];
    LinkAcc& ca = acc[joint.child_link];
    const Vec3 r = ck.X.p - pk.X.p;
    const Vec3 transported = pa.a + pa.alpha.cross(r) + pk.omega.cross(pk.omega.cross(r));
    const double qd = state.joint_velocities[j];
    const double qddj = qdd.size() ? qdd[j] : 0.0;
    if (joint.kind == JointKind::Revolute) {
      ca.alpha = pa.alpha + ck.axis_w * qddj + pk.omega.cross(ck.axis_w * qd);
      ca.a = transported;
    } else {
      ca.alpha = pa.alpha;
      ca.a = transported + 2.0 * pk.omega.cross(ck.axis_w * qd) + ck.axis_w * qddj;
    }
  }
  return acc;
}

/// Inward Newton-Euler force pass. `ext_force` / `ext_torque` hold the
/// resultant external wrench on each link, reduced to the link origin.
/// Returns the generalized force vector in mixed coordinates.
VecX rnea_backward(const RobotModel& model, const std::vector<LinkKin>& kin,
                   const std::vector<LinkAcc>& acc, const std::vector<Vec3>& ext_force,
                   const std::vector<Vec3>& ext_torque) {
  const int nl = model.link_count();
  std::vector<Vec3> f(nl), n(nl);
  for (int i = 0; i < nl; ++i) {
    const Link& link = model.links[i];
    const Vec3 rc = kin[i].X.R * link.com;  // origin -> CoM, world
    const Vec3 a_com =
        acc[i].a + acc[i].alpha.cross(rc) + kin[i].omega.cross(kin[i].omega.cross(rc));
    const Mat3 I_w = kin[i].X.R * link.inertia * kin[i].X.R.transpose();
    const Vec3 F = link.mass * a_com;
    const Vec3 N = I_w * acc[i].alpha + kin[i].omega.cross(I_w * kin[i].omega);
    f[i] = F - ext_force[i];
    n[i] = N + rc.cross(F) - ext_torque[i];
  }
  VecX tau = VecX::Zero(model.velocity_size());
  const int b = model.base_dofs();
  for (int i = nl - 1; i >= 1; --i) {
    const Joint& joint = model.joints[i - 1];
    if (joint.kind == JointKind::Revolute) {
      tau[b + i - 1] = kin[i].axis_w.dot(n[i]);
    } else {
      tau[b + i - 1] = kin[i].axis_w.dot(f[i]);
    }
    const int p = joint.parent_link;
    f[p] += f[i];
    n[p] += n[i] + (kin[i].X.p - kin[p].X.p).cross(f[i]);
  }
  if (model.floating) {
    tau.head<3>() = f[0];
    tau.segment<3>(3) = n[0];
  }
  return tau;
}

/// 6x6 spatial inertia of a link in absolute (world-origin) coordinates,
/// ordered (linear; angular) to match the mixed convention.
Mat6 spatial_inertia_at_origin(const Link& link, const LinkKin& kin) {
  const Vec3 c = kin.X * link.com;  // CoM in world
  const Mat3 I_w = kin.X.R * link.inertia * kin.X.R.transpose();
  const Mat3 cx = skew(c);
  Mat6 I;
  I.topLeftCorner<3, 3>() = link.mass * Mat3::Identity();
  I.topRightCorner<3, 3>() = -link.mass * cx;
  I.bottomLeftCorner<3, 3>() = link.mass * cx;
  I.bottomRightCorner<3, 3>() = I_w - link.mass * cx * cx;
  return I;
}

/// Motion subspace of joint j as a twist at the world origin.
Vec6 joint_motion_subspace(const Joint& joint, const LinkKin& child_kin) {
  Vec6 phi;
  if (joint.kind == JointKind::Revolute) {
    phi.head<3>() = child_kin.X.p.cross(child_kin.axis_w);
    phi.tail<3>() = child_kin.axis_w;
  } else {
    phi.head<3>() = child_kin.axis_w;
    phi.tail<3>().setZero();
  }
  return phi;
}

/// Maps the mixed base velocity to a twist at the world origin.
Mat6 base_motion_matrix(const Vec3& base_position) {
  Mat6 phi = Mat6::Identity();
  phi.topRightCorner<3, 3>() = skew(base_position);
  return phi;
}

MatX crba(const RobotModel& model, const std::vector<LinkKin>& kin) {
  const int nv = model.velocity_size();
  const int b = model.base_dofs();
  MatX M = MatX::Zero(nv, nv);
  std::vector<Mat6> composite(model.link_count());
  for (int i = 0; i < model.link_count(); ++i) {
    composite[i] = spatial_inertia_at_origin(model.links[i], kin[i]);
  }
  // Links are stored parent-before-child, so one reverse sweep accumulates
  // full subtree inertias.
  for (int i = model.link_count() - 1; i >= 1; --i) {
    composite[model.joints[i - 1].parent_link] += composite[i];
  }
  const Mat6 phi_base = base_motion_matrix(kin[0].X.p);
  for (int j = model.joint_count() - 1; j >= 0; --j) {
    const int child = j + 1;
    const Vec6 phi_j = joint_motion_subspace(model.joints[j], kin[child]);
    const Vec6 F = composite[child] * phi_j;
    M(b + j, b + j) = phi_j.dot(F);
    int l = model.joints[j].parent_link;
    while (l > 0) {
      const int k = l - 1;
      const Vec6 phi_k = joint_motion_subspace(model.joints[k], kin[l]);
      M(b + k, b + j) = M(b + j, b + k) = phi_k.dot(F);
      l = model.joints[k].parent_link;
    }
    if (model.floating) {
      M.block<6, 1>(0, b + j) = phi_base.transpose() * F;
      M.block<1, 6>(b + j, 0) = M.block<6, 1>(0, b + j).transpose();
    }
  }
  if (model.floating) {
    M.topLeftCorner<6, 6>() = phi_base.transpose() * composite[0] * phi_base;
  }
  return M;
}

AttachedFrame resolve_frame(const RobotModel& model, const std::string& frame) {
  auto resolved = model.find_frame(frame);
  if (!resolved) throw UnknownFrameError("no frame named '" + frame + "'");
  return *resolved;
}

MatX frame_jacobian_impl(const RobotModel& model, const std::vector<LinkKin>& kin,
                         const AttachedFrame& frame) {
  const int nv = model.velocity_size();
  const int b = model.base_dofs();
  const Vec3 p_f = (kin[frame.link].X * frame.local).p;
  MatX J = MatX::Zero(6, nv);
  if (model.floating) {
    J.topLeftCorner<3, 3>().setIdentity();
    J.block<3, 3>(0, 3) = -skew(p_f - kin[0].X.p);
    J.block<3, 3>(3, 3).setIdentity();
  }
  for (int i = frame.link; i > 0; i = model.joints[i - 1].parent_link) {
    const Joint& joint = model.joints[i - 1];
    const int col = b + i - 1;
    if (joint.kind == JointKind::Revolute) {
      J.block<3, 1>(0, col) = kin[i].axis_w.cross(p_f - kin[i].X.p);
      J.block<3, 1>(3, col) = kin[i].axis_w;
    } else {
      J.block<3, 1>(0, col) = kin[i].axis_w;
    }
  }
  return J;
}

Vec6 frame_bias_impl(const RobotModel& model, const RobotState& state,
                     const std::vector<LinkKin>& kin, const AttachedFrame& frame) {
  const auto acc = link_accelerations(model, state, kin, Vec3::Zero(), Vec3::Zero(),
                                      VecX::Zero(model.joint_count()));
  const LinkKin& lk = kin[frame.link];
  const LinkAcc& la = acc[frame.link];
  const Vec3 r = lk.X.R * frame.local.p;
  Vec6 bias;
  bias.head<3>() = la.a + la.alpha.cross(r) + lk.omega.cross(lk.omega.cross(r));
  bias.tail<3>() = la.alpha;
  return bias;
}

/// Reduces frame-keyed external wrenches to per-link (force, torque about
/// the link origin), world coordinates.
void reduce_external_wrenches(const RobotModel& model, const std::vector<LinkKin>& kin,
                              const ExternalWrenches& external, std::vector<Vec3>& force,
                              std::vector<Vec3>& torque) {
  force.assign(model.link_count(), Vec3::Zero());
  torque.assign(model.link_count(), Vec3::Zero());
  for (const auto& [name, wrench] : external) {
    const AttachedFrame frame = resolve_frame(model, name);
    const Vec3 p_f = (kin[frame.link].X * frame.local).p;
    const Vec3 f = wrench.head<3>();
    force[frame.link] += f;
    torque[frame.link] += wrench.tail<3>() + (p_f - kin[frame.link].X.p).cross(f);
  }
}

VecX rnea(const RobotModel& model, const RobotState& state, const std::vector<LinkKin>& kin,
          const VecX& accel, const Vec3& gravity, const ExternalWrenches& external) {
  Vec3 base_lin = -gravity;
  Vec3 base_ang = Vec3::Zero();
  if (model.floating) {
    base_lin += accel.head<3>();
    base_ang = accel.segment<3>(3);
  }
  const auto acc =
      link_accelerations(model, state, kin, base_lin, base_ang, accel.tail(model.joint_count()));
  std::vector<Vec3> ext_f, ext_n;
  reduce_external_wrenches(model, kin, external, ext_f, ext_n);
  return rnea_backward(model, kin, acc, ext_f, ext_n);
}

}  // namespace

std::map<std::string, Transform> forward_kinematics(const RobotModel& model,
                                                    const RobotState& state) {
  const auto kin = link_kinematics(model, state);
  std::map<std::string, Transform> out;
  for (int i = 0; i < model.link_count(); ++i) {
    out[model.links[i].name] = kin[i].X;
  }
  for (const auto& f : model.frames) {
    out[f.name] = kin[f.link].X * f.local;
  }
  return out;
}

Transform frame_transform(const RobotModel& model, const RobotState& state,
                          const std::string& frame) {
  const AttachedFrame f = resolve_frame(model, frame);
  const auto kin = link_kinematics(model, state);
  return kin[f.link].X * f.local;
}

MatX mass_matrix(const RobotModel& model, const RobotState& state) {
  return crba(model, link_kinematics(model, state));
}

VecX bias_forces(const RobotModel& model, const RobotState& state, const Vec3& gravity) {
  const auto kin = link_kinematics(model, state);
  return rnea(model, state, kin, VecX::Zero(model.velocity_size()), gravity, {});
}

MatX frame_jacobian(const RobotModel& model, const RobotState& state,
                    const std::string& frame) {
  const AttachedFrame f = resolve_frame(model, frame);
  return frame_jacobian_impl(model, link_kinematics(model, state), f);
}

Vec6 frame_bias_acceleration(const RobotModel& model, const RobotState& state,
                             const std::string& frame) {
  const AttachedFrame f = resolve_frame(model, frame);
  const auto kin = link_kinematics(model, state);
  return frame_bias_impl(model, state, kin, f);
}

VecX inverse_dynamics(const RobotModel& model, const RobotState& state, const VecX& accel,
                      const Vec3& gravity, const ExternalWrenches& external) {
  if (accel.size() != model.velocity_size()) {
    throw DimensionError("acceleration vector does not match velocity_size()");
  }
  const auto kin = link_kinematics(model, state);
  return rnea(model, state, kin, accel, gravity, external);
}

VecX forward_dynamics(const RobotModel& model, const RobotState& state,
                      const VecX& joint_torques, const Vec3& gravity,
                      const ExternalWrenches& external) {
  const int n = model.joint_count();
  if (joint_torques.size() != n) {
    throw DimensionError("joint torque vector does not match joint count");
  }
  const auto kin = link_kinematics(model, state);
  const MatX M = crba(model, kin);
  const VecX h = rnea(model, state, kin, VecX::Zero(model.velocity_size()), gravity, {});
  VecX rhs = -h;
  rhs.tail(n) += joint_torques;
  std::vector<Vec3> ext_f, ext_n;
  reduce_external_wrenches(model, kin, external, ext_f, ext_n);
  for (const auto& [name, wrench] : external) {
    const AttachedFrame frame = resolve_frame(model, name);
    rhs += frame_jacobian_impl(model, kin, frame).transpose() * wrench;
  }
  Eigen::LLT<MatX> llt(M);
  if (llt.info() != Eigen::Success) {
    throw SingularMassMatrix("mass matrix Cholesky failed");
  }
  return llt.solve(rhs);
}

KinDynQuantities compute_kindyn(const RobotModel& model, const RobotState& state,
                                const Vec3& gravity) {
  const auto kin = link_kinematics(model, state);
  KinDynQuantities out;
  out.gravity = gravity;
  out.M = crba(model, kin);
  out.h = rnea(model, state, kin, VecX::Zero(model.velocity_size()), gravity, {});
  for (int i = 0; i < model.link_count(); ++i) {
    out.world_transforms[model.links[i].name] = kin[i].X;
  }
  for (const auto& f : model.frames) {
    out.world_transforms[f.name] = kin[f.link].X * f.local;
  }
  for (const Foot& foot : model.feet) {
    const AttachedFrame frame = resolve_frame(model, foot.frame);
    out.foot_jacobians[foot.frame] = frame_jacobian_impl(model, kin, frame);
    out.foot_bias_accelerations[foot.frame] = frame_bias_impl(model, state, kin, frame);
  }
  return out;
}

}  // namespace rbsim
