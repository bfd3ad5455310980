#include "rbsim/contact.hpp"

#include <Eigen/Cholesky>

#include <algorithm>

#include "rbsim/errors.hpp"

namespace rbsim {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Vertex coordinates in the foot frame, fixed for rectangular feet.
std::vector<Vec3> rectangular_corners(const FootGeometry& g) {
  const double hx = 0.5 * g.length;
  const double hy = 0.5 * g.width;
  return {{hx, hy, g.sole_height},
          {hx, -hy, g.sole_height},
          {-hx, hy, g.sole_height},
          {-hx, -hy, g.sole_height}};
}

}  // namespace

std::vector<ContactVertex> contact_vertices(const RobotModel& model, const RobotState& state,
                                            const KinDynQuantities& kindyn) {
  const VecX nu = state.generalized_velocity(model);
  std::vector<const Foot*> feet;
  feet.reserve(model.feet.size());
  for (const Foot& f : model.feet) feet.push_back(&f);
  std::sort(feet.begin(), feet.end(),
            [](const Foot* a, const Foot* b) { return a->frame < b->frame; });

  std::vector<ContactVertex> out;
  for (const Foot* foot : feet) {
    const auto transform_it = kindyn.world_transforms.find(foot->frame);
    const auto jacobian_it = kindyn.foot_jacobians.find(foot->frame);
    if (transform_it == kindyn.world_transforms.end() ||
        jacobian_it == kindyn.foot_jacobians.end()) {
      throw UnknownFrameError("kindyn cache is missing foot frame '" + foot->frame + "'");
    }
    const Transform& X = transform_it->second;
    const MatX& J = jacobian_it->second;

    std::vector<Vec3> positions;
    if (foot->geometry.shape == FootGeometry::Shape::Rectangular) {
      for (const Vec3& corner : rectangular_corners(foot->geometry)) {
        positions.push_back(X * corner);
      }
    } else {
      // Lowest point of the sphere in a world with vertical z.
      const Vec3 center = X * foot->geometry.center_offset;
      positions.push_back(center - Vec3(0.0, 0.0, foot->geometry.radius));
    }

    for (int i = 0; i < static_cast<int>(positions.size()); ++i) {
      ContactVertex v;
      v.foot = foot->frame;
      v.index = i;
      v.position_world = positions[i];
      const Vec3 r = v.position_world - X.p;
      v.jacobian = J.topRows<3>() - skew(r) * J.bottomRows<3>();
      v.velocity_world = v.jacobian * nu;
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::vector<int> detect_active_set(const std::vector<ContactVertex>& vertices,
                                   double ground_height, double activation_tol) {
  std::vector<int> active;
  for (int i = 0; i < static_cast<int>(vertices.size()); ++i) {
    if (vertices[i].position_world.z() - ground_height <= activation_tol) {
      active.push_back(i);
    }
  }
  return active;
}

ClosureConstraints loop_closure_constraints(const RobotModel& model, const RobotState& state,
                                            const KinDynQuantities& kindyn) {
  const int nc = static_cast<int>(model.loop_closures.size());
  const int nv = model.velocity_size();
  ClosureConstraints out;
  out.jacobian = MatX::Zero(6 * nc, nv);
  out.bias = VecX::Zero(6 * nc);
  out.error = VecX::Zero(6 * nc);
  for (int i = 0; i < nc; ++i) {
    const LoopClosure& lc = model.loop_closures[i];
    out.jacobian.middleRows<6>(6 * i) = frame_jacobian(model, state, lc.frame_a) -
                                        frame_jacobian(model, state, lc.frame_b);
    out.bias.segment<6>(6 * i) = frame_bias_acceleration(model, state, lc.frame_a) -
                                 frame_bias_acceleration(model, state, lc.frame_b);
    const auto ta = kindyn.world_transforms.find(lc.frame_a);
    const auto tb = kindyn.world_transforms.find(lc.frame_b);
    if (ta == kindyn.world_transforms.end() || tb == kindyn.world_transforms.end()) {
      throw UnknownFrameError("kindyn cache is missing a loop-closure frame");
    }
    out.error.segment<3>(6 * i) = ta->second.p - tb->second.p;
    out.error.segment<3>(6 * i + 3) = rot_log(ta->second.R * tb->second.R.transpose());
  }
  return out;
}

ContactResult solve_contact_forces(const KinDynQuantities& kindyn,
                                   const std::vector<ContactVertex>& vertices,
                                   const std::vector<int>& active_ids,
                                   const ClosureConstraints& closures,
                                   const VecX& applied_generalized, const RobotState& state,
                                   const RobotModel& model, const ContactParams& params,
                                   QpSolver& solver) {
  ContactResult result;
  result.active = active_ids;
  const int nv = static_cast<int>(kindyn.M.rows());
  const int n_active = static_cast<int>(active_ids.size());
  const int n_closures = closures.count();
  if (n_active == 0 && n_closures == 0) return result;
  if (applied_generalized.size() != nv) {
    throw DimensionError("applied generalized force does not match velocity size");
  }

  const VecX nu = state.generalized_velocity(model);
  const int rows = 3 * n_active + 6 * n_closures;
  MatX Jc(rows, nv);
  VecX bias(rows);
  VecX stabilization = VecX::Zero(rows);
  const double lambda = params.baumgarte_lambda;

  for (int k = 0; k < n_active; ++k) {
    const ContactVertex& v = vertices.at(active_ids[k]);
    Jc.middleRows<3>(3 * k) = v.jacobian;

    // Vertex bias acceleration: the foot-frame Jdot*nu shifted to the
    // vertex point plus the centripetal term of the lever arm.
    const auto foot_bias = kindyn.foot_bias_accelerations.find(v.foot);
    const auto foot_jac = kindyn.foot_jacobians.find(v.foot);
    const auto foot_tf = kindyn.world_transforms.find(v.foot);
    if (foot_bias == kindyn.foot_bias_accelerations.end() ||
        foot_jac == kindyn.foot_jacobians.end() || foot_tf == kindyn.world_transforms.end()) {
      throw UnknownFrameError("kindyn cache is missing foot frame '" + v.foot + "'");
    }
    const Vec3 r = v.position_world - foot_tf->second.p;
    const Vec3 omega = foot_jac->second.bottomRows<3>() * nu;
    bias.segment<3>(3 * k) = foot_bias->second.head<3>() -
                             skew(r) * foot_bias->second.tail<3>() +
                             omega.cross(omega.cross(r));

    const double penetration = v.position_world.z() - params.ground_height;
    if (penetration < 0.0) {
      stabilization[3 * k + 2] =
          2.0 * lambda * v.velocity_world.z() + lambda * lambda * penetration;
    }
  }
  if (n_closures > 0) {
    Jc.bottomRows(6 * n_closures) = closures.jacobian;
    bias.tail(6 * n_closures) = closures.bias;
    stabilization.tail(6 * n_closures) =
        2.0 * lambda * (closures.jacobian * nu) + lambda * lambda * closures.error;
  }

  Eigen::LLT<MatX> llt(kindyn.M);
  if (llt.info() != Eigen::Success) {
    throw SingularMassMatrix("mass matrix Cholesky failed in contact solve");
  }
  const MatX MinvJt = llt.solve(Jc.transpose());
  const VecX free_acc = llt.solve(applied_generalized - kindyn.h);

  // min 0.5 |K x + b|^2 + eps |x|^2 over the friction pyramid.
  MatX K = Jc * MinvJt;
  K = 0.5 * (K + K.transpose());
  const VecX b = Jc * free_acc + bias + stabilization;

  QpProblem qp;
  qp.Q = K.transpose() * K;
  qp.Q.diagonal().array() += 2.0 * params.force_regularization;
  qp.c = K.transpose() * b;
  const int m = 5 * n_active;
  qp.A = MatX::Zero(m, rows);
  qp.lower = VecX::Zero(m);
  qp.upper = VecX::Zero(m);
  for (int k = 0; k < n_active; ++k) {
    const int x = 3 * k, y = 3 * k + 1, z = 3 * k + 2;
    int row = 5 * k;
    // f_z >= 0
    qp.A(row, z) = 1.0;
    qp.lower[row] = 0.0;
    qp.upper[row] = kInf;
    // -mu f_z <= f_x <= mu f_z
    ++row;
    qp.A(row, x) = 1.0;
    qp.A(row, z) = -params.mu;
    qp.lower[row] = -kInf;
    qp.upper[row] = 0.0;
    ++row;
    qp.A(row, x) = 1.0;
    qp.A(row, z) = params.mu;
    qp.lower[row] = 0.0;
    qp.upper[row] = kInf;
    // -mu f_z <= f_y <= mu f_z
    ++row;
    qp.A(row, y) = 1.0;
    qp.A(row, z) = -params.mu;
    qp.lower[row] = -kInf;
    qp.upper[row] = 0.0;
    ++row;
    qp.A(row, y) = 1.0;
    qp.A(row, z) = params.mu;
    qp.lower[row] = 0.0;
    qp.upper[row] = kInf;
  }

  const QpResult sol = solver.solve(qp, params.qp);
  if (sol.status == QpStatus::Infeasible) {
    throw QpInfeasible("contact QP reported infeasible (numerics failure)");
  }
  result.qp_status = sol.status;
  for (int k = 0; k < n_active; ++k) {
    result.forces[active_ids[k]] = sol.x.segment<3>(3 * k);
  }
  for (int i = 0; i < n_closures; ++i) {
    result.closure_wrenches[i] = sol.x.segment<6>(3 * n_active + 6 * i);
  }
  return result;
}

ContactResult solve_contact_forces(const KinDynQuantities& kindyn,
                                   const std::vector<ContactVertex>& vertices,
                                   const std::vector<int>& active_ids,
                                   const ClosureConstraints& closures, const VecX& joint_torques,
                                   double mu, const RobotState& state, const RobotModel& model,
                                   QpSolver& solver) {
  VecX applied = VecX::Zero(model.velocity_size());
  applied.tail(model.joint_count()) = joint_torques;
  ContactParams params;
  params.mu = mu;
  return solve_contact_forces(kindyn, vertices, active_ids, closures, applied, state, model,
                              params, solver);
}

VecX resolve_impacts(const MatX& mass_matrix, const MatX& contact_jacobian, const VecX& nu,
                     double delta) {
  if (contact_jacobian.rows() == 0) return nu;
  if (contact_jacobian.cols() != nu.size() || mass_matrix.rows() != nu.size()) {
    throw DimensionError("impact projection dimension mismatch");
  }
  Eigen::LLT<MatX> llt(mass_matrix);
  if (llt.info() != Eigen::Success) {
    throw SingularMassMatrix("mass matrix Cholesky failed in impact resolution");
  }
  const MatX MinvJt = llt.solve(contact_jacobian.transpose());
  MatX K = contact_jacobian * MinvJt;
  K.diagonal().array() += delta;
  const VecX impulse_scaled = K.ldlt().solve(contact_jacobian * nu);
  return nu - MinvJt * impulse_scaled;
}

VecX resolve_impacts(const KinDynQuantities& kindyn, const std::vector<ContactVertex>& vertices,
                     const std::vector<int>& active_ids, const RobotModel& model,
                     const RobotState& state, double delta) {
  const VecX nu = state.generalized_velocity(model);
  if (active_ids.empty()) return nu;
  MatX Jc(3 * active_ids.size(), model.velocity_size());
  for (int k = 0; k < static_cast<int>(active_ids.size()); ++k) {
    Jc.middleRows<3>(3 * k) = vertices.at(active_ids[k]).jacobian;
  }
  return resolve_impacts(kindyn.M, Jc, nu, delta);
}

}  // namespace rbsim
