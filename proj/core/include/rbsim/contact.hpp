#pragma once

#include <map>
#include <string>
#include <vector>

#include "rbsim/kindyn.hpp"
#include "rbsim/math.hpp"
#include "rbsim/model.hpp"
#include "rbsim/qp.hpp"

namespace rbsim {

/// A point on a foot through which a pure 3D ground reaction force acts.
/// Rectangular feet carry four vertices fixed in the foot frame; spherical
/// feet carry one vertex that tracks the lowest point of the sphere.
struct ContactVertex {
  std::string foot;  // foot frame name
  int index = 0;     // vertex index within the foot
  Vec3 position_world = Vec3::Zero();
  Vec3 velocity_world = Vec3::Zero();
  MatX jacobian;  // 3 x velocity_size(), linear rows at the vertex point
};

/// Stacked loop-closure constraint data: 6 rows per declared closure
/// holding the relative mixed twist of frame_a w.r.t. frame_b.
struct ClosureConstraints {
  MatX jacobian;  // (6*closures) x velocity_size()
  VecX bias;      // relative bias acceleration
  VecX error;     // relative pose error: position, then orientation log
  int count() const { return static_cast<int>(error.size()) / 6; }
};

struct ContactParams {
  double mu = 1.0;
  double ground_height = 0.0;
  double activation_tol = 1e-3;       // [m]
  double baumgarte_lambda = 20.0;     // [1/s]
  double force_regularization = 1e-6;
  double impact_damping = 1e-10;
  QpOptions qp;
};

struct ContactResult {
  std::vector<int> active;        // vertex ids (indices into the canonical vertex list)
  std::map<int, Vec3> forces;     // vertex id -> world force [N], active ids only
  std::map<int, Vec6> closure_wrenches;  // closure index -> wrench
  bool impulse_applied = false;
  QpStatus qp_status = QpStatus::Optimal;
};

/// Enumerates every contact vertex of the model at the given state, in
/// deterministic (foot name, index) order. Vertex ids used elsewhere are
/// positions in this list.
std::vector<ContactVertex> contact_vertices(const RobotModel& model, const RobotState& state,
                                            const KinDynQuantities& kindyn);

/// A vertex is active iff its height above the ground is at most
/// activation_tol. Returns ids in ascending order.
std::vector<int> detect_active_set(const std::vector<ContactVertex>& vertices,
                                   double ground_height, double activation_tol);

/// Constraint rows for every declared loop closure (empty matrices when the
/// model has none).
ClosureConstraints loop_closure_constraints(const RobotModel& model, const RobotState& state,
                                            const KinDynQuantities& kindyn);

/// Solves the reaction-force QP. Decision variables are the per-vertex
/// forces of the active set (3 each, friction-pyramid constrained) and one
/// unconstrained 6D wrench per loop closure. The objective minimizes the
/// resulting constraint-point accelerations with Baumgarte stabilization on
/// penetrating vertices and closure errors, plus a small Tikhonov term that
/// resolves force-distribution indeterminacy deterministically.
///
/// `applied_generalized` is the full generalized force already applied to
/// the system (S' tau plus any external wrenches mapped through their
/// Jacobians). Throws QpInfeasible if the solver reports an infeasible
/// program (numerics failure; the pyramid always admits zero force).
ContactResult solve_contact_forces(const KinDynQuantities& kindyn,
                                   const std::vector<ContactVertex>& vertices,
                                   const std::vector<int>& active_ids,
                                   const ClosureConstraints& closures,
                                   const VecX& applied_generalized, const RobotState& state,
                                   const RobotModel& model, const ContactParams& params,
                                   QpSolver& solver);

/// Convenience overload building the applied force from joint torques only.
ContactResult solve_contact_forces(const KinDynQuantities& kindyn,
                                   const std::vector<ContactVertex>& vertices,
                                   const std::vector<int>& active_ids,
                                   const ClosureConstraints& closures, const VecX& joint_torques,
                                   double mu, const RobotState& state, const RobotModel& model,
                                   QpSolver& solver);

/// Perfectly inelastic impulse across every active vertex: projects the
/// generalized velocity so the active vertex velocities vanish (up to the
/// rank-deficiency damping delta). Kinetic energy never increases.
VecX resolve_impacts(const MatX& mass_matrix, const MatX& contact_jacobian, const VecX& nu,
                     double delta = 1e-10);

/// Model-level wrapper: builds the stacked Jacobian of `active_ids` and
/// returns the post-impact generalized velocity (nu unchanged when the
/// active set is empty).
VecX resolve_impacts(const KinDynQuantities& kindyn, const std::vector<ContactVertex>& vertices,
                     const std::vector<int>& active_ids, const RobotModel& model,
                     const RobotState& state, double delta = 1e-10);

}  // namespace rbsim
