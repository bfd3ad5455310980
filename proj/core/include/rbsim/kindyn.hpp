#pragma once

#include <map>
#include <string>

#include "rbsim/math.hpp"
#include "rbsim/model.hpp"

namespace rbsim {

/// Generalized coordinates of a robot. Twists, Jacobians and wrenches use
/// the mixed representation throughout: linear components refer to the
/// frame origin and are expressed in world coordinates, angular components
/// are expressed in world coordinates. Generalized vectors stack the 6 base
/// coordinates first (linear, then angular), followed by the joints in
/// model order; fixed-base models drop the base block entirely.
struct RobotState {
  Vec3 base_position = Vec3::Zero();
  Quat base_orientation = Quat::Identity();  // world <- base
  VecX joint_positions;
  Vec6 base_twist = Vec6::Zero();  // linear [m/s], then angular [rad/s]
  VecX joint_velocities;

  static RobotState Zero(const RobotModel& model);

  /// Stacks the generalized velocity (size model.velocity_size()).
  VecX generalized_velocity(const RobotModel& model) const;
  void set_generalized_velocity(const RobotModel& model, const VecX& nu);
};

/// Throws DimensionError unless the state vectors match the model.
void check_state(const RobotModel& model, const RobotState& state);

/// External wrenches keyed by frame name; each is (force, torque) applied
/// at the frame origin, expressed in world coordinates.
using ExternalWrenches = std::map<std::string, Vec6>;

/// Per-step cache of everything the contact solver and the output bus need.
struct KinDynQuantities {
  MatX M;   // (6+n)x(6+n) mass matrix (n x n when fixed-base)
  VecX h;   // generalized bias forces: Coriolis + centrifugal + gravity
  std::map<std::string, Transform> world_transforms;
  std::map<std::string, MatX> foot_jacobians;         // 6 x (6+n), mixed
  std::map<std::string, Vec6> foot_bias_accelerations;  // Jdot * nu per foot
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);
};

/// World transform of every link frame and every attached frame.
std::map<std::string, Transform> forward_kinematics(const RobotModel& model,
                                                    const RobotState& state);

Transform frame_transform(const RobotModel& model, const RobotState& state,
                          const std::string& frame);

/// Joint-space inertia via the composite-rigid-body algorithm.
MatX mass_matrix(const RobotModel& model, const RobotState& state);

/// Coriolis, centrifugal and gravity forces: the recursive Newton-Euler
/// pass with zero generalized acceleration.
VecX bias_forces(const RobotModel& model, const RobotState& state, const Vec3& gravity);

/// 6 x velocity_size() mixed-representation Jacobian of `frame`
/// (rows 1-3 linear, 4-6 angular). J * nu is the frame's mixed twist.
MatX frame_jacobian(const RobotModel& model, const RobotState& state,
                    const std::string& frame);

/// Frame spatial acceleration at zero generalized acceleration (Jdot * nu).
Vec6 frame_bias_acceleration(const RobotModel& model, const RobotState& state,
                             const std::string& frame);

/// Recursive Newton-Euler. Returns the generalized forces tau such that
/// M * accel + h = tau + sum_F J_F^T f_F holds exactly by construction.
VecX inverse_dynamics(const RobotModel& model, const RobotState& state, const VecX& accel,
                      const Vec3& gravity, const ExternalWrenches& external = {});

/// Generalized acceleration from joint torques and external wrenches,
/// solved through a Cholesky factorization of the mass matrix. Throws
/// SingularMassMatrix when the factorization fails (invalid model).
VecX forward_dynamics(const RobotModel& model, const RobotState& state,
                      const VecX& joint_torques, const Vec3& gravity,
                      const ExternalWrenches& external = {});

/// Evaluates the full per-step cache in one shared kinematics pass:
/// mass matrix, bias forces, all world transforms, and the Jacobian and
/// bias acceleration of every declared foot frame.
KinDynQuantities compute_kindyn(const RobotModel& model, const RobotState& state,
                                const Vec3& gravity);

}  // namespace rbsim
