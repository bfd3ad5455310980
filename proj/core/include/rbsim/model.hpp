#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rbsim/math.hpp"

namespace rbsim {

enum class JointKind { Revolute, Prismatic };

/// Foot sole geometry. A rectangular foot contributes four fixed contact
/// vertices at (+-length/2, +-width/2, sole_height) in the foot frame; a
/// spherical foot contributes a single time-varying vertex at the lowest
/// point of the sphere.
struct FootGeometry {
  enum class Shape { Rectangular, Spherical };
  Shape shape = Shape::Rectangular;

  // Rectangular
  double length = 0.0;       // x extent [m]
  double width = 0.0;        // y extent [m]
  double sole_height = 0.0;  // z offset of the sole plane in the foot frame [m]

  // Spherical
  double radius = 0.0;
  Vec3 center_offset = Vec3::Zero();

  static FootGeometry Rectangular(double length, double width, double sole_height) {
    FootGeometry g;
    g.shape = Shape::Rectangular;
    g.length = length;
    g.width = width;
    g.sole_height = sole_height;
    return g;
  }

  static FootGeometry Spherical(double radius, const Vec3& center_offset = Vec3::Zero()) {
    FootGeometry g;
    g.shape = Shape::Spherical;
    g.radius = radius;
    g.center_offset = center_offset;
    return g;
  }

  int vertex_count() const { return shape == Shape::Rectangular ? 4 : 1; }
};

struct Link {
  std::string name;
  double mass = 0.0;        // [kg]
  Mat3 inertia = Mat3::Zero();  // about the CoM, in the link frame [kg m^2]
  Vec3 com = Vec3::Zero();      // CoM offset in the link frame [m]
};

struct Joint {
  std::string name;
  JointKind kind = JointKind::Revolute;
  int parent_link = -1;  // index into RobotModel::links
  int child_link = -1;
  Vec3 axis = Vec3::UnitZ();  // in the child (joint) frame, unit norm
  Transform origin;           // parent link frame -> child link frame at q = 0
  double position_lower = -std::numeric_limits<double>::infinity();
  double position_upper = std::numeric_limits<double>::infinity();
  double effort_limit = std::numeric_limits<double>::infinity();
};

/// A named frame rigidly attached to a link (identity for the link frame
/// itself; fused fixed-joint children keep their frames this way).
struct AttachedFrame {
  std::string name;
  int link = -1;
  Transform local;  // link frame -> attached frame
};

struct Foot {
  std::string frame;  // resolved against links and attached frames
  FootGeometry geometry;
};

struct LoopClosure {
  std::string frame_a;
  std::string frame_b;
};

/// Immutable articulated-robot description. Links are ordered depth-first
/// from the base; joint i connects links[joints[i].parent_link] to
/// links[i + 1]. Construct through load_model() or fill the fields directly
/// and check with validate_model().
struct RobotModel {
  std::vector<Link> links;    // links[0] is the base
  std::vector<Joint> joints;  // spanning tree, size links.size() - 1
  std::vector<AttachedFrame> frames;  // extra named frames (link frames are implicit)
  std::string base_link;
  bool floating = false;
  std::vector<Foot> feet;
  std::vector<LoopClosure> loop_closures;

  int joint_count() const { return static_cast<int>(joints.size()); }
  int link_count() const { return static_cast<int>(links.size()); }
  /// Base degrees of freedom: 6 when floating, 0 when fixed.
  int base_dofs() const { return floating ? 6 : 0; }
  /// Generalized velocity dimension.
  int velocity_size() const { return base_dofs() + joint_count(); }

  int link_index(const std::string& name) const;

  /// Resolves a frame name to its host link and the link->frame transform.
  /// Returns std::nullopt when the frame does not exist.
  std::optional<AttachedFrame> find_frame(const std::string& name) const;

  /// Every resolvable frame name: link frames first (tree order), then
  /// attached frames in declaration order.
  std::vector<std::string> frame_names() const;
};

/// One invariant violation found by validate_model().
struct ModelViolation {
  std::string code;     // e.g. "NON_PD_INERTIA"
  std::string element;  // offending link / joint / foot / frame name
  std::string detail;
};

/// Checks every RobotModel invariant and returns the violations found
/// (empty = valid). Never throws, never mutates.
std::vector<ModelViolation> validate_model(const RobotModel& model);

/// Violation codes emitted by validate_model().
namespace violation_code {
inline constexpr const char* kNonPdInertia = "NON_PD_INERTIA";
inline constexpr const char* kNonUnitAxis = "NON_UNIT_AXIS";
inline constexpr const char* kBadTree = "BAD_TREE";
inline constexpr const char* kUnknownFootLink = "UNKNOWN_FOOT_LINK";
inline constexpr const char* kUnknownClosureFrame = "UNKNOWN_CLOSURE_FRAME";
inline constexpr const char* kNonPositiveFootDimension = "NONPOSITIVE_FOOT_DIMENSION";
inline constexpr const char* kMasslessMovableLink = "MASSLESS_MOVABLE_LINK";
inline constexpr const char* kBadJointLimits = "BAD_JOINT_LIMITS";
}  // namespace violation_code

}  // namespace rbsim
