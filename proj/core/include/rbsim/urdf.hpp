#pragma once

#include <string>
#include <vector>

#include "rbsim/model.hpp"

namespace rbsim {

/// Options applied on top of the kinematic description: the URDF itself
/// carries no notion of a floating base, feet, or declared closed chains.
struct ModelOptions {
  bool floating = false;
  std::vector<Foot> feet;
  std::vector<LoopClosure> loop_closures;
};

/// Parses a URDF document (links with inertials; revolute / continuous /
/// prismatic / fixed joints; limits) into a validated RobotModel.
///
/// Fixed joints are fused into their parent link: the child inertia is
/// composed via the parallel-axis theorem and the child frame is kept as a
/// named attached frame. Link and joint ordering is depth-first from the
/// base with children in document order, so identical input yields an
/// identical model.
///
/// Throws ParseError on malformed XML or missing required elements,
/// KinematicsError on connectivity defects (cycles not declared as loop
/// closures, unknown links), ValidationError when the assembled model
/// violates a RobotModel invariant.
RobotModel load_model(const std::string& urdf_text, const ModelOptions& options);

/// Reads the file then delegates to load_model(). Throws IoError when the
/// file cannot be read.
RobotModel load_model_file(const std::string& path, const ModelOptions& options);

}  // namespace rbsim
