#include "rbsim/model.hpp"

#include <Eigen/Eigenvalues>

namespace rbsim {

int RobotModel::link_index(const std::string& name) const {
  for (int i = 0; i < link_count(); ++i) {
    if (links[i].name == name) return i;
  }
  return -1;
}

std::optional<AttachedFrame> RobotModel::find_frame(const std::string& name) const {
  const int li = link_index(name);
  if (li >= 0) {
    return AttachedFrame{name, li, Transform::Identity()};
  }
  for (const auto& f : frames) {
    if (f.name == name) return f;
  }
  return std::nullopt;
}

std::vector<std::string> RobotModel::frame_names() const {
  std::vector<std::string> names;
  names.reserve(links.size() + frames.size());
  for (const auto& l : links) names.push_back(l.name);
  for (const auto& f : frames) names.push_back(f.name);
  return names;
}

std::vector<ModelViolation> validate_model(const RobotModel& model) {
  namespace code = violation_code;
  std::vector<ModelViolation> out;
  const int nl = model.link_count();
  const int nj = model.joint_count();

  if (nj != nl - 1) {
    out.push_back({code::kBadTree, model.base_link,
                   "expected links = joints + 1 for a spanning tree"});
  }
  if (nl > 0 && model.links[0].name != model.base_link) {
    out.push_back({code::kBadTree, model.base_link, "links[0] is not the base link"});
  }
  for (int j = 0; j < nj; ++j) {
    const Joint& joint = model.joints[j];
    // Depth-first ordering puts every parent before its child.
    if (joint.child_link != j + 1 || joint.parent_link < 0 ||
        joint.parent_link >= joint.child_link) {
      out.push_back({code::kBadTree, joint.name, "joint does not respect tree ordering"});
    }
    if (std::abs(joint.axis.norm() - 1.0) > 1e-9) {
      out.push_back({code::kNonUnitAxis, joint.name, "joint axis is not unit norm"});
    }
    if (joint.position_lower > joint.position_upper) {
      out.push_back({code::kBadJointLimits, joint.name, "lower limit exceeds upper limit"});
    }
    // A movable link without inertia makes the mass matrix singular.
    if (joint.child_link >= 0 && joint.child_link < nl &&
        model.links[joint.child_link].mass <= 0.0) {
      out.push_back({code::kMasslessMovableLink, model.links[joint.child_link].name,
                     "link moved by joint '" + joint.name + "' has no mass"});
    }
  }
  for (const Link& link : model.links) {
    if (link.mass > 0.0) {
      const Mat3 sym = 0.5 * (link.inertia + link.inertia.transpose());
      if ((link.inertia - sym).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + sym.cwiseAbs().maxCoeff())) {
        out.push_back({code::kNonPdInertia, link.name, "inertia matrix is not symmetric"});
        continue;
      }
      Eigen::SelfAdjointEigenSolver<Mat3> eig(sym);
      if (eig.eigenvalues().minCoeff() <= 0.0) {
        out.push_back({code::kNonPdInertia, link.name, "inertia matrix is not positive definite"});
      }
    }
  }
  for (const Foot& foot : model.feet) {
    if (!model.find_frame(foot.frame)) {
      out.push_back({code::kUnknownFootLink, foot.frame, "foot frame does not exist"});
    }
    const FootGeometry& g = foot.geometry;
    if (g.shape == FootGeometry::Shape::Rectangular) {
      if (g.length <= 0.0 || g.width <= 0.0) {
        out.push_back({code::kNonPositiveFootDimension, foot.frame,
                       "rectangular foot needs positive length and width"});
      }
    } else if (g.radius <= 0.0) {
      out.push_back({code::kNonPositiveFootDimension, foot.frame,
                     "spherical foot needs positive radius"});
    }
  }
  for (const LoopClosure& lc : model.loop_closures) {
    if (!model.find_frame(lc.frame_a)) {
      out.push_back({code::kUnknownClosureFrame, lc.frame_a, "closure frame does not exist"});
    }
    if (!model.find_frame(lc.frame_b)) {
      out.push_back({code::kUnknownClosureFrame, lc.frame_b, "closure frame does not exist"});
    }
  }
  return out;
}

}  // namespace rbsim
