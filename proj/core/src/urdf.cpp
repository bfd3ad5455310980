#include "rbsim/urdf.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "rbsim/errors.hpp"

namespace rbsim {
namespace {

namespace pt = boost::property_tree;

Vec3 parse_vec3(const std::string& text, const std::string& where) {
  std::istringstream ss(text);
  Vec3 v;
  if (!(ss >> v.x() >> v.y() >> v.z())) {
    throw ParseError("expected 3 numbers in '" + text + "' (" + where + ")");
  }
  return v;
}

Transform parse_origin(const pt::ptree& element) {
  Transform t;
  if (auto origin = element.get_child_optional("origin")) {
    const std::string xyz = origin->get<std::string>("<xmlattr>.xyz", "0 0 0");
    const std::string rpy = origin->get<std::string>("<xmlattr>.rpy", "0 0 0");
    t.p = parse_vec3(xyz, "origin xyz");
    const Vec3 angles = parse_vec3(rpy, "origin rpy");
    t.R = rpy_to_rot(angles.x(), angles.y(), angles.z());
  }
  return t;
}

struct RawLink {
  std::string name;
  double mass = 0.0;
  Mat3 inertia = Mat3::Zero();
  Vec3 com = Vec3::Zero();
};

struct RawJoint {
  std::string name;
  std::string type;
  std::string parent;
  std::string child;
  Transform origin;
  Vec3 axis = Vec3::UnitX();  // URDF default
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double effort = std::numeric_limits<double>::infinity();
};

RawLink parse_link(const pt::ptree& element) {
  RawLink link;
  link.name = element.get<std::string>("<xmlattr>.name", "");
  if (link.name.empty()) throw ParseError("link without a name attribute");
  if (auto inertial = element.get_child_optional("inertial")) {
    const Transform t = parse_origin(*inertial);
    link.com = t.p;
    auto mass = inertial->get_child_optional("mass");
    if (!mass) throw ParseError("link '" + link.name + "' inertial has no mass element");
    link.mass = mass->get<double>("<xmlattr>.value");
    auto inertia = inertial->get_child_optional("inertia");
    if (!inertia) throw ParseError("link '" + link.name + "' inertial has no inertia element");
    Mat3 I;
    const double ixx = inertia->get<double>("<xmlattr>.ixx");
    const double ixy = inertia->get<double>("<xmlattr>.ixy", 0.0);
    const double ixz = inertia->get<double>("<xmlattr>.ixz", 0.0);
    const double iyy = inertia->get<double>("<xmlattr>.iyy");
    const double iyz = inertia->get<double>("<xmlattr>.iyz", 0.0);
    const double izz = inertia->get<double>("<xmlattr>.izz");
    I << ixx, ixy, ixz, ixy, iyy, iyz, ixz, iyz, izz;
    // The inertial origin rpy orients the inertia frame; express about the
    // CoM in the link frame.
    link.inertia = t.R * I * t.R.transpose();
  }
  return link;
}

RawJoint parse_joint(const pt::ptree& element) {
  RawJoint joint;
  joint.name = element.get<std::string>("<xmlattr>.name", "");
  if (joint.name.empty()) throw ParseError("joint without a name attribute");
  joint.type = element.get<std::string>("<xmlattr>.type", "");
  auto parent = element.get_child_optional("parent");
  auto child = element.get_child_optional("child");
  if (!parent || !child) {
    throw ParseError("joint '" + joint.name + "' is missing parent or child");
  }
  joint.parent = parent->get<std::string>("<xmlattr>.link");
  joint.child = child->get<std::string>("<xmlattr>.link");
  joint.origin = parse_origin(element);
  if (auto axis = element.get_child_optional("axis")) {
    joint.axis = parse_vec3(axis->get<std::string>("<xmlattr>.xyz", "1 0 0"), "joint axis");
  }
  if (auto limit = element.get_child_optional("limit")) {
    joint.lower = limit->get<double>("<xmlattr>.lower", joint.lower);
    joint.upper = limit->get<double>("<xmlattr>.upper", joint.upper);
    joint.effort = limit->get<double>("<xmlattr>.effort", joint.effort);
  }
  return joint;
}

/// Pre-fusion tree node: one per URDF link, in document order.
struct TreeNode {
  RawLink link;
  int parent = -1;           // node index
  int parent_joint = -1;     // index into raw joints, -1 for the root
  std::vector<int> children;  // node indices, document order of the joints
};

Mat3 parallel_axis(const Mat3& inertia_com, double mass, const Vec3& d) {
  return inertia_com + mass * (d.squaredNorm() * Mat3::Identity() - d * d.transpose());
}

/// Rigidly composes (mass, com, inertia-about-com) of `child`, posed at `t`
/// in the parent frame, into `parent`.
void fuse_inertia(RawLink& parent, const RawLink& child, const Transform& t) {
  const double m1 = parent.mass;
  const double m2 = child.mass;
  if (m1 + m2 <= 0.0) return;
  const Vec3 c2 = t * child.com;
  const Mat3 I2 = t.R * child.inertia * t.R.transpose();
  const Vec3 c = (m1 * parent.com + m2 * c2) / (m1 + m2);
  Mat3 I = Mat3::Zero();
  if (m1 > 0.0) I += parallel_axis(parent.inertia, m1, parent.com - c);
  if (m2 > 0.0) I += parallel_axis(I2, m2, c2 - c);
  parent.mass = m1 + m2;
  parent.com = c;
  parent.inertia = I;
}

}  // namespace

RobotModel load_model(const std::string& urdf_text, const ModelOptions& options) {
  pt::ptree doc;
  try {
    std::istringstream stream(urdf_text);
    pt::read_xml(stream, doc);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError(std::string("malformed XML: ") + e.what());
  }
  auto robot = doc.get_child_optional("robot");
  if (!robot) throw ParseError("no <robot> root element");

  std::vector<RawLink> raw_links;
  std::vector<RawJoint> raw_joints;
  for (const auto& [tag, element] : *robot) {
    if (tag == "link") {
      raw_links.push_back(parse_link(element));
    } else if (tag == "joint") {
      raw_joints.push_back(parse_joint(element));
    }
    // visuals, collisions, materials etc. are intentionally skipped
  }
  if (raw_links.empty()) throw ParseError("URDF declares no links");

  std::map<std::string, int> link_id;
  for (int i = 0; i < static_cast<int>(raw_links.size()); ++i) {
    if (!link_id.emplace(raw_links[i].name, i).second) {
      throw ParseError("duplicate link name '" + raw_links[i].name + "'");
    }
  }

  // Connectivity: every link has at most one parent joint, exactly one root,
  // everything reachable from the root. Anything else cannot be a spanning
  // tree; kinematic loops have to be cut and declared as loop closures.
  std::vector<TreeNode> nodes(raw_links.size());
  for (size_t i = 0; i < raw_links.size(); ++i) nodes[i].link = raw_links[i];
  std::set<std::string> joint_names;
  for (int j = 0; j < static_cast<int>(raw_joints.size()); ++j) {
    const RawJoint& joint = raw_joints[j];
    if (!joint_names.insert(joint.name).second) {
      throw ParseError("duplicate joint name '" + joint.name + "'");
    }
    auto parent_it = link_id.find(joint.parent);
    auto child_it = link_id.find(joint.child);
    if (parent_it == link_id.end() || child_it == link_id.end()) {
      throw KinematicsError("joint '" + joint.name + "' references an unknown link");
    }
    TreeNode& child = nodes[child_it->second];
    if (child.parent_joint >= 0) {
      throw KinematicsError("link '" + joint.child +
                            "' has two parent joints; the joint graph contains a cycle "
                            "that must be cut and declared as a loop closure");
    }
    child.parent = parent_it->second;
    child.parent_joint = j;
    nodes[parent_it->second].children.push_back(child_it->second);
  }
  int root = -1;
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    if (nodes[i].parent_joint < 0) {
      if (root >= 0) {
        throw KinematicsError("multiple root links ('" + nodes[root].link.name + "', '" +
                              nodes[i].link.name + "'); the model is disconnected");
      }
      root = i;
    }
  }
  if (root < 0) {
    throw KinematicsError(
        "no root link: the joint graph contains a cycle that must be cut and "
        "declared as a loop closure");
  }

  // Depth-first CONSTRUCTION order, children in document order.
  std::vector<int> dfs;
  {
    std::vector<int> stack = {root};
    std::vector<bool> seen(nodes.size(), false);
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      if (seen[n]) {
        throw KinematicsError("cycle detected at link '" + nodes[n].link.name + "'");
      }
      seen[n] = true;
      dfs.push_back(n);
      for (auto it = nodes[n].children.rbegin(); it != nodes[n].children.rend(); ++it) {
        stack.push_back(*it);
      }
    }
    if (dfs.size() != nodes.size()) {
      throw KinematicsError("some links are unreachable from the root link '" +
                            nodes[root].link.name + "'");
    }
  }

  // Fuse fixed joints bottom-up. Fused child frames survive as attached
  // frames on the nearest movable ancestor.
  struct PendingFrame {
    std::string name;
    int node;         // host node after fusion
    Transform local;  // host link frame -> frame
  };
  std::vector<PendingFrame> pending_frames;
  std::vector<bool> fused(nodes.size(), false);
  for (auto it = dfs.rbegin(); it != dfs.rend(); ++it) {
    const int n = *it;
    if (nodes[n].parent_joint < 0) continue;
    const RawJoint& joint = raw_joints[nodes[n].parent_joint];
    if (joint.type != "fixed") continue;
    const int p = nodes[n].parent;
    fuse_inertia(nodes[p].link, nodes[n].link, joint.origin);
    fused[n] = true;
    pending_frames.push_back({nodes[n].link.name, p, joint.origin});
    // Re-home surviving frames and reparent the child's joints.
    for (auto& f : pending_frames) {
      if (f.node == n) {
        f.node = p;
        f.local = joint.origin * f.local;
      }
    }
    for (int c : nodes[n].children) {
      nodes[c].parent = p;
      raw_joints[nodes[c].parent_joint].origin =
          joint.origin * raw_joints[nodes[c].parent_joint].origin;
      nodes[p].children.push_back(c);
    }
    nodes[n].children.clear();
  }

  // Re-run the DFS over the fused tree and assemble the model.
  RobotModel model;
  model.floating = options.floating;
  model.base_link = nodes[root].link.name;
  std::map<int, int> node_to_link;
  {
    std::vector<int> stack = {root};
    while (!stack.empty()) {
      const int n = stack.back();
      stack.pop_back();
      const int li = model.link_count();
      node_to_link[n] = li;
      model.links.push_back({nodes[n].link.name, nodes[n].link.mass, nodes[n].link.inertia,
                             nodes[n].link.com});
      if (nodes[n].parent_joint >= 0) {
        const RawJoint& rj = raw_joints[nodes[n].parent_joint];
        Joint joint;
        joint.name = rj.name;
        if (rj.type == "revolute" || rj.type == "continuous") {
          joint.kind = JointKind::Revolute;
        } else if (rj.type == "prismatic") {
          joint.kind = JointKind::Prismatic;
        } else {
          throw ParseError("joint '" + rj.name + "' has unsupported type '" + rj.type + "'");
        }
        const double axis_norm = rj.axis.norm();
        if (axis_norm < 1e-9) {
          throw ValidationError("joint '" + rj.name + "' has a zero-norm axis");
        }
        joint.axis = rj.axis / axis_norm;
        joint.origin = rj.origin;
        joint.parent_link = node_to_link.at(nodes[n].parent);
        joint.child_link = li;
        joint.position_lower = rj.lower;
        joint.position_upper = rj.upper;
        joint.effort_limit = rj.effort;
        model.joints.push_back(joint);
      }
      for (auto it = nodes[n].children.rbegin(); it != nodes[n].children.rend(); ++it) {
        if (!fused[*it]) stack.push_back(*it);
      }
    }
  }
  for (const auto& f : pending_frames) {
    model.frames.push_back({f.name, node_to_link.at(f.node), f.local});
  }
  model.feet = options.feet;
  model.loop_closures = options.loop_closures;

  const auto violations = validate_model(model);
  if (!violations.empty()) {
    std::string msg = "model violates invariants:";
    for (const auto& v : violations) {
      msg += " [" + v.code + " " + v.element + ": " + v.detail + "]";
    }
    throw ValidationError(msg);
  }
  return model;
}

RobotModel load_model_file(const std::string& path, const ModelOptions& options) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open URDF file '" + path + "'");
  std::stringstream buffer;
  buffer << file.rdbuf();
  return load_model(buffer.str(), options);
}

}  // namespace rbsim
