#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <cmath>

namespace rbsim {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;
using Quat = Eigen::Quaterniond;

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

/// Rotation about an arbitrary unit axis (Rodrigues).
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

/// Exponential map: rotation vector -> rotation matrix.
inline Mat3 rot_exp(const Vec3& phi) {
  const double theta = phi.norm();
  if (theta < 1e-12) {
    return Mat3::Identity() + skew(phi);
  }
  return Eigen::AngleAxisd(theta, phi / theta).toRotationMatrix();
}

/// Logarithm map: rotation matrix -> rotation vector.
inline Vec3 rot_log(const Mat3& R) {
  const Eigen::AngleAxisd aa(R);
  return aa.angle() * aa.axis();
}

/// Quaternion exponential of a rotation vector, q = exp(phi/2).
/// Composing on the left advances an orientation by a world-frame
/// angular displacement.
inline Quat quat_exp(const Vec3& phi) {
  const double theta = phi.norm();
  Quat q;
  if (theta < 1e-12) {
    q.w() = 1.0;
    q.vec() = 0.5 * phi;
    q.normalize();
  } else {
    q.w() = std::cos(0.5 * theta);
    q.vec() = (std::sin(0.5 * theta) / theta) * phi;
  }
  return q;
}

/// URDF fixed-axis convention: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Mat3 rpy_to_rot(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

/// Rigid transform world<-frame (or parent<-child), rotation plus origin.
struct Transform {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();

  static Transform Identity() { return {}; }

  Transform operator*(const Transform& other) const {
    return {R * other.R, p + R * other.p};
  }

  Vec3 operator*(const Vec3& x) const { return p + R * x; }

  Transform inverse() const { return {R.transpose(), -(R.transpose() * p)}; }
};

inline bool is_finite(const VecX& v) { return v.allFinite(); }

}  // namespace rbsim
