#pragma once

#include <array>

#include <Eigen/Core>

namespace aionfit {

/// Cross-product matrix: skew(a) * b == a.cross(b).
Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// Rodrigues map from an axis-angle vector to a rotation matrix. Below an
/// angle of 1e-8 a second-order series is used so the map stays smooth at 0.
Eigen::Matrix3d axis_angle_to_rotation(const Eigen::Vector3d& aa);

/// Partial derivatives dR/d(aa_i), i = 0..2.
std::array<Eigen::Matrix3d, 3> rotation_jacobian(const Eigen::Vector3d& aa);

/// Inverse of axis_angle_to_rotation, choosing the representative whose
/// angle lies in [0, pi].
Eigen::Vector3d rotation_to_axis_angle(const Eigen::Matrix3d& r);

}  // namespace aionfit
