#include "aionfit/rotation.hpp"

#include <cmath>

#include <Eigen/Geometry>

namespace aionfit {

namespace {
constexpr double kSeriesAngle = 1e-8;
constexpr double kJacobianSeriesAngle = 1e-6;
}  // namespace

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Eigen::Matrix3d axis_angle_to_rotation(const Eigen::Vector3d& aa) {
  const double theta = aa.norm();
  const Eigen::Matrix3d k = skew(aa);
  if (theta < kSeriesAngle) {
    return Eigen::Matrix3d::Identity() + k + 0.5 * k * k;
  }
  const double s = std::sin(theta) / theta;
  const double c = (1.0 - std::cos(theta)) / (theta * theta);
  return Eigen::Matrix3d::Identity() + s * k + c * k * k;
}

std::array<Eigen::Matrix3d, 3> rotation_jacobian(const Eigen::Vector3d& aa) {
  std::array<Eigen::Matrix3d, 3> d;
  const double theta2 = aa.squaredNorm();
  if (std::sqrt(theta2) < kJacobianSeriesAngle) {
    // d/dv_i of I + [v] + [v]^2/2, exact to first order in v.
    const Eigen::Matrix3d k = skew(aa);
    for (int i = 0; i < 3; ++i) {
      const Eigen::Matrix3d e = skew(Eigen::Vector3d::Unit(i));
      d[i] = e + 0.5 * (e * k + k * e);
    }
    return d;
  }
  // dR/dv_i = (v_i [v] + [v x (I - R) e_i]) R / |v|^2
  const Eigen::Matrix3d r = axis_angle_to_rotation(aa);
  const Eigen::Matrix3d k = skew(aa);
  const Eigen::Matrix3d i_minus_r = Eigen::Matrix3d::Identity() - r;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d w = aa.cross(i_minus_r.col(i));
    d[i] = ((aa[i] * k + skew(w)) / theta2) * r;
  }
  return d;
}

Eigen::Vector3d rotation_to_axis_angle(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

}  // namespace aionfit
