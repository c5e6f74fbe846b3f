#include "aionfit/camera.hpp"

#include <cmath>
#include <string>

#include <Eigen/Geometry>

#include "aionfit/errors.hpp"
#include "aionfit/rotation.hpp"

namespace aionfit {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0 && fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) || !std::isfinite(cx) ||
      !std::isfinite(cy)) {
    throw InputError("camera intrinsics need finite, positive focal lengths");
  }
}

void CameraPose::validate() const {
  if (!R.allFinite() || !T.allFinite()) throw InputError("camera pose has non-finite entries");
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-8 || std::abs(R.determinant() - 1.0) > 1e-8) {
    throw InputError("camera rotation is not a proper rotation");
  }
}

CameraTrack CameraTrack::static_identity(const CameraIntrinsics& k, int frames) {
  CameraTrack t;
  t.intrinsics = k;
  t.poses.assign(frames, CameraPose{});
  return t;
}

bool CameraTrack::has_translation() const {
  for (const auto& p : poses) {
    if (p.T.squaredNorm() > 0.0) return true;
  }
  return false;
}

void CameraTrack::validate() const {
  if (poses.empty()) throw InputError("camera track has no frames");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InputError("camera scale must be positive");
  intrinsics.validate();
  for (std::size_t t = 0; t < poses.size(); ++t) {
    try {
      poses[t].validate();
    } catch (const InputError& e) {
      throw InputError("camera frame " + std::to_string(t) + ": " + e.what());
    }
  }
}

Eigen::Vector2d project(const CameraIntrinsics& k, const Eigen::Vector3d& p) {
  if (!(p.z() > kMinDepth)) throw BehindCameraError("point is behind the camera (depth " + std::to_string(p.z()) + ")");
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Eigen::Vector3d world_point_to_camera(const CameraPose& pose, double scale, const Eigen::Vector3d& p_world) {
  return pose.R * p_world + scale * pose.T;
}

Eigen::Vector3d camera_point_to_world(const CameraPose& pose, double scale, const Eigen::Vector3d& p_cam) {
  return pose.R.transpose() * (p_cam - scale * pose.T);
}

WorldRootState init_world_from_camera(const CameraPose& pose, double scale, const Eigen::Vector3d& phi_c,
                                      const Eigen::Vector3d& gamma_c) {
  const Eigen::Matrix3d rt = pose.R.transpose();
  WorldRootState w;
  w.global_orient = rotation_to_axis_angle(rt * axis_angle_to_rotation(phi_c));
  w.translation = rt * gamma_c - scale * (rt * pose.T);
  return w;
}

}  // namespace aionfit
