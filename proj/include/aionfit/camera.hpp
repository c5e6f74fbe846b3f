#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace aionfit {

/// Minimum camera-frame depth (meters) for a projectable point.
inline constexpr double kMinDepth = 1e-6;

/// Pinhole intrinsics, K = [[fx, 0, cx], [0, fy, cy]].
struct CameraIntrinsics {
  double fx = 1000.0;
  double fy = 1000.0;
  double cx = 500.0;
  double cy = 500.0;

  void validate() const;
};

/// World-to-camera rigid transform: p_c = R p_w + scale * T.
struct CameraPose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d T = Eigen::Vector3d::Zero();

  void validate() const;
};

struct CameraTrack {
  std::vector<CameraPose> poses;
  CameraIntrinsics intrinsics;
  double scale = 1.0;

  /// Identity poses with unit scale; the single-image configuration.
  static CameraTrack static_identity(const CameraIntrinsics& k, int frames);

  int frame_count() const { return static_cast<int>(poses.size()); }
  /// True when some frame carries a non-zero translation, i.e. the scale is observable.
  bool has_translation() const;
  void validate() const;
};

/// Pi_K(p) = (fx * x/z + cx, fy * y/z + cy). Throws BehindCameraError when z <= kMinDepth.
Eigen::Vector2d project(const CameraIntrinsics& k, const Eigen::Vector3d& p);

Eigen::Vector3d world_point_to_camera(const CameraPose& pose, double scale, const Eigen::Vector3d& p_world);

/// Inverse of world_point_to_camera.
Eigen::Vector3d camera_point_to_world(const CameraPose& pose, double scale, const Eigen::Vector3d& p_cam);

struct WorldRootState {
  Eigen::Vector3d global_orient;
  Eigen::Vector3d translation;
};

/// Converts a camera-frame root orientation and translation to the world
/// frame: R_w = R^T R(phi_c), gamma_w = R^T gamma_c - scale R^T T.
WorldRootState init_world_from_camera(const CameraPose& pose, double scale, const Eigen::Vector3d& phi_c,
                                      const Eigen::Vector3d& gamma_c);

}  // namespace aionfit
