#pragma once

#include <vector>

#include <Eigen/Core>

#include "aionfit/body_model.hpp"

namespace aionfit {

/// Root orientation, body pose and root translation (world frame) at one frame.
struct FrameState {
  PoseParams pose;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// One tracked person: a single shape shared over time plus per-frame poses,
/// aligned one-to-one with the track's detection frames.
struct PersonState {
  int track_id = 0;
  ShapeParams shape;
  std::vector<FrameState> frames;
};

using PersonStates = std::vector<PersonState>;

struct FrameGradient {
  Eigen::Vector3d d_global_orient = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, Eigen::Dynamic, 3> d_body_pose;
  Eigen::Vector3d d_translation = Eigen::Vector3d::Zero();
};

struct PersonGradient {
  Betas d_beta = Betas::Zero();
  double d_alpha = 0.0;
  std::vector<FrameGradient> frames;
};

/// Gradient in natural parameters, shaped like the states.
struct StateGradient {
  std::vector<PersonGradient> persons;
  double d_camera_scale = 0.0;
};

}  // namespace aionfit
