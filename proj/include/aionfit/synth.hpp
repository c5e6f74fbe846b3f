#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aionfit/body_model.hpp"
#include "aionfit/camera.hpp"
#include "aionfit/keypoints.hpp"
#include "aionfit/state.hpp"

namespace aionfit {

/// A 21-joint stick-figure body (y up, facing +z, pelvis at the origin)
/// whose joints carry the coco17 keypoint names. The child template is a
/// toddler with a relatively larger head and shorter legs; the ten shape
/// directions change limb lengths, widths and girth but never the face
/// geometry relative to the head, so alpha stays identifiable from keypoints.
BodyModelData make_toy_body_model();

enum class CameraPath { Static, Orbit, Dolly };

CameraPath parse_camera_path(const std::string& name);
std::string to_string(CameraPath path);

struct SynthScenario {
  int frames = 30;
  int tracks = 1;
  /// True alpha per track; cycled when shorter than tracks.
  std::vector<double> alphas{1.0};
  double noise_px = 0.0;
  CameraPath camera_path = CameraPath::Static;
  /// Camera translations are written divided by this, so the true camera scale equals it.
  double camera_scale = 1.0;
  double subject_distance = 4.0;  // meters
  /// Amplitudes of the sinusoidal motion; zero gives a subject holding still.
  double pose_amplitude = 0.0;         // radians, per body joint
  double orientation_amplitude = 0.0;  // radians
  double translation_amplitude = 0.0;  // meters
  /// Standard deviation of the true shape coefficients.
  double shape_spread = 0.0;
  CameraIntrinsics intrinsics{};
  std::string convention = "coco17";
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthOutput {
  std::vector<KeypointTrack> detections;
  CameraTrack cameras;  // file-space translations, scale reset to 1
  PersonStates truth;
  double true_camera_scale = 1.0;
  JointMap joint_map;
};

/// Renders a seeded scenario through forward kinematics, the camera and the
/// projection, then adds Gaussian pixel noise. Confidences are 1 for mapped
/// keypoints and 0 otherwise. Frames with a joint behind the camera are
/// resampled a bounded number of times before InputError is thrown.
SynthOutput synth_generate(const BodyModel& model, const SynthScenario& scenario);

}  // namespace aionfit
