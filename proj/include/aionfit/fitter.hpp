#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aionfit/body_model.hpp"
#include "aionfit/camera.hpp"
#include "aionfit/keypoints.hpp"
#include "aionfit/layout.hpp"
#include "aionfit/lbfgs.hpp"
#include "aionfit/objective.hpp"
#include "aionfit/state.hpp"

namespace aionfit {

struct FitConfig {
  /// Root orientation and translation only.
  StageWeights stage1{0.001, 0.0, 0.0, 0.0, 30};
  /// All parameters, with smoothness, pose and shape priors.
  StageWeights stage2{0.001, 5.0, 0.04, 0.05, 60};
  LbfgsOptions lbfgs{};
  double alpha_init = 1.0;
  double camera_scale_init = 1.0;
  RobustLossConfig robust{};
  double confidence_floor = kDefaultConfidenceFloor;
  double alpha_margin = kDefaultAlphaMargin;
  PosePrior prior{};
  /// Run a finite-difference gradient check on each stage's layout before
  /// optimizing; a failed check throws NumericalError.
  bool gradient_check = false;

  void validate() const;
};

struct StageReport {
  std::vector<double> trace;  // trace[0] is the starting objective
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::string message;
  std::optional<double> gradient_check_error;
};

struct TrackDiagnostic {
  int track_id = 0;
  std::string message;
};

struct FitReport {
  StageReport stage1;
  StageReport stage2;
  PersonStates states;
  double camera_scale = 1.0;
  /// Per track, per frame mean reprojection residual in pixels.
  std::vector<std::vector<double>> frame_residuals;
  std::vector<TrackDiagnostic> rejected;

  double mean_residual() const { return mean_reprojection_residual(frame_residuals); }
};

struct InitResult {
  PersonStates states;
  double camera_scale = 1.0;
  std::vector<KeypointTrack> detections;  // accepted tracks, aligned with states
  std::vector<TrackDiagnostic> rejected;
};

struct GradientCheckResult {
  double max_relative_error = 0.0;
  int worst_index = -1;
  Eigen::VectorXd analytic;
  Eigen::VectorXd numeric;
};

/// Central finite differences (step 1e-5 relative) of the total objective over
/// the layout's free parameters. The relative error of component i is
/// |a_i - n_i| / max(|a_i|, |n_i|, 1e-6 * max_j |n_j|).
GradientCheckResult check_gradient(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w,
                                   const FreeParameterLayout& layout);

/// Pinhole similar-triangles depth of a subject of the given height whose
/// image spans bbox_height pixels: fy * model_height / bbox_height.
double heuristic_depth(double fy, double model_height, double bbox_height);

/// Camera-frame axis-angle that stands the model upright in the image,
/// facing the camera.
Eigen::Vector3d upright_camera_orientation(UpAxis up);

class Fitter {
 public:
  Fitter(const BodyModel& model, const JointMap& joint_map, FitConfig config);

  const FitConfig& config() const { return config_; }

  /// World-frame starting states. With hints (camera-frame states aligned to
  /// the detection tracks by id) the root is converted through the camera
  /// poses; otherwise the depth comes from the pinhole height heuristic.
  /// alpha always starts at config().alpha_init.
  InitResult init_tracks(const std::vector<KeypointTrack>& detections, const CameraTrack& cameras,
                         const PersonStates* hints = nullptr) const;

  /// Root-only stage; every other parameter stays bit-identical.
  StageReport stage1(PersonStates& states, CameraTrack& cameras, const std::vector<KeypointTrack>& detections) const;

  /// Full stage; also updates cameras.scale when the track has translation.
  StageReport stage2(PersonStates& states, CameraTrack& cameras, const std::vector<KeypointTrack>& detections) const;

  /// init_tracks, stage1, stage2. Deterministic.
  FitReport fit(const std::vector<KeypointTrack>& detections, const CameraTrack& cameras,
                const PersonStates* hints = nullptr) const;

 private:
  StageReport run_stage(StageKind kind, const StageWeights& w, PersonStates& states, CameraTrack& cameras,
                        const std::vector<KeypointTrack>& detections) const;
  ObjectiveContext context(const CameraTrack& cameras, const std::vector<KeypointTrack>& detections) const;

  const BodyModel& model_;
  const JointMap& joint_map_;
  FitConfig config_;
};

}  // namespace aionfit
