#pragma once

#include <string>
#include <vector>

#include "aionfit/body_model.hpp"
#include "aionfit/camera.hpp"
#include "aionfit/fitter.hpp"
#include "aionfit/keypoints.hpp"
#include "aionfit/state.hpp"

namespace aionfit {

inline constexpr const char* kModelSchema = "aionfit-model/1";
inline constexpr const char* kCamerasSchema = "aionfit-cameras/1";
inline constexpr const char* kJointMapSchema = "aionfit-jointmap/1";
inline constexpr const char* kConfigSchema = "aionfit-config/1";
inline constexpr const char* kResultsSchema = "aionfit-results/1";
inline constexpr const char* kDetectionsSchema = "aionfit-detections/1";

/// Environment variable consulted for the model path when none is given.
inline constexpr const char* kModelPathEnv = "AIONFIT_MODEL_PATH";

struct DetectionFile {
  std::string convention = "coco17";
  std::vector<KeypointTrack> tracks;

  /// Throws InputError for an unknown convention, wrong keypoint counts,
  /// confidences outside [0,1] or frame indices that do not strictly increase.
  void validate() const;
};

struct StageDiagnostics {
  std::vector<double> trace;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  bool line_search_failed = false;
  std::string message;
};

struct FitDiagnostics {
  StageDiagnostics stage1;
  StageDiagnostics stage2;
  /// Per track, per frame mean reprojection residual; NaN where undefined.
  std::vector<std::vector<double>> frame_residuals;
  std::vector<TrackDiagnostic> rejected;
};

struct ResultFile {
  std::string model_hash;
  PersonStates states;
  /// Camera frame index of every state frame, aligned with states.
  std::vector<std::vector<int>> frame_indices;
  double camera_scale = 1.0;
  FitDiagnostics diagnostics;

  int frame_count() const;
  /// Throws InputError when the states do not fit the model's dimensions.
  void validate(const BodyModel& model) const;
};

/// Packs a fit report together with the detection frame indices it was fit to.
ResultFile make_result_file(const FitReport& report, const std::vector<KeypointTrack>& detections,
                            const std::string& model_hash);

// Text (de)serialization. Parsing throws InputError with the offending record
// path; the save/load pairs add IoError for file failures.
std::string serialize_model(const BodyModelData& model);
BodyModelData parse_model(const std::string& text);
std::string serialize_cameras(const CameraTrack& cameras);
CameraTrack parse_cameras(const std::string& text);
std::string serialize_joint_map(const NamedJointMap& map);
NamedJointMap parse_joint_map(const std::string& text);
std::string serialize_config(const FitConfig& config);
FitConfig parse_config(const std::string& text);
std::string serialize_results(const ResultFile& results);
ResultFile parse_results(const std::string& text);
std::string serialize_detections(const DetectionFile& detections);
DetectionFile parse_detections(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

BodyModelData load_model(const std::string& path);
void save_model(const BodyModelData& model, const std::string& path);
CameraTrack load_cameras(const std::string& path);
void save_cameras(const CameraTrack& cameras, const std::string& path);
NamedJointMap load_joint_map(const std::string& path);
void save_joint_map(const NamedJointMap& map, const std::string& path);
FitConfig load_config(const std::string& path);
void save_config(const FitConfig& config, const std::string& path);
ResultFile load_results(const std::string& path);
void save_results(const ResultFile& results, const std::string& path);
DetectionFile load_detections(const std::string& path);
void save_detections(const DetectionFile& detections, const std::string& path);

/// Lowercase hex SHA-256 of the canonical model serialization.
std::string model_hash(const BodyModelData& model);

/// Explicit path if non-empty, else the environment variable, else empty.
std::string resolve_model_path(const std::string& explicit_path);

struct FaceFilterResult {
  DetectionFile detections;
  /// Ids of tracks left without frames.
  std::vector<int> emptied_tracks;
};

/// Drops frames whose mean facial-keypoint confidence is at or below floor.
/// Tracks are kept even when emptied. Throws ConfigError when the convention
/// declares no facial keypoints.
FaceFilterResult filter_by_face_confidence(const DetectionFile& detections, double floor = 0.7);

}  // namespace aionfit
