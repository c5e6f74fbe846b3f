#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "aionfit/body_model.hpp"
#include "aionfit/camera.hpp"
#include "aionfit/io.hpp"
#include "aionfit/keypoints.hpp"
#include "aionfit/state.hpp"

namespace aionfit::test {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi);

/// Random valid model: a random tree over `joints` joints (root included),
/// nonnegative normalized regressor and skinning rows.
BodyModelData random_model(Rng& rng, int vertices, int joints, bool pose_blendshapes = true);

PoseParams random_pose(Rng& rng, int joint_count, double scale);
ShapeParams random_shape(Rng& rng, double beta_scale);

/// Independent per-vertex implementation of the mesh function using 4x4
/// homogeneous transforms and Eigen::AngleAxis rotations.
MeshResult naive_forward(const BodyModelData& d, const ShapeParams& shape, const PoseParams& pose);

/// A small multi-person fitting problem whose detections come from a random
/// state pushed through an independent projection, plus pixel noise.
struct ToyProblem {
  BodyModelData data;
  CameraTrack cameras;
  std::vector<KeypointTrack> detections;
  JointMap joint_map;
  PersonStates states;  // evaluation point, perturbed away from the generator
};

ToyProblem random_toy_problem(Rng& rng, int vertices, int joints, int frames, int persons);

}  // namespace aionfit::test

namespace aionfit::test {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

/// Runs the command line tool in-process; args exclude the program name.
CliRun run_tool(const std::vector<std::string>& args);

}  // namespace aionfit::test

namespace aionfit::test {

/// Signed zeros, subnormal-adjacent and large magnitudes mixed with ordinary values.
double awkward_double(Rng& rng);

DetectionFile random_detection_file(Rng& rng, int tracks, int frames);
CameraTrack random_camera_track(Rng& rng, int frames);
/// Every third frame residual is NaN.
ResultFile random_result_file(Rng& rng, int tracks, int frames, int joints);

}  // namespace aionfit::test
