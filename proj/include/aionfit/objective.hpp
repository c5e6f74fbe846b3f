#pragma once

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "aionfit/body_model.hpp"
#include "aionfit/camera.hpp"
#include "aionfit/keypoints.hpp"
#include "aionfit/layout.hpp"
#include "aionfit/state.hpp"

namespace aionfit {

/// Detections with confidence below this contribute nothing to the data term.
inline constexpr double kDefaultConfidenceFloor = 0.05;

struct RobustLossConfig {
  double sigma = 100.0;  // pixels

  void validate() const;
};

struct StageWeights {
  double lambda_data = 0.0;
  double lambda_smooth = 0.0;
  double lambda_pose = 0.0;
  double lambda_beta = 0.0;
  int iterations = 1;

  void validate() const;
};

/// Maps a body pose to a latent code; the pose energy is then the squared
/// latent norm. Implementations must be thread-safe.
class PoseEncoder {
 public:
  virtual ~PoseEncoder() = default;
  virtual int latent_dim() const = 0;
  virtual Eigen::VectorXd encode(const Eigen::Matrix<double, Eigen::Dynamic, 3>& body_pose) const = 0;
  /// Vector-Jacobian product: d_latent^T * d(encode)/d(body_pose).
  virtual Eigen::Matrix<double, Eigen::Dynamic, 3> encode_vjp(
      const Eigen::Matrix<double, Eigen::Dynamic, 3>& body_pose, const Eigen::VectorXd& d_latent) const = 0;
};

struct PosePrior {
  enum class Kind { GaussianParameterSpace, ExternalLatent };

  Kind kind = Kind::GaussianParameterSpace;
  int latent_dim = 0;
  std::shared_ptr<const PoseEncoder> encoder;

  static PosePrior gaussian() { return {}; }
  /// 32-dimensional latent prior; the encoder may be attached later.
  static PosePrior external_latent(std::shared_ptr<const PoseEncoder> encoder = nullptr);
  /// Throws ConfigError when an external-latent prior has no encoder.
  void validate() const;
};

/// Everything the energy needs besides the person states. The camera scale
/// used by the data term is cameras.scale.
struct ObjectiveContext {
  const BodyModel& model;
  const CameraTrack& cameras;
  const std::vector<KeypointTrack>& detections;
  const JointMap& joint_map;
  RobustLossConfig robust{};
  double confidence_floor = kDefaultConfidenceFloor;
  PosePrior prior{};
};

/// Throws InputError unless states, detections and cameras line up.
void check_inputs(const PersonStates& states, const ObjectiveContext& ctx);

/// |r|^2 / (sigma^2 + |r|^2)
double geman_mcclure(const Eigen::Vector2d& r, const RobustLossConfig& cfg);

double e_data(const PersonStates& states, const ObjectiveContext& ctx);

/// Sum over tracks and consecutive frame pairs of |J_t - J_{t+1}|^2.
double e_smooth(const std::vector<std::vector<Vertices>>& joint_sequences);

double e_pose(const PersonStates& states, const PosePrior& prior);

/// Squared norm of the 10 shape coefficients per track; alpha is not penalized.
double e_beta(const PersonStates& states);

/// World joints of every track and frame.
std::vector<std::vector<Vertices>> track_world_joints(const PersonStates& states, const BodyModel& model);

/// Weighted sum of the four energies; zero-weight terms are skipped.
double total_objective(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w);

struct Evaluation {
  double value = 0.0;
  StateGradient gradient;
};

/// Objective value and its exact gradient in natural parameters.
Evaluation evaluate(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w);

/// Gradient w.r.t. the layout's flat free-parameter vector. Throws
/// NumericalError naming the first non-finite component.
Eigen::VectorXd gradient(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w,
                         const FreeParameterLayout& layout);

/// Per track, per frame mean pixel distance between projected model joints
/// and usable detections; NaN for frames without usable detections.
std::vector<std::vector<double>> reprojection_residuals(const PersonStates& states, const ObjectiveContext& ctx);

/// Mean of all finite entries of reprojection_residuals.
double mean_reprojection_residual(const std::vector<std::vector<double>>& residuals);

}  // namespace aionfit
