#pragma once

#include <array>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace aionfit {

inline constexpr int kNumBetas = 10;

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Betas = Eigen::Matrix<double, kNumBetas, 1>;

enum class UpAxis { X = 0, Y = 1, Z = 2 };

/// Raw arrays of an age-interpolated body model. Validated and frozen by
/// BodyModel; joint 0 is the root whose rotation is the global orientation.
struct BodyModelData {
  Vertices adult_template;                 // V x 3, meters
  Vertices child_template;                 // V x 3, meters
  Eigen::MatrixXd shape_blendshapes;       // 3V x 10, row 3*v + axis
  Eigen::MatrixXd pose_blendshapes;        // 3V x 9K, empty when absent
  Eigen::MatrixXd joint_regressor;         // (K+1) x V
  Eigen::MatrixXd skinning_weights;        // V x (K+1)
  std::vector<int> parents;                // K+1, parents[0] == -1
  std::vector<std::array<int, 3>> faces;
  std::vector<std::string> joint_names;    // K+1
  UpAxis up_axis = UpAxis::Y;
};

struct ShapeParams {
  Betas beta = Betas::Zero();
  /// Template interpolation weight: 0 = adult, 1 = child.
  double alpha = 0.0;
};

struct PoseParams {
  Eigen::Vector3d global_orient = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, Eigen::Dynamic, 3> body_pose;  // K x 3 axis-angle

  static PoseParams zero(int joint_count);
};

/// Body-local output of the mesh function, before root translation.
struct MeshResult {
  Vertices vertices;
  Vertices joints;  // K+1 rows
};

/// Intermediate quantities of the kinematic chain, kept for back-propagation.
struct JointChain {
  Vertices rest_joints;                  // K+1 x 3
  std::vector<Eigen::Matrix3d> local;    // R(theta_k), local[0] = R(global_orient)
  std::vector<Eigen::Matrix3d> global;   // accumulated rotations
  Vertices posed_joints;                 // K+1 x 3
};

/// Gradient of a scalar w.r.t. every input of posed_joints().
struct JointGradient {
  Betas d_beta = Betas::Zero();
  double d_alpha = 0.0;
  Eigen::Vector3d d_global_orient = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, Eigen::Dynamic, 3> d_body_pose;
};

/// Immutable, validated body model. Safe to share across threads.
class BodyModel {
 public:
  explicit BodyModel(BodyModelData data);

  const BodyModelData& data() const { return data_; }
  int vertex_count() const { return static_cast<int>(data_.adult_template.rows()); }
  /// Number of articulated joints, excluding the root.
  int joint_count() const { return static_cast<int>(data_.parents.size()) - 1; }
  bool has_pose_blendshapes() const { return data_.pose_blendshapes.size() > 0; }
  /// Joint indices ordered so that every parent precedes its children.
  const std::vector<int>& topological_order() const { return order_; }
  int joint_index(const std::string& name) const;

  /// Rest joints for (alpha, beta); linear in both.
  Vertices rest_joints(const ShapeParams& shape) const;

  JointChain joint_chain(const ShapeParams& shape, const PoseParams& pose) const;

  /// Back-propagates dE/d(posed joints) through the chain.
  JointGradient joints_vjp(const JointChain& chain, const PoseParams& pose,
                           const Vertices& d_joints) const;

 private:
  BodyModelData data_;
  std::vector<int> order_;
  // Regressed joint bases: rest joints = base + alpha * delta + sum_k beta_k * shape_dirs[k].
  Vertices joint_base_;
  Vertices joint_delta_;
  std::array<Vertices, kNumBetas> joint_shape_dirs_;
};

/// alpha * T_C + (1 - alpha) * T_A. Throws DomainError outside [0,1].
Vertices interpolate_template(const BodyModel& model, double alpha);

/// Sum_k beta[k] * S[:,:,k].
Vertices shape_offset(const BodyModel& model, const Betas& beta);

/// Full mesh function: template interpolation, blendshapes, forward
/// kinematics and linear blend skinning.
MeshResult forward(const BodyModel& model, const ShapeParams& shape, const PoseParams& pose);

/// Joints shifted by the root translation.
Vertices world_joints(const MeshResult& mesh, const Eigen::Vector3d& gamma);
Vertices world_joints(const Vertices& joints, const Eigen::Vector3d& gamma);

/// Extent along the model's up axis of the zero-pose mesh.
double neutral_height(const BodyModel& model, const ShapeParams& shape);

}  // namespace aionfit
