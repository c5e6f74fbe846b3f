#include "aionfit/body_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aionfit/errors.hpp"
#include "aionfit/rotation.hpp"

namespace aionfit {

namespace {

constexpr double kRowSumTolerance = 1e-6;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ModelError(msg);
}

std::vector<int> topological_order_of(const std::vector<int>& parents) {
  const int n = static_cast<int>(parents.size());
  std::vector<std::vector<int>> children(n);
  for (int k = 1; k < n; ++k) {
    const int p = parents[k];
    require(p >= 0 && p < n && p != k, "joint " + std::to_string(k) + " has invalid parent");
    children[p].push_back(k);
  }
  std::vector<int> order;
  order.reserve(n);
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const int k = stack.back();
    stack.pop_back();
    order.push_back(k);
    for (auto it = children[k].rbegin(); it != children[k].rend(); ++it) stack.push_back(*it);
  }
  require(static_cast<int>(order.size()) == n, "kinematic tree is not connected to the root");
  return order;
}

Vertices unflatten_rows(const Eigen::VectorXd& flat) {
  Vertices out(flat.size() / 3, 3);
  for (Eigen::Index v = 0; v < out.rows(); ++v) out.row(v) = flat.segment<3>(3 * v).transpose();
  return out;
}

}  // namespace

PoseParams PoseParams::zero(int joint_count) {
  PoseParams p;
  p.body_pose = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(joint_count, 3);
  return p;
}

BodyModel::BodyModel(BodyModelData data) : data_(std::move(data)) {
  const Eigen::Index v = data_.adult_template.rows();
  require(v > 0, "model has no vertices");
  require(data_.child_template.rows() == v, "adult and child templates differ in vertex count");
  require(!data_.parents.empty() && data_.parents[0] == -1, "parents[0] must be the root sentinel -1");
  const Eigen::Index nj = static_cast<Eigen::Index>(data_.parents.size());
  require(nj >= 2, "model needs at least one articulated joint");
  const Eigen::Index k = nj - 1;

  require(data_.shape_blendshapes.rows() == 3 * v && data_.shape_blendshapes.cols() == kNumBetas,
          "shape blendshapes must be 3V x 10");
  if (data_.pose_blendshapes.size() > 0) {
    require(data_.pose_blendshapes.rows() == 3 * v && data_.pose_blendshapes.cols() == 9 * k,
            "pose blendshapes must be 3V x 9K");
  }
  require(data_.joint_regressor.rows() == nj && data_.joint_regressor.cols() == v,
          "joint regressor must be (K+1) x V");
  require(data_.skinning_weights.rows() == v && data_.skinning_weights.cols() == nj,
          "skinning weights must be V x (K+1)");
  require((data_.joint_regressor.array() >= 0.0).all(), "joint regressor has negative entries");
  require((data_.skinning_weights.array() >= 0.0).all(), "skinning weights have negative entries");
  for (Eigen::Index r = 0; r < nj; ++r) {
    require(std::abs(data_.joint_regressor.row(r).sum() - 1.0) <= kRowSumTolerance,
            "joint regressor row " + std::to_string(r) + " does not sum to 1");
  }
  for (Eigen::Index r = 0; r < v; ++r) {
    require(std::abs(data_.skinning_weights.row(r).sum() - 1.0) <= kRowSumTolerance,
            "skinning weight row " + std::to_string(r) + " does not sum to 1");
  }
  require(data_.adult_template.allFinite() && data_.child_template.allFinite() &&
              data_.shape_blendshapes.allFinite() && data_.pose_blendshapes.allFinite(),
          "model arrays contain non-finite values");
  for (const auto& f : data_.faces) {
    for (int idx : f) require(idx >= 0 && idx < v, "face index out of range");
  }
  if (data_.joint_names.empty()) {
    for (Eigen::Index j = 0; j < nj; ++j) data_.joint_names.push_back("joint_" + std::to_string(j));
  }
  require(static_cast<Eigen::Index>(data_.joint_names.size()) == nj, "joint name count must be K+1");

  order_ = topological_order_of(data_.parents);

  joint_base_ = data_.joint_regressor * data_.adult_template;
  joint_delta_ = data_.joint_regressor * (data_.child_template - data_.adult_template);
  for (int b = 0; b < kNumBetas; ++b) {
    joint_shape_dirs_[b] = data_.joint_regressor * unflatten_rows(data_.shape_blendshapes.col(b));
  }
}

int BodyModel::joint_index(const std::string& name) const {
  const auto it = std::find(data_.joint_names.begin(), data_.joint_names.end(), name);
  return it == data_.joint_names.end() ? -1 : static_cast<int>(it - data_.joint_names.begin());
}

Vertices BodyModel::rest_joints(const ShapeParams& shape) const {
  Vertices j = joint_base_ + shape.alpha * joint_delta_;
  for (int b = 0; b < kNumBetas; ++b) j += shape.beta[b] * joint_shape_dirs_[b];
  return j;
}

JointChain BodyModel::joint_chain(const ShapeParams& shape, const PoseParams& pose) const {
  if (pose.body_pose.rows() != joint_count()) {
    throw ModelError("body pose has " + std::to_string(pose.body_pose.rows()) + " joints, model has " +
                     std::to_string(joint_count()));
  }
  const int nj = joint_count() + 1;
  JointChain c;
  c.rest_joints = rest_joints(shape);
  c.local.resize(nj);
  c.global.resize(nj);
  c.posed_joints.resize(nj, 3);

  c.local[0] = axis_angle_to_rotation(pose.global_orient);
  c.global[0] = c.local[0];
  c.posed_joints.row(0) = (c.global[0] * c.rest_joints.row(0).transpose()).transpose();
  for (int idx = 1; idx < nj; ++idx) {
    const int k = order_[idx];
    const int p = data_.parents[k];
    c.local[k] = axis_angle_to_rotation(pose.body_pose.row(k - 1).transpose());
    c.global[k] = c.global[p] * c.local[k];
    const Eigen::Vector3d bone = (c.rest_joints.row(k) - c.rest_joints.row(p)).transpose();
    c.posed_joints.row(k) = c.posed_joints.row(p) + (c.global[p] * bone).transpose();
  }
  return c;
}

JointGradient BodyModel::joints_vjp(const JointChain& chain, const PoseParams& pose,
                                    const Vertices& d_joints) const {
  const int nj = joint_count() + 1;
  Vertices gp = d_joints;
  Vertices gj = Vertices::Zero(nj, 3);
  std::vector<Eigen::Matrix3d> grot(nj, Eigen::Matrix3d::Zero());

  JointGradient out;
  out.d_body_pose = Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(joint_count(), 3);

  for (int idx = nj - 1; idx >= 1; --idx) {
    const int k = order_[idx];
    const int p = data_.parents[k];
    const Eigen::Vector3d g = gp.row(k).transpose();
    const Eigen::Vector3d bone = (chain.rest_joints.row(k) - chain.rest_joints.row(p)).transpose();

    gp.row(p) += g.transpose();
    grot[p] += g * bone.transpose();
    const Eigen::Vector3d gbone = chain.global[p].transpose() * g;
    gj.row(k) += gbone.transpose();
    gj.row(p) -= gbone.transpose();

    // global[k] = global[p] * local[k]
    grot[p] += grot[k] * chain.local[k].transpose();
    const Eigen::Matrix3d glocal = chain.global[p].transpose() * grot[k];
    const auto dr = rotation_jacobian(pose.body_pose.row(k - 1).transpose());
    for (int i = 0; i < 3; ++i) out.d_body_pose(k - 1, i) = glocal.cwiseProduct(dr[i]).sum();
  }

  const Eigen::Vector3d g0 = gp.row(0).transpose();
  grot[0] += g0 * chain.rest_joints.row(0);
  gj.row(0) += (chain.global[0].transpose() * g0).transpose();
  const auto dr0 = rotation_jacobian(pose.global_orient);
  for (int i = 0; i < 3; ++i) out.d_global_orient[i] = grot[0].cwiseProduct(dr0[i]).sum();

  out.d_alpha = gj.cwiseProduct(joint_delta_).sum();
  for (int b = 0; b < kNumBetas; ++b) out.d_beta[b] = gj.cwiseProduct(joint_shape_dirs_[b]).sum();
  return out;
}

Vertices interpolate_template(const BodyModel& model, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("template interpolation weight must lie in [0,1], got " + std::to_string(alpha));
  }
  return alpha * model.data().child_template + (1.0 - alpha) * model.data().adult_template;
}

Vertices shape_offset(const BodyModel& model, const Betas& beta) {
  if (!beta.allFinite()) throw DomainError("shape coefficients must be finite");
  return unflatten_rows(model.data().shape_blendshapes * beta);
}

MeshResult forward(const BodyModel& model, const ShapeParams& shape, const PoseParams& pose) {
  if (!pose.global_orient.allFinite() || !pose.body_pose.allFinite()) {
    throw DomainError("pose parameters must be finite");
  }
  const auto& d = model.data();
  const JointChain chain = model.joint_chain(shape, pose);
  const int nj = model.joint_count() + 1;

  Vertices rest = interpolate_template(model, shape.alpha) + shape_offset(model, shape.beta);
  if (model.has_pose_blendshapes()) {
    Eigen::VectorXd features(9 * model.joint_count());
    for (int k = 1; k < nj; ++k) {
      const Eigen::Matrix3d f = chain.local[k] - Eigen::Matrix3d::Identity();
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) features[9 * (k - 1) + 3 * r + c] = f(r, c);
    }
    rest += unflatten_rows(d.pose_blendshapes * features);
  }

  // Per-joint skinning transforms x -> R_k x + t_k.
  std::vector<Eigen::Vector3d> offsets(nj);
  for (int k = 0; k < nj; ++k) {
    offsets[k] = chain.posed_joints.row(k).transpose() - chain.global[k] * chain.rest_joints.row(k).transpose();
  }

  MeshResult out;
  out.vertices.resize(rest.rows(), 3);
  for (Eigen::Index v = 0; v < rest.rows(); ++v) {
    Eigen::Matrix3d r = Eigen::Matrix3d::Zero();
    Eigen::Vector3d t = Eigen::Vector3d::Zero();
    for (int k = 0; k < nj; ++k) {
      const double w = d.skinning_weights(v, k);
      if (w == 0.0) continue;
      r += w * chain.global[k];
      t += w * offsets[k];
    }
    out.vertices.row(v) = (r * rest.row(v).transpose() + t).transpose();
  }
  out.joints = chain.posed_joints;
  return out;
}

Vertices world_joints(const Vertices& joints, const Eigen::Vector3d& gamma) {
  return joints.rowwise() + gamma.transpose();
}

Vertices world_joints(const MeshResult& mesh, const Eigen::Vector3d& gamma) {
  return world_joints(mesh.joints, gamma);
}

double neutral_height(const BodyModel& model, const ShapeParams& shape) {
  const Vertices rest = interpolate_template(model, shape.alpha) + shape_offset(model, shape.beta);
  const int axis = static_cast<int>(model.data().up_axis);
  return rest.col(axis).maxCoeff() - rest.col(axis).minCoeff();
}

}  // namespace aionfit
