#include "aionfit/metrics.hpp"

#include <string>

#include <Eigen/Geometry>

#include "aionfit/errors.hpp"

namespace aionfit {

namespace {

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InputError(std::string(what) + ": dimension mismatch (" + std::to_string(a.rows()) + " vs " +
                     std::to_string(b.rows()) + " rows)");
  }
}

}  // namespace

double mpjpe(const Points3& pred, const Points3& ref) {
  require_same_shape(pred, ref, "mpjpe");
  if (pred.rows() == 0) throw InputError("mpjpe: no joints");
  const Points3 p = pred.rowwise() - pred.row(0);
  const Points3 r = ref.rowwise() - ref.row(0);
  return (p - r).rowwise().norm().mean();
}

double pa_mpjpe(const Points3& pred, const Points3& ref) {
  require_same_shape(pred, ref, "pa_mpjpe");
  if (pred.rows() < 3) throw InputError("pa_mpjpe: need at least three joints");
  const Eigen::Matrix3Xd src = pred.transpose();
  const Eigen::Matrix3Xd dst = ref.transpose();
  const Eigen::Matrix4d t = Eigen::umeyama(src, dst, true);
  const Eigen::Matrix3Xd aligned = (t.topLeftCorner<3, 3>() * src).colwise() + t.topRightCorner<3, 1>();
  return (aligned - dst).colwise().norm().mean();
}

double pck(const Points2& pred, const Points2& ref, double threshold_fraction) {
  require_same_shape(pred, ref, "pck");
  if (!(threshold_fraction > 0.0)) throw DomainError("pck: threshold fraction must be positive");
  if (ref.rows() == 0) throw InputError("pck: no keypoints");
  const Eigen::RowVector2d extent = ref.colwise().maxCoeff() - ref.colwise().minCoeff();
  const double norm = extent.maxCoeff();
  if (!(norm > 0.0)) throw DomainError("pck: reference bounding box has zero size");
  const double limit = threshold_fraction * norm;
  const auto err = (pred - ref).rowwise().norm();
  return static_cast<double>((err.array() <= limit).count()) / static_cast<double>(ref.rows());
}

double ahd(const std::vector<HeightPair>& pairs) {
  if (pairs.empty()) throw InputError("ahd: no subjects");
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.reference - p.predicted;
  return sum / static_cast<double>(pairs.size());
}

double aphd(const std::vector<HeightPair>& pairs) {
  if (pairs.empty()) throw InputError("aphd: no subjects");
  double sum = 0.0;
  for (const auto& p : pairs) {
    if (!(p.reference > 0.0)) throw DomainError("aphd: reference heights must be positive");
    sum += (p.reference - p.predicted) / p.reference;
  }
  return 100.0 * sum / static_cast<double>(pairs.size());
}

double param_l2(const Eigen::VectorXd& pose, const Eigen::VectorXd& beta, const Eigen::VectorXd& ref_pose,
                const Eigen::VectorXd& ref_beta) {
  require_same_shape(pose, ref_pose, "param_l2 pose");
  require_same_shape(beta, ref_beta, "param_l2 shape");
  return (pose - ref_pose).squaredNorm() + (beta - ref_beta).squaredNorm();
}

double kp_l1_3d(const Points3& pred, const Points3& ref) {
  require_same_shape(pred, ref, "kp_l1_3d");
  return (pred - ref).cwiseAbs().sum();
}

double kp_l1_2d(const Points2& projected, const Points2& ref, const Eigen::VectorXi& visible) {
  require_same_shape(projected, ref, "kp_l1_2d");
  if (visible.size() == 0) return (projected - ref).cwiseAbs().sum();
  if (visible.size() != ref.rows()) throw InputError("kp_l1_2d: visibility mask size mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < ref.rows(); ++i) {
    if (visible[i] != 0) sum += (projected.row(i) - ref.row(i)).cwiseAbs().sum();
  }
  return sum;
}

}  // namespace aionfit
