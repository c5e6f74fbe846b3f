#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

namespace aionfit {

using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2>;

/// Reference height H* and predicted height H of one subject, in meters.
struct HeightPair {
  double reference = 0.0;
  double predicted = 0.0;
};

/// Mean per-joint position error after subtracting each skeleton's root
/// (row 0). Units follow the inputs (millimeters by convention).
double mpjpe(const Points3& pred, const Points3& ref);

/// MPJPE after a similarity Procrustes alignment of pred onto ref.
double pa_mpjpe(const Points3& pred, const Points3& ref);

/// Fraction of keypoints within threshold_fraction times the longest side of
/// the reference bounding box. Throws DomainError for a zero-size box.
double pck(const Points2& pred, const Points2& ref, double threshold_fraction);

/// Signed mean of H* - H.
double ahd(const std::vector<HeightPair>& pairs);

/// (100 / N) * sum (H* - H) / H*, in percent. Negative means the heights
/// are over-predicted on average.
double aphd(const std::vector<HeightPair>& pairs);

/// |theta - theta*|^2 + |beta - beta*|^2
double param_l2(const Eigen::VectorXd& pose, const Eigen::VectorXd& beta, const Eigen::VectorXd& ref_pose,
                const Eigen::VectorXd& ref_beta);

/// Elementwise L1 distance between 3D keypoint sets.
double kp_l1_3d(const Points3& pred, const Points3& ref);

/// Elementwise L1 distance between projected and reference 2D keypoints.
/// When visible is non-empty only keypoints with visible[i] != 0 count.
double kp_l1_2d(const Points2& projected, const Points2& ref, const Eigen::VectorXi& visible = {});

}  // namespace aionfit
