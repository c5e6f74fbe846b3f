#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace aionfit {

class BodyModel;

/// Detections for one frame of one track.
struct KeypointFrame {
  int frame = 0;                                      // index into the camera track
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;    // J_kp x 2 pixels
  Eigen::VectorXd confidences;                        // J_kp, in [0,1]
};

struct KeypointTrack {
  int id = 0;
  std::vector<KeypointFrame> frames;
};

/// A named keypoint layout. Facial indices drive the face-confidence filter.
struct KeypointConvention {
  std::string name;
  std::vector<std::string> keypoints;
  std::vector<int> facial;

  int size() const { return static_cast<int>(keypoints.size()); }
  int index_of(const std::string& keypoint) const;
};

/// Registry of conventions; "coco17" is always present.
KeypointConvention keypoint_convention(const std::string& name);
void register_keypoint_convention(KeypointConvention convention);
std::vector<std::string> registered_conventions();

/// Model joint -> detection keypoint correspondences.
struct JointMap {
  std::vector<std::pair<int, int>> pairs;  // (model joint, keypoint)

  /// Throws InputError on out-of-range indices or a keypoint used twice.
  void validate(int model_joints, int keypoints) const;
};

/// Named form, as stored on disk.
struct NamedJointMap {
  std::string convention;
  std::vector<std::pair<std::string, std::string>> pairs;  // (model joint, keypoint)
};

JointMap resolve_joint_map(const NamedJointMap& named, const BodyModel& model);

/// Pairs every model joint whose name equals a keypoint name.
NamedJointMap joint_map_by_name(const BodyModel& model, const std::string& convention);

}  // namespace aionfit
