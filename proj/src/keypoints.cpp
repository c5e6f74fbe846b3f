#include "aionfit/keypoints.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "aionfit/body_model.hpp"
#include "aionfit/errors.hpp"

namespace aionfit {

namespace {

KeypointConvention coco17() {
  return {"coco17",
          {"nose", "left_eye", "right_eye", "left_ear", "right_ear", "left_shoulder", "right_shoulder",
           "left_elbow", "right_elbow", "left_wrist", "right_wrist", "left_hip", "right_hip", "left_knee",
           "right_knee", "left_ankle", "right_ankle"},
          {0, 1, 2, 3, 4}};
}

struct Registry {
  std::mutex mutex;
  std::map<std::string, KeypointConvention> conventions{{"coco17", coco17()}};
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

int KeypointConvention::index_of(const std::string& keypoint) const {
  const auto it = std::find(keypoints.begin(), keypoints.end(), keypoint);
  return it == keypoints.end() ? -1 : static_cast<int>(it - keypoints.begin());
}

KeypointConvention keypoint_convention(const std::string& name) {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  const auto it = r.conventions.find(name);
  if (it == r.conventions.end()) throw InputError("unknown keypoint convention '" + name + "'");
  return it->second;
}

void register_keypoint_convention(KeypointConvention convention) {
  for (int f : convention.facial) {
    if (f < 0 || f >= convention.size()) throw ConfigError("facial keypoint index out of range");
  }
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  r.conventions.insert_or_assign(convention.name, std::move(convention));
}

std::vector<std::string> registered_conventions() {
  auto& r = registry();
  std::lock_guard lock(r.mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : r.conventions) names.push_back(name);
  return names;
}

void JointMap::validate(int model_joints, int keypoints) const {
  std::set<int> used;
  for (const auto& [j, k] : pairs) {
    if (j < 0 || j >= model_joints) throw InputError("joint map: model joint " + std::to_string(j) + " out of range");
    if (k < 0 || k >= keypoints) throw InputError("joint map: keypoint " + std::to_string(k) + " out of range");
    if (!used.insert(k).second) throw InputError("joint map: keypoint " + std::to_string(k) + " mapped twice");
  }
}

JointMap resolve_joint_map(const NamedJointMap& named, const BodyModel& model) {
  const auto conv = keypoint_convention(named.convention);
  JointMap map;
  for (const auto& [joint, kp] : named.pairs) {
    const int j = model.joint_index(joint);
    if (j < 0) throw InputError("joint map: model has no joint named '" + joint + "'");
    const int k = conv.index_of(kp);
    if (k < 0) throw InputError("joint map: convention " + conv.name + " has no keypoint '" + kp + "'");
    map.pairs.emplace_back(j, k);
  }
  map.validate(model.joint_count() + 1, conv.size());
  return map;
}

NamedJointMap joint_map_by_name(const BodyModel& model, const std::string& convention) {
  const auto conv = keypoint_convention(convention);
  NamedJointMap named{convention, {}};
  for (const auto& kp : conv.keypoints) {
    if (model.joint_index(kp) >= 0) named.pairs.emplace_back(kp, kp);
  }
  return named;
}

}  // namespace aionfit
