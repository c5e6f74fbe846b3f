#pragma once

#include <vector>

#include <Eigen/Core>

#include "aionfit/state.hpp"

namespace aionfit {

enum class ParamBlock { Beta, Alpha, GlobalOrient, BodyPose, Translation, CameraScale };

enum class StageKind {
  RootOnly,  // global orientation and root translation
  Full,      // every person parameter, plus camera scale when observable
};

struct LayoutEntry {
  int track = -1;  // -1 for the shared camera scale
  int frame = -1;  // -1 for per-track blocks
  ParamBlock block = ParamBlock::Beta;
  bool free = false;
  int offset = -1;  // into the flat vector, -1 when frozen
  int size = 0;
};

/// Default distance kept from the endpoints of [0,1] when alpha enters the
/// logit space; see FreeParameterLayout.
inline constexpr double kDefaultAlphaMargin = 0.02;

/// Maps person states (plus the shared camera scale) to a flat vector of free
/// parameters. Order: per track {beta, alpha, per frame {orient, pose,
/// translation}}, then camera scale.
///
/// alpha is optimized as u with alpha = sigmoid(u), and the camera scale as v
/// with scale = exp(v). Entering logit space clamps alpha into
/// [margin, 1 - margin]; every other block round-trips bit-exactly.
class FreeParameterLayout {
 public:
  FreeParameterLayout(const PersonStates& states, StageKind stage, bool camera_scale_free,
                      double alpha_margin = kDefaultAlphaMargin);

  int size() const { return size_; }
  StageKind stage() const { return stage_; }
  const std::vector<LayoutEntry>& entries() const { return entries_; }
  bool is_free(ParamBlock block) const;

  Eigen::VectorXd flatten(const PersonStates& states, double camera_scale) const;
  /// Writes the free entries of x into states / camera_scale; frozen entries are untouched.
  void unflatten(const Eigen::VectorXd& x, PersonStates& states, double& camera_scale) const;
  /// Chain rule from natural-parameter gradients to the flat free vector,
  /// evaluated at the given (already unflattened) states.
  Eigen::VectorXd flatten_gradient(const StateGradient& g, const PersonStates& states, double camera_scale) const;

 private:
  std::vector<LayoutEntry> entries_;
  StageKind stage_;
  bool camera_free_;
  double alpha_margin_;
  int size_ = 0;
};

}  // namespace aionfit
