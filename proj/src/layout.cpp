#include "aionfit/layout.hpp"

#include <algorithm>
#include <cmath>

#include "aionfit/errors.hpp"

namespace aionfit {

namespace {

bool block_free(StageKind stage, ParamBlock block, bool camera_free) {
  switch (block) {
    case ParamBlock::GlobalOrient:
    case ParamBlock::Translation:
      return true;
    case ParamBlock::Beta:
    case ParamBlock::Alpha:
    case ParamBlock::BodyPose:
      return stage == StageKind::Full;
    case ParamBlock::CameraScale:
      return stage == StageKind::Full && camera_free;
  }
  return false;
}

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }

}  // namespace

FreeParameterLayout::FreeParameterLayout(const PersonStates& states, StageKind stage, bool camera_scale_free,
                                         double alpha_margin)
    : stage_(stage), camera_free_(camera_scale_free), alpha_margin_(alpha_margin) {
  if (!(alpha_margin >= 0.0 && alpha_margin < 0.5)) throw ConfigError("alpha margin must lie in [0, 0.5)");
  auto add = [&](int track, int frame, ParamBlock block, int size) {
    LayoutEntry e{track, frame, block, block_free(stage, block, camera_scale_free), -1, size};
    if (e.free) {
      e.offset = size_;
      size_ += size;
    }
    entries_.push_back(e);
  };
  for (int i = 0; i < static_cast<int>(states.size()); ++i) {
    add(i, -1, ParamBlock::Beta, kNumBetas);
    add(i, -1, ParamBlock::Alpha, 1);
    for (int t = 0; t < static_cast<int>(states[i].frames.size()); ++t) {
      add(i, t, ParamBlock::GlobalOrient, 3);
      add(i, t, ParamBlock::BodyPose, 3 * static_cast<int>(states[i].frames[t].pose.body_pose.rows()));
      add(i, t, ParamBlock::Translation, 3);
    }
  }
  add(-1, -1, ParamBlock::CameraScale, 1);
}

bool FreeParameterLayout::is_free(ParamBlock block) const { return block_free(stage_, block, camera_free_); }

Eigen::VectorXd FreeParameterLayout::flatten(const PersonStates& states, double camera_scale) const {
  Eigen::VectorXd x(size_);
  for (const auto& e : entries_) {
    if (!e.free) continue;
    if (e.track >= static_cast<int>(states.size()) ||
        (e.frame >= 0 && e.frame >= static_cast<int>(states[e.track].frames.size()))) {
      throw InputError("states do not match the parameter layout");
    }
    switch (e.block) {
      case ParamBlock::Beta:
        x.segment<kNumBetas>(e.offset) = states[e.track].shape.beta;
        break;
      case ParamBlock::Alpha: {
        const double a = std::clamp(states[e.track].shape.alpha, alpha_margin_, 1.0 - alpha_margin_);
        x[e.offset] = std::log(a / (1.0 - a));
        break;
      }
      case ParamBlock::GlobalOrient:
        x.segment<3>(e.offset) = states[e.track].frames[e.frame].pose.global_orient;
        break;
      case ParamBlock::BodyPose: {
        const auto& bp = states[e.track].frames[e.frame].pose.body_pose;
        if (3 * bp.rows() != e.size) throw InputError("states do not match the parameter layout");
        for (Eigen::Index k = 0; k < bp.rows(); ++k) x.segment<3>(e.offset + 3 * k) = bp.row(k).transpose();
        break;
      }
      case ParamBlock::Translation:
        x.segment<3>(e.offset) = states[e.track].frames[e.frame].translation;
        break;
      case ParamBlock::CameraScale:
        if (!(camera_scale > 0.0)) throw DomainError("camera scale must be positive");
        x[e.offset] = std::log(camera_scale);
        break;
    }
  }
  return x;
}

void FreeParameterLayout::unflatten(const Eigen::VectorXd& x, PersonStates& states, double& camera_scale) const {
  if (x.size() != size_) throw InputError("flat vector size does not match the parameter layout");
  for (const auto& e : entries_) {
    if (!e.free) continue;
    switch (e.block) {
      case ParamBlock::Beta:
        states[e.track].shape.beta = x.segment<kNumBetas>(e.offset);
        break;
      case ParamBlock::Alpha:
        states[e.track].shape.alpha = sigmoid(x[e.offset]);
        break;
      case ParamBlock::GlobalOrient:
        states[e.track].frames[e.frame].pose.global_orient = x.segment<3>(e.offset);
        break;
      case ParamBlock::BodyPose: {
        auto& bp = states[e.track].frames[e.frame].pose.body_pose;
        for (Eigen::Index k = 0; k < bp.rows(); ++k) bp.row(k) = x.segment<3>(e.offset + 3 * k).transpose();
        break;
      }
      case ParamBlock::Translation:
        states[e.track].frames[e.frame].translation = x.segment<3>(e.offset);
        break;
      case ParamBlock::CameraScale:
        camera_scale = std::exp(x[e.offset]);
        break;
    }
  }
}

Eigen::VectorXd FreeParameterLayout::flatten_gradient(const StateGradient& g, const PersonStates& states,
                                                      double camera_scale) const {
  Eigen::VectorXd out(size_);
  for (const auto& e : entries_) {
    if (!e.free) continue;
    switch (e.block) {
      case ParamBlock::Beta:
        out.segment<kNumBetas>(e.offset) = g.persons[e.track].d_beta;
        break;
      case ParamBlock::Alpha: {
        const double a = states[e.track].shape.alpha;
        out[e.offset] = g.persons[e.track].d_alpha * a * (1.0 - a);
        break;
      }
      case ParamBlock::GlobalOrient:
        out.segment<3>(e.offset) = g.persons[e.track].frames[e.frame].d_global_orient;
        break;
      case ParamBlock::BodyPose: {
        const auto& d = g.persons[e.track].frames[e.frame].d_body_pose;
        for (Eigen::Index k = 0; k < d.rows(); ++k) out.segment<3>(e.offset + 3 * k) = d.row(k).transpose();
        break;
      }
      case ParamBlock::Translation:
        out.segment<3>(e.offset) = g.persons[e.track].frames[e.frame].d_translation;
        break;
      case ParamBlock::CameraScale:
        out[e.offset] = g.d_camera_scale * camera_scale;
        break;
    }
  }
  return out;
}

}  // namespace aionfit
