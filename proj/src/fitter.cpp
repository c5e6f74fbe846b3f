#include "aionfit/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Geometry>

#include "aionfit/errors.hpp"
#include "aionfit/rotation.hpp"

namespace aionfit {

void FitConfig::validate() const {
  stage1.validate();
  stage2.validate();
  lbfgs.validate();
  robust.validate();
  if (!(alpha_init >= 0.0 && alpha_init <= 1.0)) throw ConfigError("alpha_init must lie in [0,1]");
  if (!(camera_scale_init > 0.0) || !std::isfinite(camera_scale_init)) {
    throw ConfigError("camera_scale_init must be positive");
  }
  if (!(confidence_floor >= 0.0 && confidence_floor <= 1.0)) throw ConfigError("confidence floor must lie in [0,1]");
  if (!(alpha_margin >= 0.0 && alpha_margin < 0.5)) throw ConfigError("alpha margin must lie in [0, 0.5)");
  prior.validate();
}

GradientCheckResult check_gradient(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w,
                                   const FreeParameterLayout& layout) {
  GradientCheckResult out;
  const Eigen::VectorXd x0 = layout.flatten(states, ctx.cameras.scale);

  // Evaluate at the unflattened point so reparameterized blocks agree exactly.
  PersonStates work = states;
  CameraTrack cams = ctx.cameras;
  layout.unflatten(x0, work, cams.scale);
  auto eval = [&](const Eigen::VectorXd& x) {
    layout.unflatten(x, work, cams.scale);
    const ObjectiveContext c{ctx.model, cams, ctx.detections, ctx.joint_map, ctx.robust, ctx.confidence_floor,
                             ctx.prior};
    return total_objective(work, c, w);
  };
  {
    layout.unflatten(x0, work, cams.scale);
    const ObjectiveContext c{ctx.model, cams, ctx.detections, ctx.joint_map, ctx.robust, ctx.confidence_floor,
                             ctx.prior};
    out.analytic = gradient(work, c, w, layout);
  }
  out.numeric.resize(x0.size());
  Eigen::VectorXd x = x0;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x0[i]));
    x[i] = x0[i] + h;
    const double fp = eval(x);
    x[i] = x0[i] - h;
    const double fm = eval(x);
    x[i] = x0[i];
    out.numeric[i] = (fp - fm) / (2.0 * h);
  }
  const double scale = out.numeric.size() > 0 ? out.numeric.cwiseAbs().maxCoeff() : 0.0;
  const double floor = std::max(1e-6 * scale, std::numeric_limits<double>::min());
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    const double a = out.analytic[i], n = out.numeric[i];
    const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
    if (out.worst_index < 0 || err > out.max_relative_error) {
      out.max_relative_error = err;
      out.worst_index = static_cast<int>(i);
    }
  }
  return out;
}

Eigen::Vector3d upright_camera_orientation(UpAxis up) {
  Eigen::Vector3d e_up, e_fwd;
  switch (up) {
    case UpAxis::X:
      e_up = Eigen::Vector3d::UnitX();
      e_fwd = Eigen::Vector3d::UnitZ();
      break;
    case UpAxis::Y:
      e_up = Eigen::Vector3d::UnitY();
      e_fwd = Eigen::Vector3d::UnitZ();
      break;
    case UpAxis::Z:
      e_up = Eigen::Vector3d::UnitZ();
      e_fwd = -Eigen::Vector3d::UnitY();
      break;
  }
  Eigen::Matrix3d model, cam;
  model << e_up, e_fwd, e_up.cross(e_fwd);
  const Eigen::Vector3d c_up(0, -1, 0), c_fwd(0, 0, -1);
  cam << c_up, c_fwd, c_up.cross(c_fwd);
  return rotation_to_axis_angle(cam * model.transpose());
}

double heuristic_depth(double fy, double model_height, double bbox_height) {
  if (!(bbox_height > 0.0)) throw DomainError("bounding box height must be positive");
  return fy * model_height / bbox_height;
}

Fitter::Fitter(const BodyModel& model, const JointMap& joint_map, FitConfig config)
    : model_(model), joint_map_(joint_map), config_(std::move(config)) {
  config_.validate();
  joint_map_.validate(model_.joint_count() + 1, std::numeric_limits<int>::max());
}

ObjectiveContext Fitter::context(const CameraTrack& cameras, const std::vector<KeypointTrack>& detections) const {
  return ObjectiveContext{model_, cameras, detections, joint_map_, config_.robust, config_.confidence_floor,
                          config_.prior};
}

InitResult Fitter::init_tracks(const std::vector<KeypointTrack>& detections, const CameraTrack& cameras,
                               const PersonStates* hints) const {
  if (detections.empty()) throw InputError("no detection tracks");
  cameras.validate();
  InitResult out;
  out.camera_scale = config_.camera_scale_init;
  const CameraIntrinsics& k = cameras.intrinsics;
  const int nk = model_.joint_count();
  const Eigen::Vector3d phi_upright = upright_camera_orientation(model_.data().up_axis);

  for (const auto& track : detections) {
    const PersonState* hint = nullptr;
    if (hints) {
      for (const auto& h : *hints) {
        if (h.track_id == track.id) hint = &h;
      }
      if (hint && hint->frames.size() != track.frames.size()) {
        throw InputError("hints for track " + std::to_string(track.id) + " do not match its frame count");
      }
    }

    PersonState state;
    state.track_id = track.id;
    state.shape.alpha = config_.alpha_init;
    if (hint) state.shape.beta = hint->shape.beta;

    const double model_height = neutral_height(model_, state.shape);
    Eigen::Vector3d model_centroid = Eigen::Vector3d::Zero();
    if (!joint_map_.pairs.empty()) {
      const Vertices rest = model_.rest_joints(state.shape);
      for (const auto& [j, kp] : joint_map_.pairs) model_centroid += rest.row(j).transpose();
      model_centroid /= static_cast<double>(joint_map_.pairs.size());
    }
    const Eigen::Vector3d centroid_c = axis_angle_to_rotation(phi_upright) * model_centroid;

    std::vector<bool> valid(track.frames.size(), false);
    for (std::size_t t = 0; t < track.frames.size(); ++t) {
      const KeypointFrame& det = track.frames[t];
      if (det.frame < 0 || det.frame >= cameras.frame_count()) {
        throw InputError("track " + std::to_string(track.id) + ": frame " + std::to_string(det.frame) +
                         " has no camera pose");
      }
      FrameState fs;
      fs.pose = PoseParams::zero(nk);
      const CameraPose& cam = cameras.poses[det.frame];

      if (hint) {
        const FrameState& h = hint->frames[t];
        const auto w = init_world_from_camera(cam, config_.camera_scale_init, h.pose.global_orient, h.translation);
        fs.pose.global_orient = w.global_orient;
        fs.pose.body_pose = h.pose.body_pose;
        fs.translation = w.translation;
        valid[t] = true;
      } else {
        Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
        Eigen::Vector2d hi = -lo;
        Eigen::Vector2d sum = Eigen::Vector2d::Zero();
        int usable = 0;
        for (const auto& [j, kp] : joint_map_.pairs) {
          if (kp >= det.confidences.size() || !(det.confidences[kp] >= config_.confidence_floor)) continue;
          const Eigen::Vector2d p = det.points.row(kp).transpose();
          lo = lo.cwiseMin(p);
          hi = hi.cwiseMax(p);
          sum += p;
          ++usable;
        }
        const double bbox_height = usable >= 2 ? hi.y() - lo.y() : 0.0;
        if (bbox_height > 0.0) {
          const Eigen::Vector2d c = sum / usable;
          const double z = heuristic_depth(k.fy, model_height, bbox_height);
          const Eigen::Vector3d target((c.x() - k.cx) * z / k.fx, (c.y() - k.cy) * z / k.fy, z);
          const auto w = init_world_from_camera(cam, config_.camera_scale_init, phi_upright, target - centroid_c);
          fs.pose.global_orient = w.global_orient;
          fs.translation = w.translation;
          valid[t] = true;
        }
      }
      state.frames.push_back(std::move(fs));
    }

    if (std::none_of(valid.begin(), valid.end(), [](bool v) { return v; })) {
      out.rejected.push_back({track.id, "no frame has enough usable keypoints"});
      continue;
    }
    // Frames without usable detections copy the root of the nearest valid frame.
    for (std::size_t t = 0; t < valid.size(); ++t) {
      if (valid[t]) continue;
      std::size_t best = t;
      for (std::size_t d = 1; best == t; ++d) {
        if (t >= d && valid[t - d]) best = t - d;
        else if (t + d < valid.size() && valid[t + d]) best = t + d;
      }
      state.frames[t].pose.global_orient = state.frames[best].pose.global_orient;
      state.frames[t].translation = state.frames[best].translation;
    }
    out.states.push_back(std::move(state));
    out.detections.push_back(track);
  }
  return out;
}

StageReport Fitter::run_stage(StageKind kind, const StageWeights& w, PersonStates& states, CameraTrack& cameras,
                              const std::vector<KeypointTrack>& detections) const {
  const bool camera_free = kind == StageKind::Full && cameras.has_translation();
  const FreeParameterLayout layout(states, kind, camera_free, config_.alpha_margin);
  StageReport report;

  PersonStates work = states;
  CameraTrack cams = cameras;
  const ObjectiveContext ctx = context(cams, detections);
  check_inputs(states, ctx);

  const Eigen::VectorXd x0 = layout.flatten(states, cameras.scale);
  if (config_.gradient_check) {
    layout.unflatten(x0, work, cams.scale);
    const GradientCheckResult gc = check_gradient(work, ctx, w, layout);
    report.gradient_check_error = gc.max_relative_error;
    if (!(gc.max_relative_error < 1e-4)) {
      throw NumericalError("finite-difference gradient check failed, relative error " +
                               std::to_string(gc.max_relative_error),
                           gc.worst_index);
    }
  }

  auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    layout.unflatten(x, work, cams.scale);
    const Evaluation ev = evaluate(work, ctx, w);
    g = layout.flatten_gradient(ev.gradient, work, cams.scale);
    return ev.value;
  };

  LbfgsOptions opts = config_.lbfgs;
  opts.max_iterations = w.iterations;
  const LbfgsResult r = lbfgs_minimize(objective, x0, opts);

  layout.unflatten(r.x, states, cameras.scale);
  for (const auto& p : states) {
    if (!(p.shape.alpha >= 0.0 && p.shape.alpha <= 1.0)) throw NumericalError("alpha left [0,1]", p.track_id);
  }
  if (!(cameras.scale > 0.0)) throw NumericalError("camera scale became nonpositive", -1);

  report.trace = r.trace;
  report.iterations = r.iterations;
  report.evaluations = r.evaluations;
  report.converged = r.converged;
  report.line_search_failed = r.line_search_failed;
  report.message = r.message;
  return report;
}

StageReport Fitter::stage1(PersonStates& states, CameraTrack& cameras,
                           const std::vector<KeypointTrack>& detections) const {
  return run_stage(StageKind::RootOnly, config_.stage1, states, cameras, detections);
}

StageReport Fitter::stage2(PersonStates& states, CameraTrack& cameras,
                           const std::vector<KeypointTrack>& detections) const {
  return run_stage(StageKind::Full, config_.stage2, states, cameras, detections);
}

FitReport Fitter::fit(const std::vector<KeypointTrack>& detections, const CameraTrack& cameras,
                      const PersonStates* hints) const {
  InitResult init = init_tracks(detections, cameras, hints);
  FitReport report;
  report.rejected = init.rejected;
  CameraTrack cams = cameras;
  cams.scale = init.camera_scale;
  report.states = std::move(init.states);
  if (!report.states.empty()) {
    report.stage1 = stage1(report.states, cams, init.detections);
    report.stage2 = stage2(report.states, cams, init.detections);
    report.frame_residuals = reprojection_residuals(report.states, context(cams, init.detections));
  }
  report.camera_scale = cams.scale;
  return report;
}

}  // namespace aionfit
