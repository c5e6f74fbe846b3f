#include "aionfit/objective.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "aionfit/errors.hpp"

namespace aionfit {

void RobustLossConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("robust loss sigma must be positive");
}

void StageWeights::validate() const {
  for (double l : {lambda_data, lambda_smooth, lambda_pose, lambda_beta}) {
    if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("stage weights must be finite and nonnegative");
  }
  if (iterations < 1) throw ConfigError("stage iterations must be at least 1");
}

PosePrior PosePrior::external_latent(std::shared_ptr<const PoseEncoder> encoder) {
  PosePrior p;
  p.kind = Kind::ExternalLatent;
  p.latent_dim = 32;
  p.encoder = std::move(encoder);
  return p;
}

void PosePrior::validate() const {
  if (kind == Kind::GaussianParameterSpace) {
    if (latent_dim != 0) throw ConfigError("gaussian pose prior has no latent dimension");
    return;
  }
  if (latent_dim != 32) throw ConfigError("external latent pose prior must be 32-dimensional");
  if (!encoder) throw ConfigError("external latent pose prior selected but no encoder registered");
  if (encoder->latent_dim() != latent_dim) throw ConfigError("pose encoder latent dimension mismatch");
}

void check_inputs(const PersonStates& states, const ObjectiveContext& ctx) {
  if (states.size() != ctx.detections.size()) {
    throw InputError("have " + std::to_string(states.size()) + " person states but " +
                     std::to_string(ctx.detections.size()) + " detection tracks");
  }
  int max_kp = -1;
  for (const auto& [j, k] : ctx.joint_map.pairs) {
    if (j < 0 || j > ctx.model.joint_count()) throw InputError("joint map references a missing model joint");
    max_kp = std::max(max_kp, k);
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto& det = ctx.detections[i];
    if (states[i].frames.size() != det.frames.size()) {
      throw InputError("track " + std::to_string(det.id) + ": frame count mismatch between states (" +
                       std::to_string(states[i].frames.size()) + ") and detections (" +
                       std::to_string(det.frames.size()) + ")");
    }
    for (const auto& f : det.frames) {
      if (f.frame < 0 || f.frame >= ctx.cameras.frame_count()) {
        throw InputError("track " + std::to_string(det.id) + ": frame " + std::to_string(f.frame) +
                         " has no camera pose");
      }
      if (f.points.rows() != f.confidences.size() || f.points.rows() <= max_kp) {
        throw InputError("track " + std::to_string(det.id) + ": keypoint count inconsistent with the joint map");
      }
    }
    for (const auto& fs : states[i].frames) {
      if (fs.pose.body_pose.rows() != ctx.model.joint_count()) throw InputError("body pose joint count mismatch");
    }
  }
}

double geman_mcclure(const Eigen::Vector2d& r, const RobustLossConfig& cfg) {
  const double n2 = r.squaredNorm();
  return n2 / (cfg.sigma * cfg.sigma + n2);
}

std::vector<std::vector<Vertices>> track_world_joints(const PersonStates& states, const BodyModel& model) {
  std::vector<std::vector<Vertices>> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (const auto& f : states[i].frames) {
      out[i].push_back(world_joints(model.joint_chain(states[i].shape, f.pose).posed_joints, f.translation));
    }
  }
  return out;
}

namespace {

// Accumulates the data term of one frame; when d_world is non-null, also its
// gradient w.r.t. the world joints and the camera scale.
double frame_data_term(const Vertices& world, const KeypointFrame& det, const ObjectiveContext& ctx, double weight,
                       Vertices* d_world, double* d_scale) {
  const CameraPose& cam = ctx.cameras.poses[det.frame];
  const CameraIntrinsics& k = ctx.cameras.intrinsics;
  const double s2 = ctx.robust.sigma * ctx.robust.sigma;
  double e = 0.0;
  for (const auto& [j, kp] : ctx.joint_map.pairs) {
    const double psi = det.confidences[kp];
    if (!(psi >= ctx.confidence_floor)) continue;
    const Eigen::Vector3d c = world_point_to_camera(cam, ctx.cameras.scale, world.row(j).transpose());
    if (!(c.z() > kMinDepth)) continue;
    const double iz = 1.0 / c.z();
    const Eigen::Vector2d proj(k.fx * c.x() * iz + k.cx, k.fy * c.y() * iz + k.cy);
    const Eigen::Vector2d r = proj - det.points.row(kp).transpose();
    const double n2 = r.squaredNorm();
    const double denom = s2 + n2;
    e += psi * n2 / denom;
    if (d_world) {
      // d rho / d r = 2 r sigma^2 / (sigma^2 + |r|^2)^2
      const Eigen::Vector2d gr = weight * psi * 2.0 * s2 / (denom * denom) * r;
      const Eigen::Vector3d gc(gr.x() * k.fx * iz, gr.y() * k.fy * iz,
                               -(gr.x() * k.fx * c.x() + gr.y() * k.fy * c.y()) * iz * iz);
      d_world->row(j) += (cam.R.transpose() * gc).transpose();
      *d_scale += cam.T.dot(gc);
    }
  }
  return e;
}

double pose_energy(const PoseParams& pose, const PosePrior& prior) {
  if (prior.kind == PosePrior::Kind::GaussianParameterSpace) return pose.body_pose.squaredNorm();
  return prior.encoder->encode(pose.body_pose).squaredNorm();
}

}  // namespace

double e_data(const PersonStates& states, const ObjectiveContext& ctx) {
  check_inputs(states, ctx);
  double e = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t t = 0; t < states[i].frames.size(); ++t) {
      const auto& f = states[i].frames[t];
      const Vertices w = world_joints(ctx.model.joint_chain(states[i].shape, f.pose).posed_joints, f.translation);
      e += frame_data_term(w, ctx.detections[i].frames[t], ctx, 1.0, nullptr, nullptr);
    }
  }
  return e;
}

double e_smooth(const std::vector<std::vector<Vertices>>& joint_sequences) {
  double e = 0.0;
  for (const auto& seq : joint_sequences) {
    for (std::size_t t = 0; t + 1 < seq.size(); ++t) e += (seq[t] - seq[t + 1]).squaredNorm();
  }
  return e;
}

double e_pose(const PersonStates& states, const PosePrior& prior) {
  prior.validate();
  double e = 0.0;
  for (const auto& p : states) {
    for (const auto& f : p.frames) e += pose_energy(f.pose, prior);
  }
  return e;
}

double e_beta(const PersonStates& states) {
  double e = 0.0;
  for (const auto& p : states) e += p.shape.beta.squaredNorm();
  return e;
}

double total_objective(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w) {
  double total = 0.0;
  if (w.lambda_data != 0.0) total += w.lambda_data * e_data(states, ctx);
  if (w.lambda_smooth != 0.0) total += w.lambda_smooth * e_smooth(track_world_joints(states, ctx.model));
  if (w.lambda_pose != 0.0) total += w.lambda_pose * e_pose(states, ctx.prior);
  if (w.lambda_beta != 0.0) total += w.lambda_beta * e_beta(states);
  return total;
}

Evaluation evaluate(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w) {
  check_inputs(states, ctx);
  if (w.lambda_pose != 0.0) ctx.prior.validate();
  const int nj = ctx.model.joint_count() + 1;

  Evaluation ev;
  ev.gradient.persons.resize(states.size());
  double data = 0.0, smooth = 0.0, pose = 0.0, beta = 0.0;

  for (std::size_t i = 0; i < states.size(); ++i) {
    const PersonState& person = states[i];
    PersonGradient& pg = ev.gradient.persons[i];
    const std::size_t n = person.frames.size();

    std::vector<JointChain> chains;
    std::vector<Vertices> world;
    chains.reserve(n);
    world.reserve(n);
    for (const auto& f : person.frames) {
      chains.push_back(ctx.model.joint_chain(person.shape, f.pose));
      world.push_back(world_joints(chains.back().posed_joints, f.translation));
    }
    std::vector<Vertices> d_world(n, Vertices::Zero(nj, 3));

    if (w.lambda_data != 0.0) {
      for (std::size_t t = 0; t < n; ++t) {
        data += frame_data_term(world[t], ctx.detections[i].frames[t], ctx, w.lambda_data, &d_world[t],
                                &ev.gradient.d_camera_scale);
      }
    }
    if (w.lambda_smooth != 0.0) {
      for (std::size_t t = 0; t + 1 < n; ++t) {
        const Vertices diff = world[t] - world[t + 1];
        smooth += diff.squaredNorm();
        d_world[t] += 2.0 * w.lambda_smooth * diff;
        d_world[t + 1] -= 2.0 * w.lambda_smooth * diff;
      }
    }

    pg.frames.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& pose_t = person.frames[t].pose;
      const JointGradient jg = ctx.model.joints_vjp(chains[t], pose_t, d_world[t]);
      FrameGradient& fg = pg.frames[t];
      fg.d_global_orient = jg.d_global_orient;
      fg.d_body_pose = jg.d_body_pose;
      fg.d_translation = d_world[t].colwise().sum().transpose();
      pg.d_alpha += jg.d_alpha;
      pg.d_beta += jg.d_beta;

      if (w.lambda_pose != 0.0) {
        if (ctx.prior.kind == PosePrior::Kind::GaussianParameterSpace) {
          pose += pose_t.body_pose.squaredNorm();
          fg.d_body_pose += 2.0 * w.lambda_pose * pose_t.body_pose;
        } else {
          const Eigen::VectorXd z = ctx.prior.encoder->encode(pose_t.body_pose);
          pose += z.squaredNorm();
          fg.d_body_pose += ctx.prior.encoder->encode_vjp(pose_t.body_pose, 2.0 * w.lambda_pose * z);
        }
      }
    }
    if (w.lambda_beta != 0.0) {
      beta += person.shape.beta.squaredNorm();
      pg.d_beta += 2.0 * w.lambda_beta * person.shape.beta;
    }
  }

  ev.value = w.lambda_data * data + w.lambda_smooth * smooth + w.lambda_pose * pose + w.lambda_beta * beta;
  return ev;
}

Eigen::VectorXd gradient(const PersonStates& states, const ObjectiveContext& ctx, const StageWeights& w,
                         const FreeParameterLayout& layout) {
  const Evaluation ev = evaluate(states, ctx, w);
  Eigen::VectorXd g = layout.flatten_gradient(ev.gradient, states, ctx.cameras.scale);
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw NumericalError("non-finite gradient component", static_cast<long>(i));
  }
  return g;
}

std::vector<std::vector<double>> reprojection_residuals(const PersonStates& states, const ObjectiveContext& ctx) {
  check_inputs(states, ctx);
  std::vector<std::vector<double>> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t t = 0; t < states[i].frames.size(); ++t) {
      const auto& f = states[i].frames[t];
      const auto& det = ctx.detections[i].frames[t];
      const Vertices w = world_joints(ctx.model.joint_chain(states[i].shape, f.pose).posed_joints, f.translation);
      const CameraPose& cam = ctx.cameras.poses[det.frame];
      double sum = 0.0;
      int count = 0;
      for (const auto& [j, kp] : ctx.joint_map.pairs) {
        if (!(det.confidences[kp] >= ctx.confidence_floor)) continue;
        const Eigen::Vector3d c = world_point_to_camera(cam, ctx.cameras.scale, w.row(j).transpose());
        if (!(c.z() > kMinDepth)) continue;
        sum += (project(ctx.cameras.intrinsics, c) - det.points.row(kp).transpose()).norm();
        ++count;
      }
      out[i].push_back(count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

double mean_reprojection_residual(const std::vector<std::vector<double>>& residuals) {
  double sum = 0.0;
  int count = 0;
  for (const auto& track : residuals) {
    for (double r : track) {
      if (std::isfinite(r)) {
        sum += r;
        ++count;
      }
    }
  }
  return count > 0 ? sum / count : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace aionfit
