#include "support.hpp"

#include <sstream>

#include <Eigen/Geometry>

#include "aionfit/rotation.hpp"
#include "cli.hpp"

namespace aionfit::test {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

namespace {

Eigen::Matrix3d rot(const Eigen::Vector3d& aa) {
  const double angle = aa.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, aa / angle).toRotationMatrix();
}

Eigen::Matrix4d rigid(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) = r;
  m.block<3, 1>(0, 3) = t;
  return m;
}

}  // namespace

BodyModelData random_model(Rng& rng, int nv, int nj, bool pose_blendshapes) {
  BodyModelData d;
  d.adult_template.resize(nv, 3);
  d.child_template.resize(nv, 3);
  for (int v = 0; v < nv; ++v) {
    for (int c = 0; c < 3; ++c) {
      d.adult_template(v, c) = uniform(rng, -0.5, 0.5) + (c == 1 ? uniform(rng, 0.0, 1.7) : 0.0);
      d.child_template(v, c) = 0.5 * d.adult_template(v, c) + uniform(rng, -0.05, 0.05);
    }
  }
  d.shape_blendshapes.resize(3 * nv, kNumBetas);
  for (Eigen::Index i = 0; i < d.shape_blendshapes.size(); ++i) d.shape_blendshapes.data()[i] = uniform(rng, -0.05, 0.05);
  if (pose_blendshapes) {
    d.pose_blendshapes.resize(3 * nv, 9 * (nj - 1));
    for (Eigen::Index i = 0; i < d.pose_blendshapes.size(); ++i) d.pose_blendshapes.data()[i] = uniform(rng, -0.01, 0.01);
  }
  d.joint_regressor = Eigen::MatrixXd::Zero(nj, nv);
  for (int j = 0; j < nj; ++j) {
    for (int v = 0; v < nv; ++v) d.joint_regressor(j, v) = uniform(rng, 0.0, 1.0);
    d.joint_regressor.row(j) /= d.joint_regressor.row(j).sum();
  }
  d.skinning_weights = Eigen::MatrixXd::Zero(nv, nj);
  for (int v = 0; v < nv; ++v) {
    for (int j = 0; j < nj; ++j) d.skinning_weights(v, j) = uniform(rng, 0.0, 1.0);
    d.skinning_weights.row(v) /= d.skinning_weights.row(v).sum();
  }
  d.parents.push_back(-1);
  for (int j = 1; j < nj; ++j) d.parents.push_back(std::uniform_int_distribution<int>(0, j - 1)(rng));
  for (int j = 0; j < nj; ++j) d.joint_names.push_back("j" + std::to_string(j));
  for (int v = 0; v + 2 < nv; v += 3) d.faces.push_back({v, v + 1, v + 2});
  d.up_axis = UpAxis::Y;
  return d;
}

PoseParams random_pose(Rng& rng, int k, double scale) {
  PoseParams p = PoseParams::zero(k);
  for (int c = 0; c < 3; ++c) p.global_orient(c) = uniform(rng, -scale, scale);
  for (int j = 0; j < k; ++j)
    for (int c = 0; c < 3; ++c) p.body_pose(j, c) = uniform(rng, -scale, scale);
  return p;
}

ShapeParams random_shape(Rng& rng, double beta_scale) {
  ShapeParams s;
  for (int b = 0; b < kNumBetas; ++b) s.beta(b) = uniform(rng, -beta_scale, beta_scale);
  s.alpha = uniform(rng, 0.0, 1.0);
  return s;
}

MeshResult naive_forward(const BodyModelData& d, const ShapeParams& shape, const PoseParams& pose) {
  const int nv = static_cast<int>(d.adult_template.rows());
  const int nj = static_cast<int>(d.parents.size());
  std::vector<Eigen::Matrix3d> local(nj);
  local[0] = rot(pose.global_orient);
  for (int k = 1; k < nj; ++k) local[k] = rot(pose.body_pose.row(k - 1).transpose());

  Vertices shaped(nv, 3);
  for (int v = 0; v < nv; ++v) {
    for (int c = 0; c < 3; ++c) {
      double x = shape.alpha * d.child_template(v, c) + (1.0 - shape.alpha) * d.adult_template(v, c);
      for (int b = 0; b < kNumBetas; ++b) x += shape.beta(b) * d.shape_blendshapes(3 * v + c, b);
      shaped(v, c) = x;
    }
  }
  Vertices joints = Vertices::Zero(nj, 3);
  for (int j = 0; j < nj; ++j)
    for (int v = 0; v < nv; ++v) joints.row(j) += d.joint_regressor(j, v) * shaped.row(v);

  Vertices posed_rest = shaped;
  if (d.pose_blendshapes.size() > 0) {
    for (int v = 0; v < nv; ++v) {
      for (int c = 0; c < 3; ++c) {
        double x = 0.0;
        for (int k = 1; k < nj; ++k) {
          for (int r = 0; r < 3; ++r) {
            for (int s = 0; s < 3; ++s) {
              const double feature = local[k](r, s) - (r == s ? 1.0 : 0.0);
              x += d.pose_blendshapes(3 * v + c, 9 * (k - 1) + 3 * r + s) * feature;
            }
          }
        }
        posed_rest(v, c) += x;
      }
    }
  }

  // The root rotates about the body-local origin; children about their joints.
  std::vector<Eigen::Matrix4d> g(nj);
  g[0] = rigid(local[0], local[0] * joints.row(0).transpose());
  for (int k = 1; k < nj; ++k) {
    const int p = d.parents[k];
    g[k] = g[p] * rigid(local[k], (joints.row(k) - joints.row(p)).transpose());
  }
  MeshResult out;
  out.joints.resize(nj, 3);
  for (int k = 0; k < nj; ++k) out.joints.row(k) = g[k].block<3, 1>(0, 3).transpose();
  out.vertices.resize(nv, 3);
  for (int v = 0; v < nv; ++v) {
    Eigen::Vector4d acc = Eigen::Vector4d::Zero();
    Eigen::Vector4d x;
    x << posed_rest.row(v).transpose(), 1.0;
    for (int k = 0; k < nj; ++k) {
      const Eigen::Matrix4d a = g[k] * rigid(Eigen::Matrix3d::Identity(), -joints.row(k).transpose());
      acc += d.skinning_weights(v, k) * (a * x);
    }
    out.vertices.row(v) = acc.head<3>().transpose();
  }
  return out;
}

ToyProblem random_toy_problem(Rng& rng, int nv, int nj, int frames, int persons) {
  ToyProblem p;
  p.data = random_model(rng, nv, nj);
  const BodyModel model(p.data);
  const int k = nj - 1;
  for (int j = 0; j < nj; ++j) p.joint_map.pairs.emplace_back(j, j);

  p.cameras.intrinsics = {800.0, 820.0, 320.0, 240.0};
  p.cameras.scale = uniform(rng, 0.8, 1.2);
  for (int t = 0; t < frames; ++t) {
    CameraPose pose;
    pose.R = rot(Eigen::Vector3d(uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1), uniform(rng, -0.1, 0.1)));
    pose.T = Eigen::Vector3d(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3), 5.0 + uniform(rng, -0.3, 0.3));
    p.cameras.poses.push_back(pose);
  }

  for (int i = 0; i < persons; ++i) {
    PersonState truth;
    truth.track_id = 10 + i;
    truth.shape = random_shape(rng, 0.5);
    truth.shape.alpha = uniform(rng, 0.2, 0.8);
    KeypointTrack track;
    track.id = truth.track_id;
    for (int t = 0; t < frames; ++t) {
      FrameState f;
      f.pose = random_pose(rng, k, 0.4);
      f.translation = Eigen::Vector3d(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
      const MeshResult m = naive_forward(p.data, truth.shape, f.pose);
      const CameraPose& cam = p.cameras.poses[t];
      KeypointFrame kf;
      kf.frame = t;
      kf.points.resize(nj, 2);
      kf.confidences.resize(nj);
      for (int j = 0; j < nj; ++j) {
        const Eigen::Vector3d c = cam.R * (m.joints.row(j).transpose() + f.translation) + p.cameras.scale * cam.T;
        kf.points(j, 0) = p.cameras.intrinsics.fx * c.x() / c.z() + p.cameras.intrinsics.cx + uniform(rng, -30, 30);
        kf.points(j, 1) = p.cameras.intrinsics.fy * c.y() / c.z() + p.cameras.intrinsics.cy + uniform(rng, -30, 30);
        kf.confidences(j) = uniform(rng, 0.3, 1.0);
      }
      track.frames.push_back(std::move(kf));
      truth.frames.push_back(std::move(f));
    }
    // Move away from the generator so every term has a nonzero gradient.
    PersonState start = truth;
    start.shape = random_shape(rng, 0.5);
    start.shape.alpha = uniform(rng, 0.1, 0.9);
    for (auto& f : start.frames) {
      f.pose = random_pose(rng, k, 0.4);
      f.translation += Eigen::Vector3d(uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2));
    }
    p.states.push_back(std::move(start));
    p.detections.push_back(std::move(track));
  }
  (void)model;
  return p;
}

}  // namespace aionfit::test

namespace aionfit::test {

CliRun run_tool(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"aionfit"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace aionfit::test

namespace aionfit::test {

double awkward_double(test::Rng& rng) {
  switch (std::uniform_int_distribution<int>(0, 5)(rng)) {
    case 0: return -0.0;
    case 1: return uniform(rng, -1, 1) * 1e-300;
    case 2: return uniform(rng, -1, 1) * 1e12;
    case 3: return 1.0 / 3.0;
    default: return uniform(rng, -10, 10);
  }
}

DetectionFile random_detection_file(test::Rng& rng, int tracks, int frames) {
  DetectionFile d;
  for (int i = 0; i < tracks; ++i) {
    KeypointTrack t;
    t.id = 3 * i + 1;
    int frame = 0;
    for (int f = 0; f < frames; ++f) {
      KeypointFrame kf;
      frame += 1 + std::uniform_int_distribution<int>(0, 2)(rng);
      kf.frame = frame;
      kf.points.resize(17, 2);
      kf.confidences.resize(17);
      for (int k = 0; k < 17; ++k) {
        kf.points(k, 0) = awkward_double(rng);
        kf.points(k, 1) = awkward_double(rng);
        kf.confidences(k) = uniform(rng, 0, 1);
      }
      t.frames.push_back(kf);
    }
    d.tracks.push_back(t);
  }
  return d;
}

CameraTrack random_camera_track(test::Rng& rng, int frames) {
  CameraTrack c;
  c.intrinsics = {uniform(rng, 500, 1500), uniform(rng, 500, 1500), awkward_double(rng), awkward_double(rng)};
  c.scale = uniform(rng, 0.1, 3);
  for (int t = 0; t < frames; ++t) {
    CameraPose p;
    p.R = axis_angle_to_rotation(Eigen::Vector3d(awkward_double(rng), awkward_double(rng), awkward_double(rng)).cwiseMin(5).cwiseMax(-5));
    p.T = Eigen::Vector3d(awkward_double(rng), awkward_double(rng), awkward_double(rng));
    c.poses.push_back(p);
  }
  return c;
}

ResultFile random_result_file(test::Rng& rng, int tracks, int frames, int k) {
  ResultFile r;
  r.model_hash = "abc123";
  r.camera_scale = uniform(rng, 0.1, 4);
  for (int i = 0; i < tracks; ++i) {
    PersonState s;
    s.track_id = i * 7;
    s.shape = random_shape(rng, 3);
    std::vector<int> idx;
    std::vector<double> res;
    for (int t = 0; t < frames; ++t) {
      FrameState f;
      f.pose = random_pose(rng, k, 2);
      f.translation = Eigen::Vector3d(awkward_double(rng), awkward_double(rng), awkward_double(rng));
      s.frames.push_back(f);
      idx.push_back(2 * t);
      res.push_back(t % 3 == 0 ? std::nan("") : uniform(rng, 0, 5));
    }
    r.states.push_back(s);
    r.frame_indices.push_back(idx);
    r.diagnostics.frame_residuals.push_back(res);
  }
  r.diagnostics.stage1 = {{3.0, 2.0, 1.5}, 2, 9, false, false, "iteration limit reached"};
  r.diagnostics.stage2 = {{1.5, 1.0 / 7.0}, 1, 4, true, true, "line search \"failed\""};
  r.diagnostics.rejected = {{42, "no frame has enough usable keypoints"}};
  return r;
}

}  // namespace aionfit::test
