#include "aionfit/synth.hpp"

#include <cmath>
#include <map>
#include <random>

#include <Eigen/Geometry>

#include "aionfit/errors.hpp"
#include "aionfit/rotation.hpp"

namespace aionfit {

namespace {

struct ToyJoint {
  const char* name;
  int parent;
  Eigen::Vector3d adult;
  Eigen::Vector3d child;
  double adult_radius;
  double child_radius;
};

// Left is +x, the body faces +z, y is up.
std::vector<ToyJoint> toy_skeleton() {
  using V = Eigen::Vector3d;
  return {
      {"pelvis", -1, V(0, 0, 0), V(0, 0, 0), 0.08, 0.05},
      {"left_hip", 0, V(0.09, -0.06, 0), V(0.06, -0.03, 0), 0.05, 0.035},
      {"left_knee", 1, V(0.10, -0.48, 0.01), V(0.065, -0.20, 0.01), 0.05, 0.035},
      {"left_ankle", 2, V(0.10, -0.88, -0.02), V(0.065, -0.37, -0.01), 0.05, 0.03},
      {"right_hip", 0, V(-0.09, -0.06, 0), V(-0.06, -0.03, 0), 0.05, 0.035},
      {"right_knee", 4, V(-0.10, -0.48, 0.01), V(-0.065, -0.20, 0.01), 0.05, 0.035},
      {"right_ankle", 5, V(-0.10, -0.88, -0.02), V(-0.065, -0.37, -0.01), 0.05, 0.03},
      {"spine", 0, V(0, 0.25, 0), V(0, 0.13, 0), 0.09, 0.06},
      {"neck", 7, V(0, 0.50, 0), V(0, 0.25, 0), 0.05, 0.035},
      {"head", 8, V(0, 0.64, 0), V(0, 0.34, 0), 0.12, 0.10},
      {"nose", 9, V(0, 0.65, 0.10), V(0, 0.345, 0.085), 0.015, 0.012},
      {"left_eye", 9, V(0.035, 0.68, 0.085), V(0.03, 0.37, 0.07), 0.015, 0.012},
      {"right_eye", 9, V(-0.035, 0.68, 0.085), V(-0.03, 0.37, 0.07), 0.015, 0.012},
      {"left_ear", 9, V(0.075, 0.65, 0), V(0.065, 0.345, 0), 0.015, 0.012},
      {"right_ear", 9, V(-0.075, 0.65, 0), V(-0.065, 0.345, 0), 0.015, 0.012},
      {"left_shoulder", 8, V(0.18, 0.46, 0), V(0.10, 0.23, 0), 0.05, 0.035},
      {"left_elbow", 15, V(0.22, 0.18, 0), V(0.12, 0.09, 0), 0.045, 0.03},
      {"left_wrist", 16, V(0.25, -0.07, 0.04), V(0.13, -0.03, 0.03), 0.04, 0.03},
      {"right_shoulder", 8, V(-0.18, 0.46, 0), V(-0.10, 0.23, 0), 0.05, 0.035},
      {"right_elbow", 18, V(-0.22, 0.18, 0), V(-0.12, 0.09, 0), 0.045, 0.03},
      {"right_wrist", 19, V(-0.25, -0.07, 0.04), V(-0.13, -0.03, 0.03), 0.04, 0.03},
  };
}

const Eigen::Vector3d kOctahedron[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
const std::array<int, 3> kOctaFaces[8] = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
                                          {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};

double side(const std::string& name) {
  if (name.rfind("left_", 0) == 0) return 1.0;
  if (name.rfind("right_", 0) == 0) return -1.0;
  return 0.0;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

BodyModelData make_toy_body_model() {
  const auto joints = toy_skeleton();
  const int nj = static_cast<int>(joints.size());
  const int nv = 6 * nj;

  BodyModelData d;
  d.adult_template.resize(nv, 3);
  d.child_template.resize(nv, 3);
  d.shape_blendshapes = Eigen::MatrixXd::Zero(3 * nv, kNumBetas);
  d.pose_blendshapes = Eigen::MatrixXd::Zero(3 * nv, 9 * (nj - 1));
  d.joint_regressor = Eigen::MatrixXd::Zero(nj, nv);
  d.skinning_weights = Eigen::MatrixXd::Zero(nv, nj);
  d.up_axis = UpAxis::Y;

  for (int j = 0; j < nj; ++j) {
    const ToyJoint& tj = joints[j];
    const std::string name = tj.name;
    d.parents.push_back(tj.parent);
    d.joint_names.push_back(name);
    const double s = side(name);
    const bool leg = ends_with(name, "knee") || ends_with(name, "ankle");
    const bool arm = ends_with(name, "shoulder") || ends_with(name, "elbow") || ends_with(name, "wrist");
    const bool torso = name == "pelvis" || name == "spine" || name == "neck";
    const bool upper = arm || name == "neck" || name == "head" || tj.parent == 9;

    // Joint-level shape directions; every vertex of the cluster moves with its joint.
    Eigen::Matrix<double, 3, kNumBetas> dir = Eigen::Matrix<double, 3, kNumBetas>::Zero();
    if (ends_with(name, "knee")) dir(1, 1) = -0.03;
    if (ends_with(name, "ankle")) dir(1, 1) = -0.06;
    if (arm) dir(0, 2) = 0.015 * s;
    if (ends_with(name, "elbow")) dir(1, 3) = -0.02;
    if (ends_with(name, "wrist")) dir(1, 3) = -0.04;
    if (name == "spine") dir(1, 4) = 0.01;
    if (upper) dir(1, 4) = 0.025;
    if (ends_with(name, "hip") || leg) dir(0, 5) = 0.012 * s;
    if (ends_with(name, "knee") || ends_with(name, "elbow")) dir(2, 9) = 0.02;

    for (int o = 0; o < 6; ++o) {
      const int v = 6 * j + o;
      const Eigen::Vector3d a = tj.adult + tj.adult_radius * kOctahedron[o];
      d.adult_template.row(v) = a.transpose();
      d.child_template.row(v) = (tj.child + tj.child_radius * kOctahedron[o]).transpose();
      d.joint_regressor(j, v) = 1.0 / 6.0;
      if (tj.parent >= 0 && tj.parent != 9) {
        d.skinning_weights(v, j) = 0.8;
        d.skinning_weights(v, tj.parent) = 0.2;
      } else {
        d.skinning_weights(v, j) = 1.0;
      }

      Eigen::Matrix<double, 3, kNumBetas> vdir = dir;
      vdir.col(0) = 0.06 * a;  // overall size
      const Eigen::Vector3d radial = tj.adult_radius * kOctahedron[o];
      if (torso) vdir.col(6) = 0.15 * radial;
      if (leg || arm) vdir.col(7) = 0.15 * radial;
      if (name == "head") vdir.col(8) = 0.1 * radial;
      d.shape_blendshapes.block<3, kNumBetas>(3 * v, 0) = vdir;

      if (j > 0) {
        for (int m = 0; m < 9; ++m) {
          for (int c = 0; c < 3; ++c) {
            d.pose_blendshapes(3 * v + c, 9 * (j - 1) + m) = 0.003 * std::sin(1.0 + v + 3.0 * m + 7.0 * c);
          }
        }
      }
    }
    for (const auto& f : kOctaFaces) d.faces.push_back({6 * j + f[0], 6 * j + f[1], 6 * j + f[2]});
  }
  return d;
}

CameraPath parse_camera_path(const std::string& name) {
  if (name == "static") return CameraPath::Static;
  if (name == "orbit") return CameraPath::Orbit;
  if (name == "dolly") return CameraPath::Dolly;
  throw InputError("unknown camera path '" + name + "' (expected static, orbit or dolly)");
}

std::string to_string(CameraPath path) {
  switch (path) {
    case CameraPath::Static: return "static";
    case CameraPath::Orbit: return "orbit";
    case CameraPath::Dolly: return "dolly";
  }
  return "static";
}

void SynthScenario::validate() const {
  if (frames < 1) throw InputError("scenario needs at least one frame");
  if (tracks < 1) throw InputError("scenario needs at least one track");
  if (alphas.empty()) throw InputError("scenario needs at least one alpha");
  for (double a : alphas) {
    if (!(a >= 0.0 && a <= 1.0)) throw InputError("scenario alpha outside [0,1]");
  }
  if (!(noise_px >= 0.0) || !(camera_scale > 0.0) || !(subject_distance > 0.0) || !(pose_amplitude >= 0.0) ||
      !(orientation_amplitude >= 0.0) || !(translation_amplitude >= 0.0) || !(shape_spread >= 0.0)) {
    throw InputError("scenario amplitudes, noise and distances must be nonnegative");
  }
  intrinsics.validate();
}

namespace {

CameraPose look_at(const Eigen::Vector3d& center, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - center).normalized();
  const Eigen::Vector3d down(0, -1, 0);
  const Eigen::Vector3d y = (down - down.dot(z) * z).normalized();
  const Eigen::Vector3d x = y.cross(z);
  CameraPose p;
  p.R.row(0) = x.transpose();
  p.R.row(1) = y.transpose();
  p.R.row(2) = z.transpose();
  p.T = -p.R * center;
  return p;
}

Eigen::Vector3d camera_center(const SynthScenario& sc, int t) {
  const double u = sc.frames > 1 ? static_cast<double>(t) / (sc.frames - 1) : 0.5;
  const double d = sc.subject_distance;
  switch (sc.camera_path) {
    case CameraPath::Static:
      return {0.0, 0.2, d};
    case CameraPath::Orbit: {
      const double a = -0.5 + u;  // one radian of arc
      return {d * std::sin(a), 0.2 + 0.3 * u, d * std::cos(a)};
    }
    case CameraPath::Dolly:
      return {-0.6 + 1.2 * u, 0.2, d - 1.0 * u};
  }
  return {0.0, 0.2, d};
}

struct Sinusoid {
  double amplitude = 0.0, omega = 0.0, phase = 0.0;
  double at(int t) const { return amplitude * std::sin(omega * t + phase); }
};

}  // namespace

SynthOutput synth_generate(const BodyModel& model, const SynthScenario& sc) {
  sc.validate();
  const auto conv = keypoint_convention(sc.convention);
  SynthOutput out;
  out.joint_map = resolve_joint_map(joint_map_by_name(model, sc.convention), model);
  if (out.joint_map.pairs.empty()) throw InputError("model shares no joint names with convention " + sc.convention);
  out.true_camera_scale = sc.camera_scale;

  std::vector<CameraPose> true_poses;
  out.cameras.intrinsics = sc.intrinsics;
  for (int t = 0; t < sc.frames; ++t) {
    CameraPose p = look_at(camera_center(sc, t), Eigen::Vector3d::Zero());
    true_poses.push_back(p);
    p.T /= sc.camera_scale;
    out.cameras.poses.push_back(p);
  }

  std::mt19937_64 rng(sc.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto sinusoid = [&](double amplitude) {
    return Sinusoid{amplitude, 0.08 + 0.17 * unit(rng), 2.0 * M_PI * unit(rng)};
  };

  const int nk = model.joint_count();
  constexpr int kMaxRetries = 20;
  constexpr double kNearPlane = 0.1;

  for (int i = 0; i < sc.tracks; ++i) {
    PersonState truth;
    truth.track_id = i;
    std::vector<Vertices> world;
    bool ok = false;
    for (int attempt = 0; attempt < kMaxRetries && !ok; ++attempt) {
      truth.frames.clear();
      world.clear();
      truth.shape.alpha = sc.alphas[i % sc.alphas.size()];
      for (int b = 0; b < kNumBetas; ++b) truth.shape.beta[b] = sc.shape_spread * gauss(rng);
      const double yaw = 0.8 * unit(rng) - 0.4;
      const Eigen::Vector3d base(1.0 * (i - 0.5 * (sc.tracks - 1)), 0.0, 0.3 * unit(rng) - 0.15);
      std::array<Sinusoid, 3> orient_waves, trans_waves;
      for (auto& w : orient_waves) w = sinusoid(sc.orientation_amplitude);
      for (auto& w : trans_waves) w = sinusoid(sc.translation_amplitude);
      std::vector<Sinusoid> pose_waves(3 * nk);
      for (auto& w : pose_waves) w = sinusoid(sc.pose_amplitude);

      ok = true;
      for (int t = 0; t < sc.frames && ok; ++t) {
        FrameState f;
        f.pose = PoseParams::zero(nk);
        f.pose.global_orient = Eigen::Vector3d(0.0, yaw, 0.0);
        for (int c = 0; c < 3; ++c) {
          f.pose.global_orient[c] += orient_waves[c].at(t);
          f.translation[c] = base[c] + trans_waves[c].at(t);
        }
        for (int k = 0; k < nk; ++k)
          for (int c = 0; c < 3; ++c) f.pose.body_pose(k, c) = pose_waves[3 * k + c].at(t);

        const Vertices w = world_joints(model.joint_chain(truth.shape, f.pose).posed_joints, f.translation);
        for (Eigen::Index j = 0; j < w.rows() && ok; ++j) {
          ok = world_point_to_camera(true_poses[t], 1.0, w.row(j).transpose()).z() > kNearPlane;
        }
        truth.frames.push_back(std::move(f));
        world.push_back(w);
      }
    }
    if (!ok) throw InputError("could not place track " + std::to_string(i) + " in front of the camera");

    KeypointTrack track;
    track.id = i;
    for (int t = 0; t < sc.frames; ++t) {
      KeypointFrame kf;
      kf.frame = t;
      kf.points = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(conv.size(), 2);
      kf.confidences = Eigen::VectorXd::Zero(conv.size());
      for (const auto& [j, kp] : out.joint_map.pairs) {
        const Eigen::Vector3d c = world_point_to_camera(true_poses[t], 1.0, world[t].row(j).transpose());
        Eigen::Vector2d px = project(sc.intrinsics, c);
        if (sc.noise_px > 0.0) {
          px.x() += sc.noise_px * gauss(rng);
          px.y() += sc.noise_px * gauss(rng);
        }
        kf.points.row(kp) = px.transpose();
        kf.confidences[kp] = 1.0;
      }
      track.frames.push_back(std::move(kf));
    }
    out.detections.push_back(std::move(track));
    out.truth.push_back(std::move(truth));
  }
  return out;
}

}  // namespace aionfit
