#include "cli.hpp"

#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "aionfit/errors.hpp"
#include "aionfit/fitter.hpp"
#include "aionfit/io.hpp"
#include "aionfit/metrics.hpp"
#include "aionfit/obj_export.hpp"
#include "aionfit/package.hpp"
#include "aionfit/synth.hpp"

namespace aionfit {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Signals a usage problem found after flag parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string require_model(const std::string& flag_value) {
  const std::string path = resolve_model_path(flag_value);
  if (path.empty()) {
    throw UsageError(std::string("--model is required (or set ") + kModelPathEnv + ")");
  }
  return path;
}

void check_hash(const ResultFile& r, const std::string& hash, const std::string& what) {
  if (r.model_hash != hash) throw InputError(what + " was produced with a different model (hash mismatch)");
}

// ---- fit ----

struct FitArgs {
  std::string model, detections, cameras, joint_map, config, out, hints;
  std::optional<double> face_floor;
  std::optional<double> s1_lambda_data;
  std::optional<int> s1_iterations;
  std::optional<double> s2_lambda_data, s2_lambda_smooth, s2_lambda_pose, s2_lambda_beta;
  std::optional<int> s2_iterations;
  std::optional<double> step_scale, grad_tol;
  std::optional<int> history, max_evals;
  std::optional<double> alpha_init, camera_scale_init, sigma, confidence_floor, alpha_margin;
  bool gradient_check = false;
};

void add_fit(CLI::App& app, FitArgs& a) {
  auto* c = app.add_subcommand("fit", "Fit the body model to 2D keypoint tracks");
  c->add_option("--model", a.model, std::string("Body model file (default: $") + kModelPathEnv + ")");
  c->add_option("--detections", a.detections, "Detection file")->required();
  c->add_option("--cameras", a.cameras, "Camera track file")->required();
  c->add_option("--joint-map", a.joint_map, "Joint map file (default: match joint and keypoint names)");
  c->add_option("--config", a.config, "Fit configuration file; flags below override it");
  c->add_option("--out", a.out, "Output results file")->required();
  c->add_option("--hints", a.hints, "Camera-frame initial estimates, stored as a results file");
  c->add_option("--face-floor", a.face_floor, "Drop frames whose mean face confidence is at or below this");
  c->add_option("--stage1-lambda-data", a.s1_lambda_data);
  c->add_option("--stage1-iterations", a.s1_iterations);
  c->add_option("--stage2-lambda-data", a.s2_lambda_data);
  c->add_option("--stage2-lambda-smooth", a.s2_lambda_smooth);
  c->add_option("--stage2-lambda-pose", a.s2_lambda_pose);
  c->add_option("--stage2-lambda-beta", a.s2_lambda_beta);
  c->add_option("--stage2-iterations", a.s2_iterations);
  c->add_option("--step-scale", a.step_scale, "L-BFGS initial step scale");
  c->add_option("--history", a.history, "L-BFGS history length");
  c->add_option("--grad-tol", a.grad_tol, "L-BFGS gradient tolerance (max norm)");
  c->add_option("--max-evals", a.max_evals, "Line search evaluations per iteration");
  c->add_option("--alpha-init", a.alpha_init);
  c->add_option("--camera-scale-init", a.camera_scale_init);
  c->add_option("--sigma", a.sigma, "Geman-McClure scale in pixels");
  c->add_option("--confidence-floor", a.confidence_floor);
  c->add_option("--alpha-margin", a.alpha_margin);
  c->add_flag("--gradient-check", a.gradient_check, "Check gradients by finite differences before each stage");
}

template <typename T>
void override(T& target, const std::optional<T>& value) {
  if (value) target = *value;
}

int run_fit(const FitArgs& a, std::ostream& out) {
  const std::string model_path = require_model(a.model);
  const BodyModelData data = load_model(model_path);
  const BodyModel model(data);
  DetectionFile det = load_detections(a.detections);
  CameraTrack cams = load_cameras(a.cameras);

  NamedJointMap named = a.joint_map.empty() ? joint_map_by_name(model, det.convention) : load_joint_map(a.joint_map);
  if (named.convention != det.convention) {
    throw InputError("joint map is for convention '" + named.convention + "' but detections use '" +
                     det.convention + "'");
  }
  const JointMap jm = resolve_joint_map(named, model);

  FitConfig cfg = a.config.empty() ? FitConfig{} : load_config(a.config);
  override(cfg.stage1.lambda_data, a.s1_lambda_data);
  override(cfg.stage1.iterations, a.s1_iterations);
  override(cfg.stage2.lambda_data, a.s2_lambda_data);
  override(cfg.stage2.lambda_smooth, a.s2_lambda_smooth);
  override(cfg.stage2.lambda_pose, a.s2_lambda_pose);
  override(cfg.stage2.lambda_beta, a.s2_lambda_beta);
  override(cfg.stage2.iterations, a.s2_iterations);
  override(cfg.lbfgs.step_scale, a.step_scale);
  override(cfg.lbfgs.grad_tol, a.grad_tol);
  override(cfg.lbfgs.history, a.history);
  override(cfg.lbfgs.max_evals_per_iter, a.max_evals);
  override(cfg.alpha_init, a.alpha_init);
  override(cfg.camera_scale_init, a.camera_scale_init);
  override(cfg.robust.sigma, a.sigma);
  override(cfg.confidence_floor, a.confidence_floor);
  override(cfg.alpha_margin, a.alpha_margin);
  if (a.gradient_check) cfg.gradient_check = true;

  if (a.face_floor) {
    FaceFilterResult filtered = filter_by_face_confidence(det, *a.face_floor);
    for (int id : filtered.emptied_tracks) out << "track " << id << ": no frame passes the face filter\n";
    det = std::move(filtered.detections);
  }

  const Fitter fitter(model, jm, cfg);
  std::optional<ResultFile> hints;
  if (!a.hints.empty()) {
    hints = load_results(a.hints);
    hints->validate(model);
  }
  const FitReport report = fitter.fit(det.tracks, cams, hints ? &hints->states : nullptr);
  const ResultFile res = make_result_file(report, det.tracks, model_hash(data));
  save_results(res, a.out);

  out << "stage 1: " << report.stage1.iterations << " iterations, " << report.stage1.message << "\n";
  out << "stage 2: " << report.stage2.iterations << " iterations, " << report.stage2.message << "\n";
  for (const auto& s : report.states) {
    out << "track " << s.track_id << ": alpha " << std::fixed << std::setprecision(4) << s.shape.alpha << "\n";
  }
  for (const auto& r : report.rejected) out << "track " << r.track_id << " rejected: " << r.message << "\n";
  out << "camera scale " << std::setprecision(4) << report.camera_scale << "\n";
  out << "mean reprojection residual " << std::setprecision(4) << report.mean_residual() << " px\n";
  return 0;
}

// ---- synth ----

struct SynthArgs {
  std::string out_dir, model;
  SynthScenario sc;
  std::string camera_path = "static";
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Generate a synthetic scenario with ground truth");
  c->add_option("--out-dir", a.out_dir,
                "Directory for model.json, detections.json, cameras.json, jointmap.json and truth.json")
      ->required();
  c->add_option("--model", a.model, "Body model file (default: the built-in toy model)");
  c->add_option("--seed", a.sc.seed, "Random seed")->capture_default_str();
  c->add_option("--frames", a.sc.frames)->capture_default_str();
  c->add_option("--tracks", a.sc.tracks)->capture_default_str();
  c->add_option("--alpha", a.sc.alphas, "True alpha per track (cycled)")->capture_default_str();
  c->add_option("--noise", a.sc.noise_px, "Gaussian pixel noise")->capture_default_str();
  c->add_option("--camera-path", a.camera_path, "static, orbit or dolly")->capture_default_str();
  c->add_option("--camera-scale", a.sc.camera_scale, "True camera scale")->capture_default_str();
  c->add_option("--distance", a.sc.subject_distance, "Subject distance in meters")->capture_default_str();
  c->add_option("--pose-amplitude", a.sc.pose_amplitude)->capture_default_str();
  c->add_option("--orientation-amplitude", a.sc.orientation_amplitude)->capture_default_str();
  c->add_option("--translation-amplitude", a.sc.translation_amplitude)->capture_default_str();
  c->add_option("--shape-spread", a.sc.shape_spread)->capture_default_str();
  c->add_option("--fx", a.sc.intrinsics.fx)->capture_default_str();
  c->add_option("--fy", a.sc.intrinsics.fy)->capture_default_str();
  c->add_option("--cx", a.sc.intrinsics.cx)->capture_default_str();
  c->add_option("--cy", a.sc.intrinsics.cy)->capture_default_str();
}

int run_synth(SynthArgs a, std::ostream& out) {
  a.sc.camera_path = parse_camera_path(a.camera_path);
  const BodyModelData data = a.model.empty() ? make_toy_body_model() : load_model(a.model);
  const BodyModel model(data);
  const SynthOutput s = synth_generate(model, a.sc);

  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + a.out_dir + "': " + ec.message());

  save_model(data, (dir / "model.json").string());
  save_detections({a.sc.convention, s.detections}, (dir / "detections.json").string());
  save_cameras(s.cameras, (dir / "cameras.json").string());
  save_joint_map(joint_map_by_name(model, a.sc.convention), (dir / "jointmap.json").string());

  ResultFile truth;
  truth.model_hash = model_hash(data);
  truth.states = s.truth;
  truth.camera_scale = s.true_camera_scale;
  for (const auto& t : s.detections) {
    std::vector<int> idx;
    for (const auto& f : t.frames) idx.push_back(f.frame);
    truth.frame_indices.push_back(std::move(idx));
  }
  save_results(truth, (dir / "truth.json").string());
  out << "wrote " << s.detections.size() << " track(s), " << a.sc.frames << " frame(s) to " << a.out_dir << "\n";
  return 0;
}

// ---- metrics ----

struct MetricsArgs {
  std::string results, reference, model, cameras;
  bool as_json = false;
};

void add_metrics(CLI::App& app, MetricsArgs& a) {
  auto* c = app.add_subcommand("metrics", "Compare fitted results against reference results");
  c->add_option("--results", a.results, "Fitted results file")->required();
  c->add_option("--reference", a.reference, "Reference results file")->required();
  c->add_option("--model", a.model, std::string("Body model file (default: $") + kModelPathEnv + ")");
  c->add_option("--cameras", a.cameras, "Camera track; enables PCK on projected joints");
  c->add_flag("--json", a.as_json, "Print a JSON report");
}

struct FrameJoints {
  Points3 local;  // body-local joints
  Eigen::Vector3d translation;
};

std::map<std::pair<int, int>, FrameJoints> frame_joints(const ResultFile& r, const BodyModel& model) {
  std::map<std::pair<int, int>, FrameJoints> out;
  for (std::size_t i = 0; i < r.states.size(); ++i) {
    const PersonState& s = r.states[i];
    for (std::size_t t = 0; t < s.frames.size(); ++t) {
      out[{s.track_id, r.frame_indices[i][t]}] = {model.joint_chain(s.shape, s.frames[t].pose).posed_joints,
                                                  s.frames[t].translation};
    }
  }
  return out;
}

std::optional<Points2> project_all(const CameraTrack& cams, double scale, int frame, const FrameJoints& j) {
  if (frame < 0 || frame >= cams.frame_count()) throw InputError("frame " + std::to_string(frame) + " has no camera");
  Points2 p(j.local.rows(), 2);
  for (Eigen::Index k = 0; k < j.local.rows(); ++k) {
    const Eigen::Vector3d w = j.local.row(k).transpose() + j.translation;
    const Eigen::Vector3d c = world_point_to_camera(cams.poses[frame], scale, w);
    if (c.z() <= kMinDepth) return std::nullopt;
    p.row(k) = project(cams.intrinsics, c).transpose();
  }
  return p;
}

int run_metrics(const MetricsArgs& a, std::ostream& out) {
  const BodyModelData data = load_model(require_model(a.model));
  const BodyModel model(data);
  const std::string hash = model_hash(data);
  const ResultFile res = load_results(a.results);
  const ResultFile ref = load_results(a.reference);
  check_hash(res, hash, "results");
  check_hash(ref, hash, "reference");
  res.validate(model);
  ref.validate(model);
  std::optional<CameraTrack> cams;
  if (!a.cameras.empty()) cams = load_cameras(a.cameras);

  const auto pred = frame_joints(res, model);
  const auto gt = frame_joints(ref, model);
  double sum_mpjpe = 0.0, sum_pa = 0.0, sum_l1 = 0.0, sum_pck05 = 0.0, sum_pck10 = 0.0;
  int frames = 0, pck_frames = 0;
  for (const auto& [key, g] : gt) {
    auto it = pred.find(key);
    if (it == pred.end()) continue;
    const Points3 p_mm = it->second.local * 1000.0, g_mm = g.local * 1000.0;
    sum_mpjpe += mpjpe(p_mm, g_mm);
    sum_pa += pa_mpjpe(p_mm, g_mm);
    Points3 p_rel = it->second.local.rowwise() - it->second.local.row(0);
    Points3 g_rel = g.local.rowwise() - g.local.row(0);
    sum_l1 += kp_l1_3d(p_rel, g_rel);
    ++frames;
    if (cams) {
      const auto pp = project_all(*cams, res.camera_scale, key.second, it->second);
      const auto gp = project_all(*cams, ref.camera_scale, key.second, g);
      if (pp && gp) {
        sum_pck05 += pck(*pp, *gp, 0.05);
        sum_pck10 += pck(*pp, *gp, 0.1);
        ++pck_frames;
      }
    }
  }
  if (frames == 0) throw InputError("results and reference share no (track, frame) pairs");

  std::vector<HeightPair> heights;
  double sum_param = 0.0;
  int param_frames = 0;
  json tracks = json::array();
  for (const auto& s : res.states) {
    for (std::size_t j = 0; j < ref.states.size(); ++j) {
      const PersonState& r = ref.states[j];
      if (r.track_id != s.track_id) continue;
      const HeightPair h{neutral_height(model, r.shape), neutral_height(model, s.shape)};
      heights.push_back(h);
      tracks.push_back({{"id", s.track_id},
                        {"alpha", s.shape.alpha},
                        {"reference_alpha", r.shape.alpha},
                        {"height_m", h.predicted},
                        {"reference_height_m", h.reference}});
      const std::size_t n = std::min(s.frames.size(), r.frames.size());
      for (std::size_t t = 0; t < n; ++t) {
        const auto& pa = s.frames[t].pose.body_pose;
        const auto& pb = r.frames[t].pose.body_pose;
        sum_param += param_l2(Eigen::Map<const Eigen::VectorXd>(pa.data(), pa.size()), s.shape.beta,
                              Eigen::Map<const Eigen::VectorXd>(pb.data(), pb.size()), r.shape.beta);
        ++param_frames;
      }
    }
  }

  json report = {{"frames", frames},
                 {"mpjpe_mm", sum_mpjpe / frames},
                 {"pa_mpjpe_mm", sum_pa / frames},
                 {"kp_l1_3d_m", sum_l1 / frames},
                 {"param_l2", param_frames ? sum_param / param_frames : 0.0},
                 {"ahd_m", heights.empty() ? 0.0 : ahd(heights)},
                 {"aphd_percent", heights.empty() ? 0.0 : aphd(heights)},
                 {"mean_reprojection_residual_px", mean_reprojection_residual(res.diagnostics.frame_residuals)},
                 {"tracks", tracks}};
  if (pck_frames > 0) {
    report["pck_0.05"] = sum_pck05 / pck_frames;
    report["pck_0.1"] = sum_pck10 / pck_frames;
  }
  if (a.as_json) {
    out << report.dump(2) << "\n";
    return 0;
  }
  out << std::fixed << std::setprecision(4);
  out << "frames compared      " << frames << "\n";
  out << "MPJPE                " << report["mpjpe_mm"].get<double>() << " mm\n";
  out << "PA-MPJPE             " << report["pa_mpjpe_mm"].get<double>() << " mm\n";
  out << "3D keypoint L1       " << report["kp_l1_3d_m"].get<double>() << " m\n";
  out << "parameter L2         " << report["param_l2"].get<double>() << "\n";
  out << "AHD                  " << report["ahd_m"].get<double>() << " m\n";
  out << "APHD                 " << report["aphd_percent"].get<double>() << " %\n";
  out << "reprojection         " << report["mean_reprojection_residual_px"].get<double>() << " px\n";
  if (pck_frames > 0) {
    out << "PCK@0.05             " << report["pck_0.05"].get<double>() << "\n";
    out << "PCK@0.1              " << report["pck_0.1"].get<double>() << "\n";
  }
  for (const auto& t : tracks) {
    out << "track " << t["id"].get<int>() << ": alpha " << t["alpha"].get<double>() << " (reference "
        << t["reference_alpha"].get<double>() << ")\n";
  }
  return 0;
}

// ---- export-mesh ----

struct ExportArgs {
  std::string results, model, out_dir;
  std::optional<int> track, frame;
};

void add_export(CLI::App& app, ExportArgs& a) {
  auto* c = app.add_subcommand("export-mesh", "Write fitted meshes as OBJ files");
  c->add_option("--results", a.results, "Results file")->required();
  c->add_option("--model", a.model, std::string("Body model file (default: $") + kModelPathEnv + ")");
  c->add_option("--out-dir", a.out_dir, "Output directory")->required();
  c->add_option("--track", a.track, "Only this track id");
  c->add_option("--frame", a.frame, "Only this frame index");
}

int run_export(const ExportArgs& a, std::ostream& out) {
  const BodyModelData data = load_model(require_model(a.model));
  const BodyModel model(data);
  const ResultFile res = load_results(a.results);
  check_hash(res, model_hash(data), "results");
  res.validate(model);
  std::error_code ec;
  fs::create_directories(a.out_dir, ec);
  if (ec) throw IoError("cannot create '" + a.out_dir + "': " + ec.message());
  int written = 0;
  for (std::size_t i = 0; i < res.states.size(); ++i) {
    const PersonState& s = res.states[i];
    if (a.track && *a.track != s.track_id) continue;
    for (std::size_t t = 0; t < s.frames.size(); ++t) {
      const int frame = res.frame_indices[i][t];
      if (a.frame && *a.frame != frame) continue;
      const MeshResult mesh = forward(model, s.shape, s.frames[t].pose);
      const std::string name = "track" + std::to_string(s.track_id) + "_frame" + std::to_string(frame) + ".obj";
      export_obj(mesh, data.faces, s.frames[t].translation, (fs::path(a.out_dir) / name).string());
      ++written;
    }
  }
  if (written == 0) throw InputError("no frames matched the selection");
  out << "wrote " << written << " mesh(es) to " << a.out_dir << "\n";
  return 0;
}

// ---- package ----

struct PackageArgs {
  std::vector<std::string> results;
  std::string model, out_dir;
  bool meshes = false, overwrite = false;
};

void add_package(CLI::App& app, PackageArgs& a) {
  auto* c = app.add_subcommand("package", "Bundle results into an image-free dataset package");
  c->add_option("--results", a.results, "Results files as ID=PATH or PATH (id from the file stem)")->required();
  c->add_option("--model", a.model, std::string("Body model file (default: $") + kModelPathEnv + ")");
  c->add_option("--out-dir", a.out_dir, "Package directory")->required();
  c->add_flag("--meshes", a.meshes, "Include per-frame OBJ meshes");
  c->add_flag("--overwrite", a.overwrite, "Replace an existing package directory");
}

int run_package(const PackageArgs& a, std::ostream& out) {
  const BodyModelData data = load_model(require_model(a.model));
  const BodyModel model(data);
  std::vector<SequenceResult> seqs;
  for (const auto& item : a.results) {
    const auto eq = item.find('=');
    const std::string path = eq == std::string::npos ? item : item.substr(eq + 1);
    const std::string id = eq == std::string::npos ? fs::path(item).stem().string() : item.substr(0, eq);
    seqs.push_back({id, load_results(path)});
  }
  PackageOptions opts;
  opts.meshes = a.meshes;
  opts.overwrite = a.overwrite;
  const DatasetPackage pkg = package_dataset(seqs, model_hash(data), a.out_dir, opts, &model);
  for (const auto& e : pkg.sequences) out << e.id << ": " << e.tracks << " track(s), " << e.frames << " frame(s)\n";
  return 0;
}

struct VerifyArgs {
  std::string dir;
};

int run_verify(const VerifyArgs& a, std::ostream& out) {
  const auto problems = verify_package(a.dir);
  for (const auto& p : problems) out << p << "\n";
  if (!problems.empty()) throw InputError("package '" + a.dir + "' failed verification");
  out << "package ok\n";
  return 0;
}

// ---- filter-faces ----

struct FilterArgs {
  std::string detections, out;
  double floor = 0.7;
};

int run_filter(const FilterArgs& a, std::ostream& out) {
  const FaceFilterResult r = filter_by_face_confidence(load_detections(a.detections), a.floor);
  save_detections(r.detections, a.out);
  for (int id : r.emptied_tracks) out << "track " << id << ": emptied\n";
  return 0;
}

const char* category(const std::exception& e) {
  if (dynamic_cast<const InputError*>(&e)) return "input";
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const IoError*>(&e)) return "io";
  if (dynamic_cast<const ModelError*>(&e)) return "model";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical";
  if (dynamic_cast<const BehindCameraError*>(&e)) return "geometry";
  if (dynamic_cast<const Error*>(&e)) return "error";
  return "internal";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit an age-interpolated body model to 2D keypoint tracks", "aionfit"};
  app.require_subcommand(1);
  FitArgs fit;
  SynthArgs synth;
  MetricsArgs metrics;
  ExportArgs exp;
  PackageArgs pkg;
  VerifyArgs verify;
  FilterArgs filter;
  add_fit(app, fit);
  add_synth(app, synth);
  add_metrics(app, metrics);
  add_export(app, exp);
  add_package(app, pkg);
  auto* v = app.add_subcommand("verify-package", "Check a dataset package for consistency and image payloads");
  v->add_option("dir", verify.dir, "Package directory")->required();
  auto* f = app.add_subcommand("filter-faces", "Drop frames with low facial keypoint confidence");
  f->add_option("--detections", filter.detections, "Detection file")->required();
  f->add_option("--out", filter.out, "Filtered detection file")->required();
  f->add_option("--floor", filter.floor, "Mean facial confidence floor")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "fit") return run_fit(fit, out);
    if (name == "synth") return run_synth(synth, out);
    if (name == "metrics") return run_metrics(metrics, out);
    if (name == "export-mesh") return run_export(exp, out);
    if (name == "package") return run_package(pkg, out);
    if (name == "verify-package") return run_verify(verify, out);
    if (name == "filter-faces") return run_filter(filter, out);
    err << "error [usage]: unknown subcommand " << name << "\n";
    return 2;
  } catch (const UsageError& e) {
    err << "error [usage]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error [" << category(e) << "]: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace aionfit
