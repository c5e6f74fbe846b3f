#include "aionfit/io.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "aionfit/errors.hpp"

namespace aionfit {

using json = nlohmann::json;

namespace {

// Tracks the record path so schema errors can point at the offending entry.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& msg) const { throw InputError(path_ + ": " + msg); }

  Reader at(const std::string& key) const {
    if (!j_.is_object()) fail("expected an object");
    auto it = j_.find(key);
    if (it == j_.end()) fail("missing field '" + key + "'");
    return Reader(*it, path_ + "." + key);
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key); }

  Reader at(std::size_t i) const {
    if (!j_.is_array() || i >= j_.size()) fail("index " + std::to_string(i) + " out of range");
    return Reader(j_[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double num() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }

  int integer() const {
    if (!j_.is_number_integer()) fail("expected an integer");
    const auto v = j_.get<long long>();
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail("integer out of range");
    return static_cast<int>(v);
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected a boolean");
    return j_.get<bool>();
  }

  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  Eigen::MatrixXd matrix(Eigen::Index cols) const {
    const std::size_t n = size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), cols);
    for (std::size_t r = 0; r < n; ++r) {
      Reader row = at(r);
      if (row.size() != static_cast<std::size_t>(cols)) {
        row.fail("expected " + std::to_string(cols) + " columns");
      }
      for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = row.at(c).num();
    }
    return m;
  }

  // Row-major matrix whose column count is taken from the first row.
  Eigen::MatrixXd matrix() const {
    if (size() == 0) return Eigen::MatrixXd(0, 0);
    return matrix(static_cast<Eigen::Index>(at(0).size()));
  }

  Eigen::VectorXd vector() const {
    const std::size_t n = size();
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = at(i).num();
    return v;
  }

  template <int N>
  Eigen::Matrix<double, N, 1> fixed_vector() const {
    if (size() != static_cast<std::size_t>(N)) fail("expected " + std::to_string(N) + " entries");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v(i) = at(i).num();
    return v;
  }

 private:
  const json& j_;
  std::string path_;
};

template <typename Derived>
json matrix_json(const Eigen::MatrixBase<Derived>& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(static_cast<double>(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename Derived>
json vector_json(const Eigen::MatrixBase<Derived>& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(static_cast<double>(v(i)));
  return a;
}

json parse_document(const std::string& text, const char* schema) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("malformed ") + schema + " document: " + e.what());
  }
  if (!doc.is_object() || !doc.contains("version") || !doc["version"].is_string()) {
    throw InputError(std::string("document has no version tag (expected ") + schema + ")");
  }
  const std::string version = doc["version"].get<std::string>();
  if (version != schema) {
    throw InputError("unsupported version '" + version + "' (expected " + schema + ")");
  }
  return doc;
}

std::string dump(const json& j) { return j.dump() + "\n"; }

const char* up_axis_name(UpAxis a) {
  switch (a) {
    case UpAxis::X: return "x";
    case UpAxis::Y: return "y";
    case UpAxis::Z: return "z";
  }
  return "y";
}

UpAxis parse_up_axis(const Reader& r) {
  const std::string s = r.str();
  if (s == "x") return UpAxis::X;
  if (s == "y") return UpAxis::Y;
  if (s == "z") return UpAxis::Z;
  r.fail("unknown up axis '" + s + "'");
}

json weights_json(const StageWeights& w) {
  return {{"lambda_data", w.lambda_data},
          {"lambda_smooth", w.lambda_smooth},
          {"lambda_pose", w.lambda_pose},
          {"lambda_beta", w.lambda_beta},
          {"iterations", w.iterations}};
}

StageWeights parse_weights(const Reader& r) {
  StageWeights w;
  w.lambda_data = r.at("lambda_data").num();
  w.lambda_smooth = r.at("lambda_smooth").num();
  w.lambda_pose = r.at("lambda_pose").num();
  w.lambda_beta = r.at("lambda_beta").num();
  w.iterations = r.at("iterations").integer();
  return w;
}

json stage_json(const StageDiagnostics& s) {
  json trace = json::array();
  for (double v : s.trace) trace.push_back(v);
  return {{"trace", trace},
          {"iterations", s.iterations},
          {"evaluations", s.evaluations},
          {"converged", s.converged},
          {"line_search_failed", s.line_search_failed},
          {"message", s.message}};
}

StageDiagnostics parse_stage(const Reader& r) {
  StageDiagnostics s;
  Reader trace = r.at("trace");
  for (std::size_t i = 0; i < trace.size(); ++i) s.trace.push_back(trace.at(i).num());
  s.iterations = r.at("iterations").integer();
  s.evaluations = r.at("evaluations").integer();
  s.converged = r.at("converged").boolean();
  s.line_search_failed = r.at("line_search_failed").boolean();
  s.message = r.at("message").str();
  return s;
}

StageDiagnostics to_diagnostics(const StageReport& s) {
  return {s.trace, s.iterations, s.evaluations, s.converged, s.line_search_failed, s.message};
}

}  // namespace

// ---- model ----

std::string serialize_model(const BodyModelData& m) {
  json faces = json::array();
  for (const auto& f : m.faces) faces.push_back({f[0], f[1], f[2]});
  json doc = {{"version", kModelSchema},
              {"up_axis", up_axis_name(m.up_axis)},
              {"joint_names", m.joint_names},
              {"parents", m.parents},
              {"adult_template", matrix_json(m.adult_template)},
              {"child_template", matrix_json(m.child_template)},
              {"shape_blendshapes", matrix_json(m.shape_blendshapes)},
              {"pose_blendshapes", matrix_json(m.pose_blendshapes)},
              {"joint_regressor", matrix_json(m.joint_regressor)},
              {"skinning_weights", matrix_json(m.skinning_weights)},
              {"faces", faces}};
  return dump(doc);
}

BodyModelData parse_model(const std::string& text) {
  const json doc = parse_document(text, kModelSchema);
  const Reader r(doc, "model");
  BodyModelData m;
  m.up_axis = parse_up_axis(r.at("up_axis"));
  Reader names = r.at("joint_names");
  for (std::size_t i = 0; i < names.size(); ++i) m.joint_names.push_back(names.at(i).str());
  Reader parents = r.at("parents");
  for (std::size_t i = 0; i < parents.size(); ++i) m.parents.push_back(parents.at(i).integer());
  m.adult_template = r.at("adult_template").matrix(3);
  m.child_template = r.at("child_template").matrix(3);
  m.shape_blendshapes = r.at("shape_blendshapes").matrix(kNumBetas);
  m.pose_blendshapes = r.at("pose_blendshapes").matrix();
  m.joint_regressor = r.at("joint_regressor").matrix();
  m.skinning_weights = r.at("skinning_weights").matrix();
  Reader faces = r.at("faces");
  for (std::size_t i = 0; i < faces.size(); ++i) {
    Reader f = faces.at(i);
    if (f.size() != 3) f.fail("expected 3 vertex indices");
    m.faces.push_back({f.at(0).integer(), f.at(1).integer(), f.at(2).integer()});
  }
  return m;
}

// ---- cameras ----

std::string serialize_cameras(const CameraTrack& c) {
  json poses = json::array();
  for (const auto& p : c.poses) poses.push_back({{"R", matrix_json(p.R)}, {"T", vector_json(p.T)}});
  json doc = {{"version", kCamerasSchema},
              {"intrinsics", {{"fx", c.intrinsics.fx}, {"fy", c.intrinsics.fy}, {"cx", c.intrinsics.cx},
                              {"cy", c.intrinsics.cy}}},
              {"scale", c.scale},
              {"poses", poses}};
  return dump(doc);
}

CameraTrack parse_cameras(const std::string& text) {
  const json doc = parse_document(text, kCamerasSchema);
  const Reader r(doc, "cameras");
  CameraTrack c;
  Reader k = r.at("intrinsics");
  c.intrinsics.fx = k.at("fx").num();
  c.intrinsics.fy = k.at("fy").num();
  c.intrinsics.cx = k.at("cx").num();
  c.intrinsics.cy = k.at("cy").num();
  c.scale = r.at("scale").num();
  Reader poses = r.at("poses");
  for (std::size_t i = 0; i < poses.size(); ++i) {
    Reader p = poses.at(i);
    CameraPose pose;
    Reader rot = p.at("R");
    if (rot.size() != 3) rot.fail("expected a 3x3 matrix");
    pose.R = rot.matrix(3);
    pose.T = p.at("T").fixed_vector<3>();
    c.poses.push_back(pose);
  }
  return c;
}

// ---- joint map ----

std::string serialize_joint_map(const NamedJointMap& m) {
  json pairs = json::array();
  for (const auto& [joint, kp] : m.pairs) pairs.push_back({{"joint", joint}, {"keypoint", kp}});
  return dump({{"version", kJointMapSchema}, {"convention", m.convention}, {"pairs", pairs}});
}

NamedJointMap parse_joint_map(const std::string& text) {
  const json doc = parse_document(text, kJointMapSchema);
  const Reader r(doc, "jointmap");
  NamedJointMap m;
  m.convention = r.at("convention").str();
  Reader pairs = r.at("pairs");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Reader p = pairs.at(i);
    m.pairs.emplace_back(p.at("joint").str(), p.at("keypoint").str());
  }
  return m;
}

// ---- config ----

std::string serialize_config(const FitConfig& c) {
  const bool external = c.prior.kind == PosePrior::Kind::ExternalLatent;
  json doc = {{"version", kConfigSchema},
              {"stage1", weights_json(c.stage1)},
              {"stage2", weights_json(c.stage2)},
              {"lbfgs", {{"step_scale", c.lbfgs.step_scale},
                         {"history", c.lbfgs.history},
                         {"grad_tol", c.lbfgs.grad_tol},
                         {"max_evals_per_iter", c.lbfgs.max_evals_per_iter},
                         {"c1", c.lbfgs.c1},
                         {"c2", c.lbfgs.c2}}},
              {"alpha_init", c.alpha_init},
              {"camera_scale_init", c.camera_scale_init},
              {"sigma", c.robust.sigma},
              {"confidence_floor", c.confidence_floor},
              {"alpha_margin", c.alpha_margin},
              {"pose_prior", {{"kind", external ? "external_latent" : "gaussian"},
                              {"latent_dim", c.prior.latent_dim}}},
              {"gradient_check", c.gradient_check}};
  return dump(doc);
}

FitConfig parse_config(const std::string& text) {
  const json doc = parse_document(text, kConfigSchema);
  const Reader r(doc, "config");
  FitConfig c;
  c.stage1 = parse_weights(r.at("stage1"));
  c.stage2 = parse_weights(r.at("stage2"));
  Reader l = r.at("lbfgs");
  c.lbfgs.step_scale = l.at("step_scale").num();
  c.lbfgs.history = l.at("history").integer();
  c.lbfgs.grad_tol = l.at("grad_tol").num();
  c.lbfgs.max_evals_per_iter = l.at("max_evals_per_iter").integer();
  c.lbfgs.c1 = l.at("c1").num();
  c.lbfgs.c2 = l.at("c2").num();
  c.alpha_init = r.at("alpha_init").num();
  c.camera_scale_init = r.at("camera_scale_init").num();
  c.robust.sigma = r.at("sigma").num();
  c.confidence_floor = r.at("confidence_floor").num();
  c.alpha_margin = r.at("alpha_margin").num();
  Reader prior = r.at("pose_prior");
  const std::string kind = prior.at("kind").str();
  if (kind == "gaussian") {
    c.prior = PosePrior::gaussian();
  } else if (kind == "external_latent") {
    c.prior = PosePrior::external_latent();
  } else {
    prior.at("kind").fail("unknown pose prior '" + kind + "'");
  }
  c.prior.latent_dim = prior.at("latent_dim").integer();
  c.gradient_check = r.at("gradient_check").boolean();
  return c;
}

// ---- results ----

int ResultFile::frame_count() const {
  int n = 0;
  for (const auto& s : states) n += static_cast<int>(s.frames.size());
  return n;
}

void ResultFile::validate(const BodyModel& model) const {
  if (frame_indices.size() != states.size()) throw InputError("results: frame index lists do not match tracks");
  if (!(camera_scale > 0.0)) throw InputError("results: camera scale must be positive");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const PersonState& s = states[i];
    if (frame_indices[i].size() != s.frames.size()) {
      throw InputError("results: track " + std::to_string(s.track_id) + " frame index count mismatch");
    }
    if (!(s.shape.alpha >= 0.0 && s.shape.alpha <= 1.0)) {
      throw InputError("results: track " + std::to_string(s.track_id) + " alpha outside [0,1]");
    }
    for (const auto& f : s.frames) {
      if (f.pose.body_pose.rows() != model.joint_count()) {
        throw InputError("results: track " + std::to_string(s.track_id) + " has " +
                         std::to_string(f.pose.body_pose.rows()) + " body joints, model has " +
                         std::to_string(model.joint_count()));
      }
    }
  }
}

ResultFile make_result_file(const FitReport& report, const std::vector<KeypointTrack>& detections,
                            const std::string& hash) {
  ResultFile out;
  out.model_hash = hash;
  out.states = report.states;
  out.camera_scale = report.camera_scale;
  for (const PersonState& s : report.states) {
    const KeypointTrack* track = nullptr;
    for (const auto& t : detections) {
      if (t.id == s.track_id) track = &t;
    }
    if (!track || track->frames.size() != s.frames.size()) {
      throw InputError("no detection track matches fitted track " + std::to_string(s.track_id));
    }
    std::vector<int> idx;
    for (const auto& f : track->frames) idx.push_back(f.frame);
    out.frame_indices.push_back(std::move(idx));
  }
  out.diagnostics.stage1 = to_diagnostics(report.stage1);
  out.diagnostics.stage2 = to_diagnostics(report.stage2);
  out.diagnostics.frame_residuals = report.frame_residuals;
  out.diagnostics.rejected = report.rejected;
  return out;
}

std::string serialize_results(const ResultFile& res) {
  json tracks = json::array();
  for (std::size_t i = 0; i < res.states.size(); ++i) {
    const PersonState& s = res.states[i];
    json frames = json::array();
    for (std::size_t t = 0; t < s.frames.size(); ++t) {
      const FrameState& f = s.frames[t];
      frames.push_back({{"frame", res.frame_indices.at(i).at(t)},
                        {"global_orient", vector_json(f.pose.global_orient)},
                        {"body_pose", matrix_json(f.pose.body_pose)},
                        {"translation", vector_json(f.translation)}});
    }
    tracks.push_back({{"id", s.track_id},
                      {"beta", vector_json(s.shape.beta)},
                      {"alpha", s.shape.alpha},
                      {"frames", frames}});
  }
  json residuals = json::array();
  for (const auto& track : res.diagnostics.frame_residuals) {
    json row = json::array();
    for (double v : track) row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
    residuals.push_back(std::move(row));
  }
  json rejected = json::array();
  for (const auto& d : res.diagnostics.rejected) rejected.push_back({{"id", d.track_id}, {"message", d.message}});
  json doc = {{"version", kResultsSchema},
              {"model_hash", res.model_hash},
              {"camera_scale", res.camera_scale},
              {"tracks", tracks},
              {"diagnostics", {{"stage1", stage_json(res.diagnostics.stage1)},
                               {"stage2", stage_json(res.diagnostics.stage2)},
                               {"frame_residuals", residuals},
                               {"rejected", rejected}}}};
  return dump(doc);
}

ResultFile parse_results(const std::string& text) {
  const json doc = parse_document(text, kResultsSchema);
  const Reader r(doc, "results");
  ResultFile res;
  res.model_hash = r.at("model_hash").str();
  res.camera_scale = r.at("camera_scale").num();
  Reader tracks = r.at("tracks");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    Reader tr = tracks.at(i);
    PersonState s;
    s.track_id = tr.at("id").integer();
    s.shape.beta = tr.at("beta").fixed_vector<kNumBetas>();
    s.shape.alpha = tr.at("alpha").num();
    std::vector<int> idx;
    Reader frames = tr.at("frames");
    for (std::size_t t = 0; t < frames.size(); ++t) {
      Reader fr = frames.at(t);
      FrameState f;
      idx.push_back(fr.at("frame").integer());
      f.pose.global_orient = fr.at("global_orient").fixed_vector<3>();
      f.pose.body_pose = fr.at("body_pose").matrix(3);
      f.translation = fr.at("translation").fixed_vector<3>();
      s.frames.push_back(std::move(f));
    }
    res.states.push_back(std::move(s));
    res.frame_indices.push_back(std::move(idx));
  }
  Reader diag = r.at("diagnostics");
  res.diagnostics.stage1 = parse_stage(diag.at("stage1"));
  res.diagnostics.stage2 = parse_stage(diag.at("stage2"));
  Reader residuals = diag.at("frame_residuals");
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    Reader row = residuals.at(i);
    std::vector<double> values;
    for (std::size_t t = 0; t < row.size(); ++t) {
      Reader v = row.at(t);
      values.push_back(v.raw().is_null() ? std::numeric_limits<double>::quiet_NaN() : v.num());
    }
    res.diagnostics.frame_residuals.push_back(std::move(values));
  }
  Reader rejected = diag.at("rejected");
  for (std::size_t i = 0; i < rejected.size(); ++i) {
    Reader d = rejected.at(i);
    res.diagnostics.rejected.push_back({d.at("id").integer(), d.at("message").str()});
  }
  return res;
}

// ---- detections ----

void DetectionFile::validate() const {
  const KeypointConvention conv = keypoint_convention(convention);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const KeypointTrack& tr = tracks[i];
    for (std::size_t j = i + 1; j < tracks.size(); ++j) {
      if (tracks[j].id == tr.id) throw InputError("detections: duplicate track id " + std::to_string(tr.id));
    }
    for (std::size_t t = 0; t < tr.frames.size(); ++t) {
      const KeypointFrame& f = tr.frames[t];
      const std::string where = "detections: track " + std::to_string(tr.id) + " record " + std::to_string(t);
      if (f.frame < 0) throw InputError(where + ": negative frame index");
      if (t > 0 && f.frame <= tr.frames[t - 1].frame) throw InputError(where + ": frame indices must strictly increase");
      if (f.points.rows() != conv.size() || f.confidences.size() != conv.size()) {
        throw InputError(where + ": expected " + std::to_string(conv.size()) + " keypoints for " + convention);
      }
      if (!f.points.allFinite()) throw InputError(where + ": non-finite keypoint");
      for (Eigen::Index k = 0; k < f.confidences.size(); ++k) {
        if (!(f.confidences(k) >= 0.0 && f.confidences(k) <= 1.0)) throw InputError(where + ": confidence outside [0,1]");
      }
    }
  }
}

std::string serialize_detections(const DetectionFile& d) {
  json tracks = json::array();
  for (const auto& tr : d.tracks) {
    json frames = json::array();
    for (const auto& f : tr.frames) {
      frames.push_back({{"frame", f.frame},
                        {"points", matrix_json(f.points)},
                        {"confidences", vector_json(f.confidences)}});
    }
    tracks.push_back({{"id", tr.id}, {"frames", frames}});
  }
  return dump({{"version", kDetectionsSchema}, {"convention", d.convention}, {"tracks", tracks}});
}

DetectionFile parse_detections(const std::string& text) {
  const json doc = parse_document(text, kDetectionsSchema);
  const Reader r(doc, "detections");
  DetectionFile d;
  d.convention = r.at("convention").str();
  const KeypointConvention conv = keypoint_convention(d.convention);
  Reader tracks = r.at("tracks");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    Reader tr = tracks.at(i);
    KeypointTrack track;
    track.id = tr.at("id").integer();
    Reader frames = tr.at("frames");
    for (std::size_t t = 0; t < frames.size(); ++t) {
      Reader fr = frames.at(t);
      KeypointFrame f;
      f.frame = fr.at("frame").integer();
      Reader pts = fr.at("points");
      if (pts.size() != static_cast<std::size_t>(conv.size())) {
        pts.fail("expected " + std::to_string(conv.size()) + " keypoints");
      }
      f.points = pts.matrix(2);
      f.confidences = fr.at("confidences").vector();
      track.frames.push_back(std::move(f));
    }
    d.tracks.push_back(std::move(track));
  }
  d.validate();
  return d;
}

// ---- files ----

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

template <typename Parse>
auto load_with_context(const std::string& path, Parse parse) {
  const std::string text = read_text_file(path);
  try {
    return parse(text);
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace

BodyModelData load_model(const std::string& path) { return load_with_context(path, parse_model); }
void save_model(const BodyModelData& m, const std::string& path) { write_text_file(path, serialize_model(m)); }
CameraTrack load_cameras(const std::string& path) { return load_with_context(path, parse_cameras); }
void save_cameras(const CameraTrack& c, const std::string& path) { write_text_file(path, serialize_cameras(c)); }
NamedJointMap load_joint_map(const std::string& path) { return load_with_context(path, parse_joint_map); }
void save_joint_map(const NamedJointMap& m, const std::string& path) { write_text_file(path, serialize_joint_map(m)); }
FitConfig load_config(const std::string& path) { return load_with_context(path, parse_config); }
void save_config(const FitConfig& c, const std::string& path) { write_text_file(path, serialize_config(c)); }
ResultFile load_results(const std::string& path) { return load_with_context(path, parse_results); }
void save_results(const ResultFile& r, const std::string& path) { write_text_file(path, serialize_results(r)); }
DetectionFile load_detections(const std::string& path) { return load_with_context(path, parse_detections); }
void save_detections(const DetectionFile& d, const std::string& path) {
  write_text_file(path, serialize_detections(d));
}

std::string model_hash(const BodyModelData& model) {
  const std::string text = serialize_model(model);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string resolve_model_path(const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  const char* env = std::getenv(kModelPathEnv);
  return env ? std::string(env) : std::string();
}

FaceFilterResult filter_by_face_confidence(const DetectionFile& detections, double floor) {
  const KeypointConvention conv = keypoint_convention(detections.convention);
  if (conv.facial.empty()) {
    throw ConfigError("keypoint convention '" + conv.name + "' declares no facial keypoints");
  }
  FaceFilterResult out;
  out.detections.convention = detections.convention;
  for (const auto& tr : detections.tracks) {
    KeypointTrack kept;
    kept.id = tr.id;
    for (const auto& f : tr.frames) {
      double sum = 0.0;
      for (int k : conv.facial) sum += f.confidences(k);
      if (sum / static_cast<double>(conv.facial.size()) > floor) kept.frames.push_back(f);
    }
    if (kept.frames.empty()) out.emptied_tracks.push_back(tr.id);
    out.detections.tracks.push_back(std::move(kept));
  }
  return out;
}

}  // namespace aionfit
