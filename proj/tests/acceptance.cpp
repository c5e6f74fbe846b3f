// Prints one PASS/FAIL line per acceptance criterion; exits nonzero on any failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "aionfit/errors.hpp"
#include "aionfit/fitter.hpp"
#include "aionfit/io.hpp"
#include "aionfit/metrics.hpp"
#include "aionfit/synth.hpp"
#include "support.hpp"

using namespace aionfit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

const BodyModel& toy() {
  static const BodyModel model(make_toy_body_model());
  return model;
}

double root_aligned_mpjpe_mm(const PersonState& a, const PersonState& b) {
  double sum = 0.0;
  for (std::size_t t = 0; t < a.frames.size(); ++t) {
    const Vertices ja = toy().joint_chain(a.shape, a.frames[t].pose).posed_joints;
    const Vertices jb = toy().joint_chain(b.shape, b.frames[t].pose).posed_joints;
    sum += mpjpe(ja * 1000.0, jb * 1000.0);
  }
  return sum / static_cast<double>(a.frames.size());
}

struct SeqFit {
  double alpha_true = 0.0;
  std::uint64_t seed = 0;
  FitReport report;
  PersonState truth;
};

SeqFit fit_sequence(double alpha, std::uint64_t seed) {
  SynthScenario sc;
  sc.frames = 30;
  sc.alphas = {alpha};
  sc.seed = seed;
  const SynthOutput s = synth_generate(toy(), sc);
  const Fitter fitter(toy(), s.joint_map, FitConfig{});
  return {alpha, seed, fitter.fit(s.detections, s.cameras), s.truth[0]};
}

bool monotone(const StageReport& r) {
  for (std::size_t i = 1; i < r.trace.size(); ++i)
    if (!(r.trace[i] <= r.trace[i - 1])) return false;
  return true;
}

std::vector<SeqFit>& fits() {
  static std::vector<SeqFit> all;
  return all;
}

Outcome criterion1() {
  Outcome o;
  const FitConfig c;
  o.require(c.stage1.lambda_data == 0.001 && c.stage1.iterations == 30, "stage 1 defaults");
  o.require(c.stage2.lambda_smooth == 5.0 && c.stage2.lambda_beta == 0.05 && c.stage2.lambda_pose == 0.04 &&
                c.stage2.iterations == 60,
            "stage 2 defaults");
  o.require(c.alpha_init == 1.0 && c.camera_scale_init == 1.0 && c.lbfgs.step_scale == 1.0, "initial values");
  std::ostringstream d;
  d << "stage1 {" << c.stage1.lambda_data << ", " << c.stage1.iterations << "} stage2 {smooth "
    << c.stage2.lambda_smooth << ", beta " << c.stage2.lambda_beta << ", pose " << c.stage2.lambda_pose << ", "
    << c.stage2.iterations << "}";
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome criterion2() {
  Outcome o;
  const double v = aphd({{1.330, 1.460}});
  o.require(std::abs(v + 9.774) <= 0.001, "APHD value");
  o.require(aphd({{1.5, 1.4}}) > 0.0 && aphd({{1.4, 1.5}}) < 0.0, "sign convention");
  if (o.pass) o.detail = "APHD " + std::to_string(v) + " %";
  return o;
}

Outcome criterion3() {
  Outcome o;
  test::Rng rng(2024);
  double worst = 0.0;
  const int problems = 12;
  for (int i = 0; i < problems; ++i) {
    const int vertices = std::min(20 + 3 * i, 50);
    const int joints = 2 + i % 4;       // root plus at most four
    const int frames = 1 + i % 5;
    const int persons = 1 + i % 2;
    const test::ToyProblem p = test::random_toy_problem(rng, vertices, joints, frames, persons);
    const BodyModel model(p.data);
    const ObjectiveContext ctx{model, p.cameras, p.detections, p.joint_map};
    const FreeParameterLayout layout(p.states, StageKind::Full, true, 0.0);
    worst = std::max(worst, check_gradient(p.states, ctx, FitConfig{}.stage2, layout).max_relative_error);
  }
  o.require(worst < 1e-4, "relative error " + std::to_string(worst));
  if (o.pass) o.detail = std::to_string(problems) + " problems, worst relative error " + std::to_string(worst);
  return o;
}

Outcome criterion4() {
  Outcome o;
  const SeqFit f = fit_sequence(1.0, 101);
  fits().push_back(f);
  const double res = f.report.mean_residual();
  const double err = root_aligned_mpjpe_mm(f.report.states[0], f.truth);
  o.require(res < 0.5, "residual " + std::to_string(res) + " px");
  o.require(err < 10.0, "MPJPE " + std::to_string(err) + " mm");
  if (o.pass) o.detail = "residual " + std::to_string(res) + " px, MPJPE " + std::to_string(err) + " mm";
  return o;
}

Outcome criterion5() {
  Outcome o;
  double child_min = 1.0, adult_max = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (double alpha : {1.0, 0.0}) {
      SeqFit f = fit_sequence(alpha, 500 + seed);
      const double a = f.report.states[0].shape.alpha;
      if (alpha == 1.0) child_min = std::min(child_min, a);
      else adult_max = std::max(adult_max, a);
      fits().push_back(std::move(f));
    }
  }
  o.require(child_min >= 0.85, "child alpha " + std::to_string(child_min));
  o.require(adult_max <= 0.15, "adult alpha " + std::to_string(adult_max));
  if (o.pass) o.detail = "min child alpha " + std::to_string(child_min) + ", max adult alpha " + std::to_string(adult_max);
  return o;
}

Outcome criterion6() {
  Outcome o;
  std::size_t steps = 0;
  for (const auto& f : fits()) {
    o.require(monotone(f.report.stage1) && monotone(f.report.stage2),
              "non-monotone trace at seed " + std::to_string(f.seed));
    steps += f.report.stage1.trace.size() + f.report.stage2.trace.size();
  }
  o.require(fits().size() == 21, "expected 21 fitted sequences");
  if (o.pass) o.detail = std::to_string(fits().size()) + " fits, " + std::to_string(steps) + " trace entries";
  return o;
}

Outcome criterion7() {
  Outcome o;
  test::Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const BodyModelData d = test::random_model(rng, 5 + i % 40, 2 + i % 6, i % 2 == 0);
    const BodyModel model(d);
    const ShapeParams shape = test::random_shape(rng, 1.0);
    const PoseParams pose = test::random_pose(rng, model.joint_count(), 1.5);
    const MeshResult a = forward(model, shape, pose), b = test::naive_forward(d, shape, pose);
    worst = std::max({worst, (a.vertices - b.vertices).cwiseAbs().maxCoeff(), (a.joints - b.joints).cwiseAbs().maxCoeff()});
    o.require(interpolate_template(model, 0.0) == d.adult_template, "alpha 0 endpoint");
    o.require(interpolate_template(model, 1.0) == d.child_template, "alpha 1 endpoint");
  }
  o.require(worst <= 1e-10, "max deviation " + std::to_string(worst));
  if (o.pass) {
    std::ostringstream s;
    s << "100 cases, max deviation " << worst << ", endpoints exact";
    o.detail = s.str();
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  test::Rng rng(88);
  auto pts3 = [&](int n) {
    Points3 p(n, 3);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = test::uniform(rng, -500, 500);
    return p;
  };
  auto pts2 = [&](int n, double s) {
    Points2 p(n, 2);
    for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = test::uniform(rng, 0, s);
    return p;
  };
  const Points3 a = pts3(10);
  Points3 b = a;
  b.row(4) += Eigen::RowVector3d(3, 4, 0);
  o.require(mpjpe(a, a) == 0.0 && std::abs(mpjpe(b, a) - 0.5) < 1e-12, "MPJPE examples");
  o.require(std::abs(ahd({{1.33, 1.46}}) + 0.13) < 1e-12 && std::abs(aphd({{1.8, 0.9}}) - 50.0) < 1e-12,
            "height examples");
  Points2 ref(4, 2);
  ref << 0, 0, 100, 0, 0, 50, 100, 50;
  Points2 pred = ref;
  pred(0, 0) += 5.0;
  pred(1, 1) += 9.0;
  pred(2, 0) += 11.0;
  pred(3, 1) -= 30.0;
  o.require(pck(pred, ref, 0.1) == 0.5 && pck(ref, ref, 0.05) == 1.0, "PCK examples");
  Eigen::VectorXd t = Eigen::VectorXd::Zero(6), t2 = t, beta = Eigen::VectorXd::Zero(10);
  t2(2) = 1.0;
  o.require(param_l2(t2, beta, t, beta) == 1.0, "param L2 example");
  Points3 c = a;
  c(5, 1) += 0.2;
  o.require(std::abs(kp_l1_3d(c, a) - 0.2) < 1e-12, "keypoint L1 example");

  for (int i = 0; i < 1000; ++i) {
    const int n = 2 + i % 24;
    const Points3 p = pts3(n), q = pts3(n);
    const Eigen::RowVector3d s(test::uniform(rng, -1e3, 1e3), test::uniform(rng, -1e3, 1e3), test::uniform(rng, -1e3, 1e3));
    const Points3 ps = p.rowwise() + s;
    o.require(std::abs(mpjpe(ps, q) - mpjpe(p, q)) < 1e-9, "MPJPE translation invariance case " + std::to_string(i));

    const Points2 r2 = pts2(n, 400);
    const Points2 p2 = r2 + pts2(n, 80) - Points2::Constant(n, 2, 40.0);
    const double lo = test::uniform(rng, 0.001, 0.3), hi = lo + test::uniform(rng, 0.0, 0.3);
    o.require(pck(p2, r2, lo) <= pck(p2, r2, hi), "PCK monotonicity case " + std::to_string(i));
  }
  if (o.pass) o.detail = "examples plus 1000 translation and 1000 threshold cases";
  return o;
}

template <class T, class S, class P>
bool round_trips(const T& value, S serialize, P parse) {
  const std::string text = serialize(value);
  return serialize(parse(text)) == text;
}

Outcome criterion9() {
  Outcome o;
  test::Rng rng(99);
  for (int i = 0; i < 25; ++i) {
    o.require(round_trips(test::random_model(rng, 8 + i, 2 + i % 5, i % 2 == 0), serialize_model, parse_model), "model");
    o.require(round_trips(test::random_camera_track(rng, 1 + i % 6), serialize_cameras, parse_cameras), "cameras");
    o.require(round_trips(joint_map_by_name(toy(), "coco17"), serialize_joint_map, parse_joint_map), "joint map");
    FitConfig cfg;
    cfg.stage2.lambda_smooth = test::awkward_double(rng);
    cfg.alpha_init = test::uniform(rng, 0, 1);
    cfg.lbfgs.history = 1 + i;
    o.require(round_trips(cfg, serialize_config, parse_config), "config");
    o.require(round_trips(test::random_result_file(rng, 1 + i % 3, 1 + i % 5, 4), serialize_results, parse_results),
              "results");
    o.require(round_trips(test::random_detection_file(rng, 1 + i % 3, 1 + i % 8), serialize_detections,
                          parse_detections),
              "detections");
  }

  const fs::path root = fs::temp_directory_path() / "aionfit_acceptance";
  fs::remove_all(root);
  const fs::path a = root / "a", b = root / "b";
  const std::string seed = "11";
  o.require(test::run_tool({"synth", "--out-dir", a.string(), "--seed", seed, "--noise", "1"}).code == 0, "synth a");
  o.require(test::run_tool({"synth", "--out-dir", b.string(), "--seed", seed, "--noise", "1"}).code == 0, "synth b");
  for (const char* f : {"model.json", "detections.json", "cameras.json", "jointmap.json", "truth.json"}) {
    o.require(fs::exists(a / f) && read_text_file((a / f).string()) == read_text_file((b / f).string()),
              std::string("synth reproducibility of ") + f);
  }

  const fs::path p = root / "pipeline";
  o.require(test::run_tool({"synth", "--out-dir", p.string(), "--seed", "5", "--frames", "30"}).code == 0,
            "pipeline synth");
  const auto fit = test::run_tool({"fit", "--model", (p / "model.json").string(), "--detections",
                                   (p / "detections.json").string(), "--cameras", (p / "cameras.json").string(),
                                   "--joint-map", (p / "jointmap.json").string(), "--out", (p / "fit.json").string()});
  o.require(fit.code == 0, "pipeline fit: " + fit.err);
  const auto m = test::run_tool({"metrics", "--results", (p / "fit.json").string(), "--reference",
                                 (p / "truth.json").string(), "--model", (p / "model.json").string(), "--json"});
  o.require(m.code == 0, "pipeline metrics: " + m.err);
  if (m.code == 0) {
    const auto report = nlohmann::json::parse(m.out);
    const double err = report["mpjpe_mm"].get<double>();
    const double res = report["mean_reprojection_residual_px"].get<double>();
    o.require(err < 10.0, "pipeline MPJPE " + std::to_string(err) + " mm");
    o.require(res < 0.5, "pipeline residual " + std::to_string(res) + " px");
    if (o.pass)
      o.detail = "six schemas x25, synth reproducible, pipeline MPJPE " + std::to_string(err) + " mm, residual " +
                 std::to_string(res) + " px";
  }
  fs::remove_all(root);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %zu: %s (%s; %.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
