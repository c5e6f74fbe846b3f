#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include "aionfit/body_model.hpp"
#include "aionfit/errors.hpp"
#include "aionfit/rotation.hpp"
#include "aionfit/synth.hpp"
#include "support.hpp"

using namespace aionfit;

namespace {

// Three vertices, root plus one child joint on the x axis.
BodyModelData two_joint_chain() {
  BodyModelData d;
  d.adult_template.resize(3, 3);
  d.adult_template << 0, 0, 0, 1, 0, 0, 2, 0, 0;
  d.child_template = d.adult_template * 0.5;
  d.shape_blendshapes = Eigen::MatrixXd::Zero(9, kNumBetas);
  d.joint_regressor.resize(2, 3);
  d.joint_regressor << 1, 0, 0, 0, 1, 0;
  d.skinning_weights.resize(3, 2);
  d.skinning_weights << 1, 0, 1, 0, 0, 1;
  d.parents = {-1, 0};
  d.joint_names = {"root", "elbow"};
  d.faces = {{0, 1, 2}};
  return d;
}

BodyModelData line_templates() {
  BodyModelData d = two_joint_chain();
  d.adult_template << 0, 0, 0, 0, 1.7, 0, 0, 0.85, 0;
  d.child_template << 0, 0, 0, 0, 0.5, 0, 0, 0.25, 0;
  return d;
}

}  // namespace

TEST(InterpolateTemplate, Endpoints) {
  test::Rng rng(5);
  const BodyModelData d = test::random_model(rng, 30, 4);
  const BodyModel m(d);
  EXPECT_EQ(interpolate_template(m, 0.0), d.adult_template);
  EXPECT_EQ(interpolate_template(m, 1.0), d.child_template);
}

TEST(InterpolateTemplate, Linear) {
  BodyModelData d = two_joint_chain();
  d.adult_template.row(1) << 0, 1.7, 0;
  d.child_template.row(1) << 0, 0.5, 0;
  const BodyModel m(d);
  EXPECT_LT((interpolate_template(m, 0.5).row(1) - Eigen::RowVector3d(0, 1.1, 0)).norm(), 1e-15);
}

TEST(InterpolateTemplate, RejectsOutOfRange) {
  const BodyModel m(two_joint_chain());
  EXPECT_THROW(interpolate_template(m, -0.01), DomainError);
  EXPECT_THROW(interpolate_template(m, 1.01), DomainError);
}

TEST(ShapeOffset, ZeroAndBasis) {
  test::Rng rng(6);
  const BodyModelData d = test::random_model(rng, 20, 3);
  const BodyModel m(d);
  EXPECT_TRUE(shape_offset(m, Betas::Zero()).isZero(0.0));
  Betas e1 = Betas::Zero();
  e1(0) = 1.0;
  const Vertices off = shape_offset(m, e1);
  for (int v = 0; v < 20; ++v)
    for (int c = 0; c < 3; ++c) EXPECT_EQ(off(v, c), d.shape_blendshapes(3 * v + c, 0));
}

TEST(ShapeOffset, MatchesLoop) {
  test::Rng rng(7);
  const BodyModelData d = test::random_model(rng, 25, 3);
  const BodyModel m(d);
  const Betas beta = test::random_shape(rng, 2.0).beta;
  const Vertices off = shape_offset(m, beta);
  for (int v = 0; v < 25; ++v) {
    for (int c = 0; c < 3; ++c) {
      double x = 0.0;
      for (int b = 0; b < kNumBetas; ++b) x += beta(b) * d.shape_blendshapes(3 * v + c, b);
      EXPECT_NEAR(off(v, c), x, 1e-14);
    }
  }
}

TEST(Forward, IdentityPoseGivesAdultTemplate) {
  test::Rng rng(8);
  const BodyModelData d = test::random_model(rng, 30, 4);
  const BodyModel m(d);
  const MeshResult r = forward(m, ShapeParams{}, PoseParams::zero(3));
  EXPECT_LT((r.vertices - d.adult_template).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Forward, ChildBoneRotatesAboutItsJoint) {
  const BodyModel m(two_joint_chain());
  PoseParams pose = PoseParams::zero(1);
  pose.body_pose.row(0) << 0, 0, M_PI / 2;
  const MeshResult r = forward(m, ShapeParams{}, pose);
  // The vertex at (2,0,0) hangs off the joint at (1,0,0) and swings to (1,1,0).
  EXPECT_LT((r.vertices.row(2) - Eigen::RowVector3d(1, 1, 0)).norm(), 1e-12);
  EXPECT_LT((r.vertices.row(0) - Eigen::RowVector3d(0, 0, 0)).norm(), 1e-12);
  EXPECT_LT((r.vertices.row(1) - Eigen::RowVector3d(1, 0, 0)).norm(), 1e-12);
  EXPECT_LT((r.joints.row(1) - Eigen::RowVector3d(1, 0, 0)).norm(), 1e-12);
}

TEST(Forward, RootOnlyWeightsRotateRigidly) {
  test::Rng rng(9);
  BodyModelData d = test::random_model(rng, 30, 4);
  d.skinning_weights.setZero();
  d.skinning_weights.col(0).setOnes();
  const BodyModel m(d);
  for (int i = 0; i < 10; ++i) {
    PoseParams pose = test::random_pose(rng, 3, 1.0);
    const MeshResult r = forward(m, ShapeParams{}, pose);
    const MeshResult flat = forward(m, ShapeParams{}, [&] {
      PoseParams p = pose;
      p.global_orient.setZero();
      return p;
    }());
    const Eigen::Matrix3d rot = axis_angle_to_rotation(pose.global_orient);
    const Vertices expected = (rot * flat.vertices.transpose()).transpose();
    EXPECT_LT((r.vertices - expected).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Forward, MatchesNaiveLoopOracle) {
  test::Rng rng(10);
  for (int i = 0; i < 100; ++i) {
    const int nj = 2 + i % 5;
    const BodyModelData d = test::random_model(rng, 10 + i % 20, nj, i % 3 != 0);
    const BodyModel m(d);
    const ShapeParams shape = test::random_shape(rng, 1.0);
    const PoseParams pose = test::random_pose(rng, nj - 1, 1.5);
    const MeshResult a = forward(m, shape, pose);
    const MeshResult b = test::naive_forward(d, shape, pose);
    EXPECT_LT((a.vertices - b.vertices).cwiseAbs().maxCoeff(), 1e-10) << "case " << i;
    EXPECT_LT((a.joints - b.joints).cwiseAbs().maxCoeff(), 1e-10) << "case " << i;
  }
}

TEST(Forward, JointChainAgreesWithForward) {
  test::Rng rng(11);
  const BodyModelData d = test::random_model(rng, 30, 5);
  const BodyModel m(d);
  const ShapeParams s = test::random_shape(rng, 1.0);
  const PoseParams p = test::random_pose(rng, 4, 1.0);
  EXPECT_LT((m.joint_chain(s, p).posed_joints - forward(m, s, p).joints).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Forward, JointVjpMatchesFiniteDifferences) {
  test::Rng rng(12);
  const BodyModelData d = test::random_model(rng, 20, 4);
  const BodyModel m(d);
  const ShapeParams s = test::random_shape(rng, 1.0);
  const PoseParams p = test::random_pose(rng, 3, 1.0);
  Vertices w(4, 3);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = test::uniform(rng, -1, 1);
  auto f = [&](const ShapeParams& ss, const PoseParams& pp) {
    return (m.joint_chain(ss, pp).posed_joints.array() * w.array()).sum();
  };
  const JointGradient g = m.joints_vjp(m.joint_chain(s, p), p, w);
  const double h = 1e-6;
  {
    ShapeParams a = s, b = s;
    a.alpha += h;
    b.alpha -= h;
    EXPECT_NEAR(g.d_alpha, (f(a, p) - f(b, p)) / (2 * h), 1e-8);
  }
  for (int k = 0; k < kNumBetas; ++k) {
    ShapeParams a = s, b = s;
    a.beta(k) += h;
    b.beta(k) -= h;
    EXPECT_NEAR(g.d_beta(k), (f(a, p) - f(b, p)) / (2 * h), 1e-8);
  }
  for (int c = 0; c < 3; ++c) {
    PoseParams a = p, b = p;
    a.global_orient(c) += h;
    b.global_orient(c) -= h;
    EXPECT_NEAR(g.d_global_orient(c), (f(s, a) - f(s, b)) / (2 * h), 1e-8);
  }
  for (int j = 0; j < 3; ++j) {
    for (int c = 0; c < 3; ++c) {
      PoseParams a = p, b = p;
      a.body_pose(j, c) += h;
      b.body_pose(j, c) -= h;
      EXPECT_NEAR(g.d_body_pose(j, c), (f(s, a) - f(s, b)) / (2 * h), 1e-8);
    }
  }
}

TEST(WorldJoints, Translation) {
  Vertices j(2, 3);
  j << 1, 2, 3, -1, 0, 4;
  EXPECT_EQ(world_joints(j, Eigen::Vector3d::Zero()), j);
  const Vertices shifted = world_joints(j, Eigen::Vector3d(0, 0, 2));
  EXPECT_EQ(shifted(0, 2), 5.0);
  EXPECT_EQ(shifted(1, 2), 6.0);
  test::Rng rng(13);
  const Eigen::Vector3d g(test::uniform(rng, -5, 5), test::uniform(rng, -5, 5), test::uniform(rng, -5, 5));
  EXPECT_LT((world_joints(j, g).rowwise() - g.transpose() - j).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(NeutralHeight, TemplateExtents) {
  const BodyModel m(line_templates());
  ShapeParams s;
  s.alpha = 0.0;
  EXPECT_NEAR(neutral_height(m, s), 1.7, 1e-15);
  s.alpha = 1.0;
  EXPECT_NEAR(neutral_height(m, s), 0.5, 1e-15);
  s.alpha = 0.5;
  EXPECT_NEAR(neutral_height(m, s), 1.1, 1e-15);
}

TEST(BodyModelValidation, RejectsBadData) {
  {
    BodyModelData d = two_joint_chain();
    d.skinning_weights(0, 0) = 0.5;
    EXPECT_THROW(BodyModel{d}, ModelError);
  }
  {
    BodyModelData d = two_joint_chain();
    d.skinning_weights(0, 0) = 1.5;
    d.skinning_weights(0, 1) = -0.5;
    EXPECT_THROW(BodyModel{d}, ModelError);
  }
  {
    BodyModelData d = two_joint_chain();
    d.parents = {-1, 1};
    EXPECT_THROW(BodyModel{d}, ModelError);
  }
  {
    BodyModelData d = two_joint_chain();
    d.child_template.resize(2, 3);
    EXPECT_THROW(BodyModel{d}, ModelError);
  }
  {
    BodyModelData d = two_joint_chain();
    d.faces = {{0, 1, 3}};
    EXPECT_THROW(BodyModel{d}, ModelError);
  }
}

TEST(ToyModel, IsValidAndAgeDistinct) {
  const BodyModel m(make_toy_body_model());
  ShapeParams adult, child;
  child.alpha = 1.0;
  EXPECT_GT(neutral_height(m, adult), 1.5);
  EXPECT_LT(neutral_height(m, child), 1.0);
  EXPECT_GE(m.joint_index("nose"), 0);
}
