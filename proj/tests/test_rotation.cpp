#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Geometry>

#include "aionfit/rotation.hpp"
#include "support.hpp"

using namespace aionfit;

TEST(Rotation, ZeroIsIdentity) {
  EXPECT_EQ(axis_angle_to_rotation(Eigen::Vector3d::Zero()), Eigen::Matrix3d::Identity());
}

TEST(Rotation, QuarterTurnAboutZ) {
  const Eigen::Vector3d p = axis_angle_to_rotation(Eigen::Vector3d(0, 0, M_PI / 2)) * Eigen::Vector3d(1, 0, 0);
  EXPECT_LT((p - Eigen::Vector3d(0, 1, 0)).norm(), 1e-12);
}

TEST(Rotation, RandomRotationsAreOrthogonal) {
  test::Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d aa(test::uniform(rng, -3, 3), test::uniform(rng, -3, 3), test::uniform(rng, -3, 3));
    const Eigen::Matrix3d r = axis_angle_to_rotation(aa);
    EXPECT_LT((r * r.transpose() - Eigen::Matrix3d::Identity()).norm(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Rotation, MatchesAngleAxis) {
  test::Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d aa(test::uniform(rng, -2, 2), test::uniform(rng, -2, 2), test::uniform(rng, -2, 2));
    const Eigen::Matrix3d ref = Eigen::AngleAxisd(aa.norm(), aa.normalized()).toRotationMatrix();
    EXPECT_LT((axis_angle_to_rotation(aa) - ref).norm(), 1e-12);
  }
}

TEST(Rotation, JacobianMatchesFiniteDifferences) {
  test::Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    Eigen::Vector3d aa(test::uniform(rng, -2, 2), test::uniform(rng, -2, 2), test::uniform(rng, -2, 2));
    if (i == 0) aa.setZero();
    if (i == 1) aa = Eigen::Vector3d(1e-9, -2e-9, 0.5e-9);
    const auto jac = rotation_jacobian(aa);
    for (int k = 0; k < 3; ++k) {
      const double h = 1e-6;
      Eigen::Vector3d ap = aa, am = aa;
      ap(k) += h;
      am(k) -= h;
      const Eigen::Matrix3d fd = (axis_angle_to_rotation(ap) - axis_angle_to_rotation(am)) / (2 * h);
      EXPECT_LT((jac[k] - fd).norm(), 1e-8) << "component " << k << " at " << aa.transpose();
    }
  }
}

TEST(Rotation, LogInvertsExp) {
  test::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d aa =
        Eigen::Vector3d(test::uniform(rng, -1, 1), test::uniform(rng, -1, 1), test::uniform(rng, -1, 1)).normalized() *
        test::uniform(rng, 0.0, 3.0);
    EXPECT_LT((rotation_to_axis_angle(axis_angle_to_rotation(aa)) - aa).norm(), 1e-9);
  }
}

TEST(Rotation, SkewIsCrossProduct) {
  const Eigen::Vector3d a(1, -2, 3), b(0.5, 4, -1);
  EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-15);
}
