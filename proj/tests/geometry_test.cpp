#include "monoscale/geometry.hpp"

#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace monoscale {
namespace {

using testing::max_abs_diff;
using testing::random_pose;
using testing::random_twist;
constexpr double kPi = std::numbers::pi;

TEST(Compose, IdentityIsNeutral) {
  std::mt19937_64 rng(1);
  const Pose p = random_pose(rng);
  EXPECT_LT(max_abs_diff((Pose::identity() * p).matrix(), p.matrix()), 1e-15);
  EXPECT_LT(max_abs_diff((p * Pose::identity()).matrix(), p.matrix()), 1e-15);
}

TEST(Compose, MatchesHomogeneousProduct) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    EXPECT_LT(max_abs_diff(compose(a, b).matrix(), a.matrix() * b.matrix()), 1e-12);
  }
}

TEST(Compose, GroupAxioms) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Pose a = random_pose(rng), b = random_pose(rng), c = random_pose(rng);
    EXPECT_LT(max_abs_diff(((a * b) * c).matrix(), (a * (b * c)).matrix()), 1e-12);
    EXPECT_LT(max_abs_diff((a * inverse(a)).matrix(), Matrix4d::Identity()), 1e-12);
    EXPECT_NEAR((a * b).rotation.quaternion().norm(), 1.0, 1e-12);
  }
}

TEST(Inverse, Cases) {
  EXPECT_LT(max_abs_diff(inverse(Pose::identity()).matrix(), Matrix4d::Identity()), 0.0 + 1e-300);
  const Pose t = Pose::from_translation({0.1, 0.0, 0.0});
  EXPECT_LT((inverse(t).translation - Vector3d(-0.1, 0.0, 0.0)).norm(), 1e-15);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 200; ++i) {
    const Pose p = random_pose(rng);
    EXPECT_LT(max_abs_diff(inverse(p).matrix(), p.matrix().inverse()), 1e-12);
  }
}

TEST(RotationInvariant, ConstructorsNormalize) {
  EXPECT_NEAR(Rotation(2.0, 0.3, -1.0, 0.5).quaternion().norm(), 1.0, 1e-12);
  EXPECT_NEAR(Rotation::from_angle_axis(1.0, Vector3d(1, 2, 3)).quaternion().norm(), 1.0, 1e-12);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const Rotation r = so3_exp(testing::random_rotation_vector(rng, 10.0));
    EXPECT_NEAR(r.quaternion().norm(), 1.0, 1e-12);
    EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
    EXPECT_LT(max_abs_diff(r.matrix() * r.matrix().transpose(), Matrix3d::Identity()), 1e-12);
  }
}

TEST(Se3Log, TrivialCases) {
  EXPECT_EQ(se3_log(Pose::identity()).vector(), Vector6d::Zero());

  const Twist t = se3_log(Pose::from_translation({0.1, 0.0, 0.0}));
  EXPECT_LT((t.rho - Vector3d(0.1, 0, 0)).norm(), 1e-15);
  EXPECT_EQ(t.phi, Vector3d::Zero());

  const Twist r = se3_log(Pose::from_rotation(Rotation::from_angle_axis(kPi / 2, Vector3d::UnitZ())));
  EXPECT_LT((r.phi - Vector3d(0, 0, kPi / 2)).norm(), 1e-15);
  EXPECT_LT(r.rho.norm(), 1e-15);
}

TEST(Se3Log, CutLocusRejected) {
  const Pose p = Pose::from_rotation(Rotation::from_angle_axis(kPi, Vector3d::UnitX()));
  EXPECT_THROW(se3_log(p), CutLocusError);
  const Pose q = Pose::from_rotation(Rotation::from_angle_axis(kPi - 0.5e-6, Vector3d::UnitY()));
  EXPECT_THROW(se3_log(q), CutLocusError);
  const Pose ok = Pose::from_rotation(Rotation::from_angle_axis(kPi - 1e-5, Vector3d::UnitY()));
  EXPECT_NO_THROW(se3_log(ok));
}

TEST(Se3Exp, TrivialCases) {
  EXPECT_LT(max_abs_diff(se3_exp(Twist()).matrix(), Matrix4d::Identity()), 1e-300);
  const Pose p = se3_exp(Twist(Vector3d::Zero(), Vector3d(0, 0, kPi / 2)));
  const Matrix3d expected = Eigen::AngleAxisd(kPi / 2, Vector3d::UnitZ()).toRotationMatrix();
  EXPECT_LT(max_abs_diff(p.rotation.matrix(), expected), 1e-15);
  EXPECT_LT(p.translation.norm(), 1e-15);
}

TEST(Se3Exp, MatchesSeriesSummation) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 200; ++i) {
    Twist x = random_twist(rng, kPi);
    x.phi = 2.0 * x.phi.normalized();
    const Matrix4d oracle = testing::series_expm(testing::twist_hat(x.vector()));
    EXPECT_LT(max_abs_diff(se3_exp(x).matrix(), oracle), 1e-12);
  }
}

TEST(Se3Exp, SmallAngleMatchesSeriesSummation) {
  std::mt19937_64 rng(7);
  for (double angle : {0.0, 1e-12, 1e-9, 0.99e-8, 1e-8, 1e-7, 1e-4, 9.99e-3, 1e-2, 1.01e-2}) {
    Twist x = random_twist(rng, 1.0);
    x.phi = angle * testing::random_unit(rng);
    const Matrix4d oracle = testing::series_expm(testing::twist_hat(x.vector()));
    EXPECT_LT(max_abs_diff(se3_exp(x).matrix(), oracle), 1e-15) << angle;
  }
}

TEST(So3Log, Cases) {
  EXPECT_EQ(so3_log(Rotation::identity()), Vector3d::Zero());
  EXPECT_LT((so3_log(Rotation::from_angle_axis(0.3, Vector3d::UnitX())) - Vector3d(0.3, 0, 0)).norm(),
            1e-15);
  EXPECT_THROW(so3_log(Rotation::from_angle_axis(kPi, Vector3d::UnitZ())), CutLocusError);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 500; ++i) {
    const Vector3d v = testing::random_rotation_vector(rng, kPi - 1e-3);
    const Rotation r(testing::quaternion_exp(v));
    EXPECT_LT((so3_log(r) - testing::eigen_axis_log(r.matrix())).norm(), 1e-9);
  }
}

TEST(So3Exp, Cases) {
  EXPECT_LT(max_abs_diff(so3_exp(Vector3d::Zero()).matrix(), Matrix3d::Identity()), 1e-300);
  const Matrix3d half_turn = so3_exp(Vector3d(0, 0, kPi)).matrix();
  EXPECT_LT(max_abs_diff(half_turn, Vector3d(-1, -1, 1).asDiagonal().toDenseMatrix()), 1e-15);

  std::mt19937_64 rng(9);
  for (int i = 0; i < 500; ++i) {
    const Vector3d v = testing::random_rotation_vector(rng, 6.0);
    const Rotation oracle(testing::quaternion_exp(v));
    EXPECT_LT(max_abs_diff(so3_exp(v).matrix(), oracle.matrix()), 1e-14);
  }
}

TEST(RoundTrip, Se3LogOfExp) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 10000; ++i) {
    const Twist x = random_twist(rng, kPi - 1e-6);
    const Twist y = se3_log(se3_exp(x));
    ASSERT_LT((y.vector() - x.vector()).cwiseAbs().maxCoeff(), 1e-10) << i;
  }
}

TEST(RoundTrip, Se3ExpOfLog) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Pose p = random_pose(rng, kPi - 1e-3);
    EXPECT_LT(max_abs_diff(se3_exp(se3_log(p)).matrix(), p.matrix()), 1e-10);
  }
}

TEST(Continuity, SeriesAndClosedBranchesAgree) {
  using detail::Branch;
  std::mt19937_64 rng(12);
  for (int i = 0; i < 100; ++i) {
    const Vector3d phi = 1e-7 * testing::random_unit(rng);
    const Vector3d rho(0.3, -0.2, 0.5);
    const Vector3d t = detail::so3_left_jacobian(phi) * rho;
    const Vector3d a = detail::so3_left_jacobian_inverse(phi, Branch::kSeries) * t;
    const Vector3d b = detail::so3_left_jacobian_inverse(phi, Branch::kClosed) * t;
    EXPECT_LT((a - b).norm(), 1e-9);

    const Rotation r = so3_exp(phi);
    EXPECT_LT((detail::so3_log(r, Branch::kSeries) - detail::so3_log(r, Branch::kClosed)).norm(), 1e-9);
    EXPECT_LT(max_abs_diff(detail::so3_exp(phi, Branch::kSeries).matrix(),
                           detail::so3_exp(phi, Branch::kClosed).matrix()),
              1e-9);
  }
  for (double t : {1e-3, 9e-3}) {
    EXPECT_NEAR(detail::coeff_c(t, Branch::kSeries), detail::coeff_c(t, Branch::kClosed), 1e-5);
    EXPECT_NEAR(detail::coeff_d(t, Branch::kSeries), detail::coeff_d(t, Branch::kClosed), 1e-5);
  }
  for (double t : {5e-2, 1e-1}) {
    EXPECT_NEAR(detail::coeff_q2(t, Branch::kSeries), detail::coeff_q2(t, Branch::kClosed), 1e-9);
    EXPECT_NEAR(detail::coeff_q3(t, Branch::kSeries), detail::coeff_q3(t, Branch::kClosed), 1e-9);
  }
}

TEST(Adjoint, ConjugatesTwists) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 100; ++i) {
    const Pose p = random_pose(rng);
    const Twist x = random_twist(rng, 1.0);
    const Pose lhs = p * se3_exp(x) * inverse(p);
    const Pose rhs = se3_exp(Twist(Vector6d(adjoint(p) * x.vector())));
    EXPECT_LT(max_abs_diff(lhs.matrix(), rhs.matrix()), 1e-12);
  }
}

TEST(Jacobians, RightJacobianInverseMatchesFiniteDifferences) {
  std::mt19937_64 rng(14);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Twist x = random_twist(rng, 2.5);
    const Matrix6d analytic = se3_right_jacobian_inverse(x);
    Matrix6d numeric;
    for (int k = 0; k < 6; ++k) {
      Vector6d d = Vector6d::Zero();
      d[k] = h;
      const Vector6d plus = se3_log(se3_exp(x) * se3_exp(Twist(d))).vector();
      const Vector6d minus = se3_log(se3_exp(x) * se3_exp(Twist(Vector6d(-d)))).vector();
      numeric.col(k) = (plus - minus) / (2 * h);
    }
    EXPECT_LT(max_abs_diff(analytic, numeric), 1e-7) << i;
  }
}

}  // namespace
}  // namespace monoscale
