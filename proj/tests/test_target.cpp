#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "hmlab/error.hpp"
#include "hmlab/rng.hpp"
#include "hmlab/target.hpp"
#include "support.hpp"

using hmlab::EmbeddedTarget;
using hmlab::ErrorCode;
using hmlab::Mat;
using hmlab::Vec;
using support::expect_throws_code;

namespace {

std::vector<EmbeddedTarget> all_targets() {
  return {EmbeddedTarget::unit_sphere(3), EmbeddedTarget::unit_sphere(2),
          EmbeddedTarget::clifford_torus(2), EmbeddedTarget::torus_of_revolution(2.0, 0.7)};
}

Vec random_vec(hmlab::Rng& rng, int n) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

// A point on the target, then moved by offset * delta_0 in a random direction.
Vec near_point(const EmbeddedTarget& t, hmlab::Rng& rng, double offset) {
  Vec y;
  switch (t.kind()) {
    case hmlab::TargetKind::UnitSphere:
      y = random_vec(rng, t.ambient_dim()).normalized();
      break;
    case hmlab::TargetKind::CliffordTorus:
      y = random_vec(rng, t.ambient_dim());
      for (int i = 0; i < t.intrinsic_dim(); ++i) y.segment<2>(2 * i).normalize();
      break;
    case hmlab::TargetKind::TorusOfRevolution: {
      const double a = rng.uniform(0.0, 2 * M_PI), b = rng.uniform(0.0, 2 * M_PI);
      const double R = t.major_radius(), r = t.minor_radius();
      y = Vec(3);
      y << (R + r * std::cos(b)) * std::cos(a), (R + r * std::cos(b)) * std::sin(a), r * std::sin(b);
      break;
    }
  }
  return y + offset * t.tubular_radius() * random_vec(rng, t.ambient_dim()).normalized();
}

}  // namespace

TEST(Target, SphereProjectionIsRadialNormalization) {
  const auto s = EmbeddedTarget::unit_sphere(3);
  Vec x(3);
  x << 0.3, -1.2, 0.9;
  EXPECT_LT((s.project(x) - x / x.norm()).norm(), 1e-15);
  EXPECT_NEAR(s.distance(x), std::abs(x.norm() - 1.0), 1e-15);
}

TEST(Target, CliffordProjectionNormalizesEachPair) {
  const auto t = EmbeddedTarget::clifford_torus(2);
  Vec x(4);
  x << 0.5, 0.5, -1.5, 0.2;
  const Vec y = t.project(x);
  EXPECT_NEAR(y.head<2>().norm(), 1.0, 1e-15);
  EXPECT_NEAR(y.tail<2>().norm(), 1.0, 1e-15);
  EXPECT_NEAR(y(0) / y(1), 1.0, 1e-15);
  EXPECT_TRUE(t.on_target(y));
}

TEST(Target, TorusOfRevolutionProjectionHitsTheTube) {
  const auto t = EmbeddedTarget::torus_of_revolution(2.0, 0.5);
  Vec x(3);
  x << 2.3, 0.0, 0.1;
  const Vec y = t.project(x);
  // Closest point lies on the circle of radius r around (2, 0, 0) in the xz-plane.
  Vec c(3);
  c << 2.0, 0.0, 0.0;
  EXPECT_NEAR((y - c).norm(), 0.5, 1e-14);
  EXPECT_NEAR(y(1), 0.0, 1e-15);
  EXPECT_NEAR((x - c).normalized().dot((y - c).normalized()), 1.0, 1e-14);
}

TEST(Target, ProjectionIsIdempotent) {
  hmlab::Rng rng(1, "idempotent");
  for (const auto& t : all_targets()) {
    for (int s = 0; s < 20; ++s) {
      const Vec x = near_point(t, rng, 0.4);
      const Vec y = t.project(x);
      EXPECT_LT((t.project(y) - y).norm(), 1e-14) << t.describe();
      EXPECT_TRUE(t.on_target(y)) << t.describe();
    }
  }
}

TEST(Target, OutsideTubeIsRejected) {
  const auto s = EmbeddedTarget::unit_sphere(3);
  expect_throws_code([&] { s.project(Vec::Zero(3)); }, ErrorCode::OutsideTubularNeighborhood);
  Vec far(3);
  far << 0.0, 0.0, 2.5;
  expect_throws_code([&] { s.project(far); }, ErrorCode::OutsideTubularNeighborhood);
  const auto t = EmbeddedTarget::torus_of_revolution(2.0, 0.5);
  expect_throws_code([&] { t.project(Vec::Zero(3)); }, ErrorCode::OutsideTubularNeighborhood);
}

TEST(Target, InvalidParametersAreRejected) {
  expect_throws_code([] { EmbeddedTarget::unit_sphere(1); }, ErrorCode::InvalidSpec);
  expect_throws_code([] { EmbeddedTarget::clifford_torus(0); }, ErrorCode::InvalidSpec);
  expect_throws_code([] { EmbeddedTarget::torus_of_revolution(1.0, 1.0); },
                     ErrorCode::InvalidSpec);
  const auto s = EmbeddedTarget::unit_sphere(3);
  expect_throws_code([&] { s.distance(Vec::Zero(4)); }, ErrorCode::ShapeMismatch);
}

TEST(Target, JacobianMatchesFiniteDifferences) {
  hmlab::Rng rng(2, "jacobian");
  const double h = 1e-6;
  for (const auto& t : all_targets()) {
    for (int s = 0; s < 5; ++s) {
      const Vec x = near_point(t, rng, 0.3);
      const Mat J = t.projection_jacobian(x);
      Mat fd(t.ambient_dim(), t.ambient_dim());
      for (int j = 0; j < t.ambient_dim(); ++j) {
        Vec e = Vec::Zero(t.ambient_dim());
        e(j) = h;
        fd.col(j) = (t.project(x + e) - t.project(x - e)) / (2 * h);
      }
      EXPECT_LT((J - fd).norm(), 1e-8 * std::max(1.0, J.norm())) << t.describe();
    }
  }
}

TEST(Target, SecondDerivativeMatchesFiniteDifferencesAndIsSymmetric) {
  hmlab::Rng rng(3, "hessian");
  const double h = 1e-5;
  for (const auto& t : all_targets()) {
    for (int s = 0; s < 5; ++s) {
      const Vec x = near_point(t, rng, 0.3);
      const Vec v = random_vec(rng, t.ambient_dim());
      const Vec w = random_vec(rng, t.ambient_dim());
      const Vec H = t.projection_hessian(x, v, w);
      const Vec fd =
          (t.projection_jacobian(x + h * w) * v - t.projection_jacobian(x - h * w) * v) / (2 * h);
      EXPECT_LT((H - fd).norm(), 1e-7 * std::max(1.0, H.norm())) << t.describe();
      EXPECT_LT((H - t.projection_hessian(x, w, v)).norm(), 1e-13) << t.describe();
    }
  }
}

TEST(Target, TangentProjectorIsAnOrthogonalProjectorOfRankIntrinsicDim) {
  hmlab::Rng rng(4, "projector");
  for (const auto& t : all_targets()) {
    const Vec y = t.project(near_point(t, rng, 0.2));
    const Mat P = t.tangent_projector(y);
    EXPECT_LT((P * P - P).norm(), 1e-14);
    EXPECT_LT((P - P.transpose()).norm(), 1e-14);
    EXPECT_NEAR(P.trace(), t.intrinsic_dim(), 1e-13) << t.describe();
    EXPECT_LT((P - t.projection_jacobian(y)).norm(), 1e-13) << t.describe();
    const Vec v = random_vec(rng, t.ambient_dim());
    EXPECT_LT((t.tangent_part(y, v) - P * v).norm(), 1e-14);
  }
}

TEST(Target, SphereSecondFundamentalFormIsInnerProductTimesPoint) {
  const auto s = EmbeddedTarget::unit_sphere(3);
  hmlab::Rng rng(5, "sff");
  for (int i = 0; i < 10; ++i) {
    const Vec y = random_vec(rng, 3).normalized();
    const Mat P = s.tangent_projector(y);
    const Vec v = P * random_vec(rng, 3);
    const Vec w = P * random_vec(rng, 3);
    const Vec A = s.second_fundamental_form(y, v, w);
    EXPECT_LT((A - v.dot(w) * y).norm(), 1e-14);
  }
}

TEST(Target, SecondFundamentalFormIsNormalAndSymmetric) {
  hmlab::Rng rng(6, "sff-normal");
  for (const auto& t : all_targets()) {
    const Vec y = t.project(near_point(t, rng, 0.2));
    const Mat P = t.tangent_projector(y);
    const Vec v = P * random_vec(rng, t.ambient_dim());
    const Vec w = P * random_vec(rng, t.ambient_dim());
    const Vec A = t.second_fundamental_form(y, v, w);
    EXPECT_LT((P * A).norm(), 1e-13 * std::max(1.0, A.norm())) << t.describe();
    EXPECT_LT((A - t.second_fundamental_form(y, w, v)).norm(), 1e-14) << t.describe();
  }
}

TEST(Target, SecondFundamentalFormRejectsNormalInput) {
  const auto s = EmbeddedTarget::unit_sphere(3);
  Vec y(3);
  y << 0.0, 0.0, 1.0;
  expect_throws_code([&] { s.second_fundamental_form(y, y, y); }, ErrorCode::NonTangentInput);
}

TEST(Target, TorusTubularRadiusIsTheNearerFocalDistance) {
  EXPECT_DOUBLE_EQ(EmbeddedTarget::torus_of_revolution(2.0, 0.5).tubular_radius(), 0.5);
  EXPECT_DOUBLE_EQ(EmbeddedTarget::torus_of_revolution(1.0, 0.7).tubular_radius(), 0.3);
  EXPECT_DOUBLE_EQ(EmbeddedTarget::unit_sphere(4).tubular_radius(), 1.0);
}
