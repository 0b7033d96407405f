#include <cmath>

#include <gtest/gtest.h>
#include <json.hpp>

#include "hmlab/charts.hpp"
#include "hmlab/energy.hpp"
#include "oracles.hpp"
#include "support.hpp"

using hmlab::ErrorCode;
using hmlab::Field;
using hmlab::MapField;
using hmlab::Rng;
using hmlab::TangentField;
using hmlab::Vec;
using support::expect_throws_code;

namespace {

MapField near_identity(int level, double amplitude, std::uint64_t seed) {
  Rng rng(seed, "near-identity");
  return hmlab::perturbed_map(hmlab::identity_map(support::sphere_mesh(level), support::sphere()),
                              amplitude, rng);
}

TangentField scaled_field(const MapField& f, double sup, std::uint64_t seed) {
  Rng rng(seed, "direction");
  TangentField u = hmlab::random_tangent_field(f, rng);
  u.values *= sup / hmlab::sup_norm(u.values);
  return u;
}

}  // namespace

TEST(Charts, PushThenPullRoundTripsOnTheSphere) {
  const MapField f = near_identity(3, 0.2, 1);
  const double delta = f.target().tubular_radius();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const TangentField u = scaled_field(f, 0.25 * delta, seed);
    const MapField pushed = hmlab::chart_push(f, u);
    for (int i = 0; i < pushed.vertex_count(); ++i) {
      EXPECT_NEAR(pushed.point(i).norm(), 1.0, 1e-14);
    }
    const TangentField back = hmlab::chart_pull(f, pushed);
    EXPECT_LT(hmlab::sup_norm(Field(back.values - u.values)), 1e-9);
  }
}

TEST(Charts, PullMatchesTheClosedFormSphereInverse) {
  const MapField f = near_identity(2, 0.2, 4);
  const MapField f1 = near_identity(2, 0.2, 5);
  ASSERT_LT(hmlab::sup_norm(Field(f1.values() - f.values())), 0.5 * f.target().tubular_radius());
  const TangentField u = hmlab::chart_pull(f, f1);
  for (int i = 0; i < f.vertex_count(); ++i) {
    const Vec expected = oracle::sphere_chart_inverse(f.point(i), f1.point(i));
    EXPECT_LT((Vec(u.values.row(i).transpose()) - expected).norm(), 1e-10) << i;
  }
}

TEST(Charts, RoundTripOnTheCliffordTorus) {
  const auto mesh = support::circle_mesh(64);
  const auto torus = std::make_shared<const hmlab::EmbeddedTarget>(
      hmlab::EmbeddedTarget::clifford_torus(2));
  Field values(64, 4);
  for (int i = 0; i < 64; ++i) {
    const double t = mesh->angle(i);
    values.row(i) << std::cos(t), std::sin(t), std::cos(2 * t), std::sin(2 * t);
  }
  const MapField f(mesh, torus, values);
  const TangentField u = scaled_field(f, 0.25 * torus->tubular_radius(), 7);
  const TangentField back = hmlab::chart_pull(f, hmlab::chart_push(f, u));
  EXPECT_LT(hmlab::sup_norm(Field(back.values - u.values)), 1e-9);
}

TEST(Charts, RejectsFieldsBeyondHalfTheTube) {
  const MapField f = near_identity(2, 0.1, 1);
  const double delta = f.target().tubular_radius();
  expect_throws_code([&] { hmlab::chart_push(f, scaled_field(f, 0.5 * delta, 1)); },
                     ErrorCode::ChartRadiusExceeded);
  EXPECT_NO_THROW(hmlab::chart_push(f, scaled_field(f, 0.49 * delta, 1)));
  const MapField far = near_identity(2, 0.1, 1).with_values(Field(-f.values()));
  expect_throws_code([&] { hmlab::chart_pull(f, far); }, ErrorCode::ChartRadiusExceeded);
}

TEST(Charts, RejectsNormalDirections) {
  const MapField f = near_identity(2, 0.1, 1);
  TangentField u{Field(0.01 * f.values())};
  expect_throws_code([&] { hmlab::chart_push(f, u); }, ErrorCode::NonTangentInput);
}

TEST(Charts, ConstantFieldRatioMatchesTheChordFormula) {
  const auto mesh = support::sphere_mesh(2);
  const MapField c = hmlab::constant_map(mesh, support::sphere(), support::north());
  for (double a : {0.05, 0.2, 0.4}) {
    Field values = Field::Zero(c.vertex_count(), 3);
    values.col(0).setConstant(a);
    const TangentField u{values};
    const MapField pushed = hmlab::chart_push(c, u);
    for (int k : {1, 2}) {
      const double ratio = hmlab::sobolev_norm(*mesh, u.values, k, 2.0) /
                           hmlab::sobolev_norm(*mesh, Field(pushed.values() - c.values()), k, 2.0);
      EXPECT_NEAR(ratio, oracle::sphere_chart_ratio(a), 1e-12) << a << " " << k;
    }
  }
}

TEST(Charts, BilipschitzConstantApproachesOneForSmallRadii) {
  const MapField f = near_identity(3, 0.2, 2);
  double previous = 1.0;
  for (double radius : {0.02, 0.1, 0.3}) {
    const hmlab::ChartReport report = hmlab::bilipschitz_estimate(f, radius, 12, 2, 2.0, 9);
    EXPECT_EQ(report.sample_count, 12);
    EXPECT_GE(report.c4_estimate, 1.0);
    EXPECT_GE(report.c4_estimate, previous - 1e-12);
    EXPECT_LT(report.max_roundtrip_error, 1e-9);
    EXPECT_LE(report.min_ratio, report.max_ratio);
    previous = report.c4_estimate;
  }
  EXPECT_LT(hmlab::bilipschitz_estimate(f, 0.02, 12, 2, 2.0, 9).c4_estimate, 1.01);
}

TEST(Charts, ReportValidatesItsInputs) {
  const MapField f = near_identity(2, 0.1, 1);
  expect_throws_code([&] { hmlab::bilipschitz_estimate(f, 0.0, 4, 2, 2.0, 1); },
                     ErrorCode::InvalidSpec);
  expect_throws_code([&] { hmlab::bilipschitz_estimate(f, 0.6, 4, 2, 2.0, 1); },
                     ErrorCode::ChartRadiusExceeded);
  expect_throws_code([&] { hmlab::bilipschitz_estimate(f, 0.1, 0, 2, 2.0, 1); },
                     ErrorCode::InvalidSpec);
  const auto j = nlohmann::json::parse(hmlab::bilipschitz_estimate(f, 0.1, 3, 1, 3.0, 1).to_json());
  EXPECT_EQ(j["sample_count"], 3);
  EXPECT_EQ(j["norm"]["k"], 1);
  EXPECT_DOUBLE_EQ(j["norm"]["p"].get<double>(), 3.0);
  EXPECT_DOUBLE_EQ(j["radius_used"].get<double>(), 0.1);
}
