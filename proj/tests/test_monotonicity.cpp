#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sesqui/families.hpp"
#include "sesqui/monotonicity.hpp"

using namespace sesqui;

TEST(ThetaDensity, LatitudeClosedForm) {
  const double alpha = 0.9;
  const oracle::Latitude lat(alpha);
  for (int m : {1, 2, 3}) {
    const Grid g = m == 1 ? Grid::torus(1, 512, kTwoPi) : Grid::torus(m, m == 2 ? 256 : 64, kTwoPi);
    const ScalarField d = theta_density(latitude_circle(g, alpha), Coupling(0.5, -1.2));
    const double expect = lat.theta_density(0.5, -1.2, m);
    const double tol = m == 3 ? 1e-2 : 1e-3;
    for (std::size_t x = 0; x < g.node_count(); x += 97) EXPECT_NEAR(d[x], expect, tol) << "m=" << m;
  }
}

TEST(Theta, ScalesLikeBallVolume) {
  const double alpha = 0.8;
  const oracle::Latitude lat(alpha);
  const Coupling c(0.2, 1.0);
  const double k = lat.theta_density(0.2, 1.0, 2);
  const Grid g = Grid::patch(2, 201, 1.2);
  const ScalarField d = theta_density(latitude_circle(g, alpha), c);
  for (double r : {0.3, 0.6, 1.0}) {
    const double expect = oracle::ball_volume(2) * k * std::pow(r, 4);
    EXPECT_NEAR(theta(d, r), expect, 2e-3 * expect) << "r=" << r;
  }
}

TEST(Monotonicity, VerdictNotApplicableBelowFive) {
  const Grid g = Grid::patch(2, 41, 1.0);
  const MonotonicityReport r = monotonicity_report(latitude_circle(g, 0.7), Coupling(0.0, 1.0), {0.5, 0.25});
  EXPECT_EQ(r.verdict, Verdict::NotApplicable);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_LT(r.rows[0].r, r.rows[1].r);
  EXPECT_STREQ(to_string(r.verdict), "NotApplicable");
}

TEST(Monotonicity, ProductLatitudeInFiveDimensionsPasses) {
  const double q = 0.0;
  const double alpha = oracle::matched_alpha(q);
  const Grid g = Grid::patch(5, 11, 1.0);
  const MonotonicityReport r = monotonicity_report(latitude_circle(g, alpha), Coupling(q, 1.0), {0.2, 0.35, 0.5});
  EXPECT_LT(r.tau_orth, 1e-12);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  for (std::size_t k = 0; k + 1 < r.rows.size(); ++k) EXPECT_LT(r.rows[k].theta, r.rows[k + 1].theta);
}

TEST(Monotonicity, DecreasingThetaFails) {
  // A strongly negative delta1 makes the density negative, so Theta decreases in r.
  const Grid g = Grid::patch(5, 17, 1.0);
  const MonotonicityReport r = monotonicity_report(latitude_circle(g, 0.7), Coupling(-40.0, 1.0), {0.2, 0.8});
  EXPECT_EQ(r.verdict, Verdict::Fail);
  EXPECT_STREQ(to_string(r.verdict), "FAIL");
}

TEST(Monotonicity, RoughFieldIsPreconditionFailure) {
  const Grid g = Grid::patch(5, 9, 1.0);
  const MonotonicityReport r = monotonicity_report(random_sphere_field(g, 2, 3), Coupling(0.0, 1.0), {0.3});
  EXPECT_GT(r.tau_orth, kTauOrthogonalityThreshold);
  EXPECT_EQ(r.verdict, Verdict::PreconditionsUnmet);
}

TEST(Monotonicity, BallMustFit) {
  const Grid g = Grid::patch(2, 21, 1.0);
  try {
    theta(latitude_circle(g, 0.7), Coupling(0.0, 1.0), 0.95);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BallOutOfPatch);
  }
}
