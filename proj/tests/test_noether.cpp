#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sesqui/energy.hpp"
#include "sesqui/families.hpp"
#include "sesqui/noether.hpp"

using namespace sesqui;

namespace {

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::InvalidArgument;
}

/// Latitude whose polar angle wobbles along the circle; not a critical point.
SphereField wobble(const Grid& g) {
  return project_sphere(sample_ambient(g, 3, [](std::span<const double> x, std::span<double> out) {
    const double a = 0.8 + 0.3 * std::sin(x[0]) + (x.size() > 1 ? 0.2 * std::cos(x[1]) : 0.0);
    out[0] = std::sin(a) * std::cos(x[0]);
    out[1] = std::sin(a) * std::sin(x[0]);
    out[2] = std::cos(a);
  }));
}

}  // namespace

TEST(Killing, Validation) {
  EXPECT_EQ(code_of([] { KillingGenerator(3, {0, 1, 0, 1, 0, 0, 0, 0, 0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { KillingGenerator(3, {0, 1, 0}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { KillingGenerator::elementary(3, 1, 1); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(so_basis(2).size(), 3u);
  EXPECT_EQ(so_basis(4).size(), 10u);
  const auto z = KillingGenerator::z_rotation(3);
  EXPECT_EQ(z(1, 0), 1.0);
  EXPECT_EQ(z(0, 1), -1.0);
  const auto mix = KillingGenerator::elementary(3, 0, 2).combine(2.0, -1.0, z);
  EXPECT_EQ(mix(0, 2), 2.0);
  EXPECT_EQ(mix(0, 1), 1.0);
}

TEST(Current, LatitudeClosedForm) {
  const double alpha = 0.9;
  const oracle::Latitude lat(alpha);
  const Coupling c(0.4, 1.3);
  const Grid g = Grid::torus(1, 512, kTwoPi);
  const CurrentField j = current(latitude_circle(g, alpha), c, KillingGenerator::z_rotation(3));
  for (std::size_t x = 0; x < g.node_count(); x += 31) EXPECT_NEAR(j.J[0][x], lat.z_current(0.4, 1.3), 1e-4);
}

TEST(Current, RotationCurrentConstantOnAnyLatitude) {
  const Grid g = Grid::torus(1, 64, kTwoPi);
  const Coupling c(0.3, 1.0);
  const auto rows = conservation_report(latitude_circle(g, 0.6), c);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].a, 0);
  EXPECT_EQ(rows[0].b, 1);
  EXPECT_LT(rows[0].sup_div, 1e-11);
  EXPECT_LT(rows[0].max_weak, 1e-11);
  EXPECT_GT(rows[1].sup_div, 1e-2);
}

TEST(Current, EveryGeneratorConservedOnMatchedLatitude) {
  const Coupling c(0.3, 1.0);
  double prev = 0.0;
  for (std::size_t n : {64u, 128u, 256u}) {
    const Grid g = Grid::torus(1, n, kTwoPi);
    double worst = 0.0;
    for (const auto& row : conservation_report(latitude_circle(g, oracle::matched_alpha(0.3)), c)) {
      worst = std::max(worst, row.sup_div);
    }
    if (prev > 0.0) {
      EXPECT_NEAR(std::log2(prev / worst), 2.0, 0.2);
    }
    prev = worst;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Current, NotConservedOffShell) {
  const Grid g = Grid::torus(1, 64, kTwoPi);
  const ScalarField div = current_divergence(wobble(g), Coupling(0.3, 1.0), KillingGenerator::z_rotation(3));
  EXPECT_GT(sup_norm(div), 1e-2);
}

TEST(Current, DivergenceIsResidualAlongKillingField) {
  // div J = <EL(phi), A phi> for the continuum operator; second order on the grid.
  const Coupling c(0.3, 1.0);
  const auto A = KillingGenerator::elementary(3, 0, 2);
  double prev = 0.0;
  for (std::size_t n : {64u, 128u, 256u}) {
    const Grid g = Grid::torus(1, n, kTwoPi);
    const SphereField phi = wobble(g);
    const ScalarField div = current_divergence(phi, c, A);
    const ScalarField rhs = dot(el_residual(phi, c), killing_field(A, phi));
    const double err = sup_norm(div - rhs) / sup_norm(rhs);
    if (prev > 0.0) {
      EXPECT_NEAR(std::log2(prev / err), 2.0, 0.3);
    }
    prev = err;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(Current, WeakPairingEqualsStrongPairing) {
  const Grid g = Grid::torus(2, 24, kTwoPi);
  const Coupling c(-0.5, 1.0);
  const SphereField phi = wobble(g);
  for (const auto& gen : so_basis(2)) {
    const CurrentField j = current(phi, c, gen.generator);
    const ScalarField div = divergence(j);
    for (const auto& t : trig_test_family(g, 2)) {
      const double weak = weak_pairing(j, t.eta);
      const double strong = integrate(product(t.eta, div));
      EXPECT_NEAR(weak, strong, 1e-11 * (1.0 + std::abs(strong))) << t.label;
    }
  }
  EXPECT_EQ(code_of([] {
              const Grid p = Grid::patch(1, 21, 1.0);
              weak_pairing(north_pole_map(p), Coupling(0.0, 1.0), KillingGenerator::z_rotation(3),
                           ScalarField::zeros(p));
            }),
            ErrorCode::InvalidDomain);
}

TEST(Current, WedgeMatchesGeneratorCurrents) {
  const Grid g = Grid::torus(2, 16, kTwoPi);
  const Coupling c(0.7, -0.2);
  const SphereField phi = random_sphere_field(g, 3, 8);
  const WedgeCurrent w = wedge_current(phi, c);
  for (const auto& gen : so_basis(3)) {
    const CurrentField j = current(phi, c, gen.generator);
    for (int i = 0; i < 2; ++i) {
      const ScalarField e = w.entry(i, gen.a, gen.b);
      EXPECT_LT(sup_norm(e - j.J[i]), 1e-10 * (1.0 + sup_norm(j.J[i])));
      EXPECT_LT(sup_norm(e + w.entry(i, gen.b, gen.a)), 1e-12);
    }
  }
}

TEST(Current, LinearInGenerator) {
  const Grid g = Grid::torus(1, 32, kTwoPi);
  const SphereField phi = random_sphere_field(g, 2, 4);
  const Coupling c(1.0, 1.0);
  const auto a = KillingGenerator::elementary(3, 0, 1);
  const auto b = KillingGenerator::elementary(3, 1, 2);
  const ScalarField lhs = current(phi, c, a.combine(2.0, 3.0, b)).J[0];
  const ScalarField rhs = combine(2.0, current(phi, c, a).J[0], 3.0, current(phi, c, b).J[0]);
  EXPECT_LT(sup_norm(lhs - rhs), 1e-10 * sup_norm(rhs));
  EXPECT_EQ(sup_norm(current(phi, c, KillingGenerator::zero(3)).J[0]), 0.0);
}
