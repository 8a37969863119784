#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "sesqui/families.hpp"
#include "sesqui/operators.hpp"

using namespace sesqui;

namespace {

double sup_diff(const ScalarField& a, const ScalarField& b) { return sup_norm(a - b); }

ScalarField wave(const Grid& g, double k) {
  return sample_scalar(g, [k](std::span<const double> x) { return std::sin(k * x[0]); });
}

}  // namespace

TEST(Operators, PartialMatchesDiscreteSymbol) {
  const Grid g = Grid::torus(1, 64, kTwoPi);
  const double h = g.spacing(0);
  for (double k : {1.0, 3.0, 7.0}) {
    const ScalarField d = partial(wave(g, k), 0);
    const ScalarField expect = sample_scalar(g, [&](std::span<const double> x) {
      return oracle::first_symbol(k, h) * std::cos(k * x[0]);
    });
    EXPECT_LT(sup_diff(d, expect), 1e-12) << "k=" << k;
  }
}

TEST(Operators, LaplacianMatchesDiscreteSymbol) {
  const Grid g = Grid::torus({32, 48}, {kTwoPi, kTwoPi});
  const double h0 = g.spacing(0), h1 = g.spacing(1);
  const ScalarField f = sample_scalar(g, [](std::span<const double> x) { return std::cos(2 * x[0]) * std::sin(3 * x[1]); });
  const ScalarField expect = sample_scalar(g, [&](std::span<const double> x) {
    return (oracle::second_symbol(2, h0) + oracle::second_symbol(3, h1)) * std::cos(2 * x[0]) * std::sin(3 * x[1]);
  });
  EXPECT_LT(sup_diff(laplacian(f), expect), 1e-11);
}

TEST(Operators, CrossDifferenceMatchesSymbol) {
  const Grid g = Grid::torus(2, 40, kTwoPi);
  const double h = g.spacing(0);
  const ScalarField f = sample_scalar(g, [](std::span<const double> x) { return std::sin(x[0]) * std::sin(2 * x[1]); });
  const ScalarField expect = sample_scalar(g, [&](std::span<const double> x) {
    return oracle::first_symbol(1, h) * oracle::first_symbol(2, h) * std::cos(x[0]) * std::cos(2 * x[1]);
  });
  EXPECT_LT(sup_diff(second_difference(f, 0, 1), expect), 1e-12);
  EXPECT_LT(sup_diff(second_difference(f, 1, 0), expect), 1e-12);
}

TEST(Operators, SecondOrderConvergence) {
  double prev_d = 0.0, prev_l = 0.0;
  for (std::size_t n : {32u, 64u, 128u, 256u}) {
    const Grid g = Grid::torus(1, n, kTwoPi);
    const ScalarField f = sample_scalar(g, [](std::span<const double> x) { return std::exp(std::sin(x[0])); });
    const ScalarField df = sample_scalar(g, [](std::span<const double> x) { return std::cos(x[0]) * std::exp(std::sin(x[0])); });
    const ScalarField lf = sample_scalar(g, [](std::span<const double> x) {
      const double c = std::cos(x[0]), s = std::sin(x[0]);
      return (c * c - s) * std::exp(s);
    });
    const double ed = sup_diff(partial(f, 0), df);
    const double el = sup_diff(laplacian(f), lf);
    if (prev_d > 0.0) {
      EXPECT_NEAR(prev_d / ed, 4.0, 0.2);
      EXPECT_NEAR(prev_l / el, 4.0, 0.2);
    }
    prev_d = ed;
    prev_l = el;
  }
}

TEST(Operators, Linearity) {
  const Grid g = Grid::torus(2, 16, 1.0);
  const AmbientField a = random_ambient_field(g, 3, 1);
  const AmbientField b = random_ambient_field(g, 3, 2);
  const AmbientField lhs = laplacian(combine(2.0, a, -3.0, b));
  const AmbientField rhs = combine(2.0, laplacian(a), -3.0, laplacian(b));
  EXPECT_LT(sup_norm(lhs - rhs), 1e-10 * sup_norm(rhs));
  const AmbientField bl = bilaplacian(a);
  EXPECT_EQ(sup_norm(bl - laplacian(laplacian(a))), 0.0);
}

TEST(Operators, AxisChecked) {
  const Grid g = Grid::torus(1, 16, 1.0);
  const ScalarField f = ScalarField::zeros(g);
  try {
    partial(f, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AxisOutOfRange);
  }
}

TEST(Operators, PatchStencilsShrinkValidRegion) {
  const Grid g = Grid::patch(2, 21, 1.0);
  const ScalarField f = sample_scalar(g, [](std::span<const double> x) { return x[0] * x[0] + x[0] * x[1]; });
  const ScalarField lap = laplacian(f);
  EXPECT_EQ(lap.depth(), 1);
  EXPECT_EQ(laplacian(lap).depth(), 2);
  // Quadratics are differentiated exactly by the 3- and 4-point stencils.
  for_each_node(g, 1, [&](std::size_t x) { EXPECT_NEAR(lap[x], 2.0, 1e-10); });
  const ScalarField cross = second_difference(f, 0, 1);
  for_each_node(g, 1, [&](std::size_t x) { EXPECT_NEAR(cross[x], 1.0, 1e-10); });
  // Integration excludes the margin.
  const ScalarField one = sample_scalar(g, [](std::span<const double>) { return 1.0; });
  EXPECT_NEAR(integrate(one), 17.0 * 17.0 * g.cell_volume(), 1e-12);
}

TEST(Operators, TangentProjectionAndRetraction) {
  const Grid g = Grid::torus(2, 12, 1.0);
  const SphereField phi = random_sphere_field(g, 2, 7);
  const AmbientField w = tangent_project(phi, random_ambient_field(g, 3, 8));
  EXPECT_LT(sup_norm(dot(w, phi.ambient())), 1e-14);
  const AmbientField tiny = 1e-9 * phi.ambient();
  try {
    project_sphere(tiny);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NearZeroVector);
  }
  const SphereField back = project_sphere(3.0 * phi.ambient());
  EXPECT_LT(sup_norm(back.ambient() - phi.ambient()), 1e-15);
}

TEST(Operators, LatitudeKinematics) {
  const Grid g = Grid::torus(1, 128, kTwoPi);
  const double alpha = 0.7;
  const oracle::Latitude lat(alpha);
  const double h = g.spacing(0);
  const SphereField phi = latitude_circle(g, alpha);
  const Kinematics k = kinematics(phi);
  // |d phi|^2 = s^2 (sin h / h)^2 exactly; Delta phi scales the circle part by the second symbol.
  const double e_h = lat.s * lat.s * std::pow(oracle::first_symbol(1, h), 2);
  for (std::size_t x = 0; x < g.node_count(); ++x) EXPECT_NEAR(k.e[x], e_h, 1e-13);
  // tau is normal to the curve at every node (<tau, phi'> = 0 by symmetry).
  EXPECT_LT(sup_norm(dot(k.tau, k.d[0])), 1e-12);
  EXPECT_NEAR(sup_norm(k.tau), lat.s * lat.c, 1e-3);
}

TEST(Operators, CovariantHessianMatchesPieces) {
  const Grid g = Grid::torus(2, 16, kTwoPi);
  const SphereField phi = perturb(latitude_circle(g, 0.9), 0.1, 3);
  const ScalarField direct = covariant_hessian_norm_squared(phi);
  const ScalarField stored = covariant_hessian_norm_squared(bar_nabla_dphi(phi));
  EXPECT_LT(sup_norm(direct - stored), 1e-10 * sup_norm(stored));
}
