#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/grid.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Samples a scalar function of the node coordinates.
inline ScalarField sample_scalar(const Grid& grid, const std::function<double(std::span<const double>)>& f) {
  auto out = ScalarField::zeros(grid);
  std::vector<double> x(grid.dim());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coord(node, a);
    out[node] = f(x);
  }
  return out;
}

/// Samples a vector function of the node coordinates.
inline AmbientField sample_ambient(const Grid& grid, int components,
                                   const std::function<void(std::span<const double>, std::span<double>)>& f) {
  auto out = AmbientField::zeros(grid, components);
  std::vector<double> x(grid.dim());
  for (std::size_t node = 0; node < grid.node_count(); ++node) {
    for (int a = 0; a < grid.dim(); ++a) x[a] = grid.coord(node, a);
    f(x, out.at(node));
  }
  return out;
}

inline SphereField constant_map(const Grid& grid, std::span<const double> point) {
  double n2 = 0.0;
  for (double v : point) n2 += v * v;
  require(point.size() >= 2, ErrorCode::InvalidArgument, "point must live in R^{n+1}, n >= 1");
  require(std::abs(std::sqrt(n2) - 1.0) <= SphereField::kNormTolerance, ErrorCode::NotUnitNorm,
          "constant map value must be a unit vector");
  const int nc = static_cast<int>(point.size());
  return SphereField(sample_ambient(grid, nc, [&](std::span<const double>, std::span<double> out) {
    for (int c = 0; c < nc; ++c) out[c] = point[c];
  }));
}

/// North pole (0, ..., 0, 1) of S^n.
inline SphereField north_pole_map(const Grid& grid, int n = 2) {
  std::vector<double> p(n + 1, 0.0);
  p[n] = 1.0;
  return constant_map(grid, p);
}

namespace detail {

inline void require_circle_domain(const Grid& grid, double period) {
  if (grid.periodic()) {
    require(std::abs(grid.length(0) - period) <= 1e-12 * period, ErrorCode::InvalidGrid,
            "circle maps need axis 0 to have period " + std::to_string(period));
  }
}

inline SphereField circle_map(const Grid& grid, double alpha, double speed, int n) {
  require(n >= 2, ErrorCode::InvalidArgument, "circles need a target S^n with n >= 2");
  const double s = std::sin(alpha);
  const double c = std::cos(alpha);
  auto f = sample_ambient(grid, n + 1, [&](std::span<const double> x, std::span<double> out) {
    const double t = speed * x[0];
    out[0] = s * std::cos(t);
    out[1] = s * std::sin(t);
    out[n] = c;
  });
  // Renormalize so the unit-norm invariant holds to rounding.
  return project_sphere(f);
}

}  // namespace detail

/// phi_alpha(x) = (sin a cos x_0, sin a sin x_0, cos a): a small circle of
/// latitude traversed with speed sin a. Depends on x_0 only, so on an
/// m-dimensional grid it is already the product extension.
inline SphereField latitude_circle(const Grid& grid, double alpha, int n = 2) {
  detail::require_circle_domain(grid, kTwoPi);
  return detail::circle_map(grid, alpha, 1.0, n);
}

inline SphereField great_circle(const Grid& grid, int n = 2) {
  return latitude_circle(grid, std::numbers::pi / 2.0, n);
}

/// Latitude circle parameterized by arclength, |d phi| = 1. On a torus the
/// period of axis 0 must be 2 pi sin(alpha).
inline SphereField unit_speed_latitude_circle(const Grid& grid, double alpha, int n = 2) {
  const double s = std::sin(alpha);
  require(s > 0.0, ErrorCode::InvalidArgument, "unit-speed circle needs sin(alpha) > 0");
  detail::require_circle_domain(grid, kTwoPi * s);
  return detail::circle_map(grid, alpha, 1.0 / s, n);
}

/// Latitude angle of the exact solution family: sin^2 a = (1 + d1/d2) / 2.
inline double matched_latitude_angle(double ratio) {
  require(ratio > -1.0 && ratio < 1.0, ErrorCode::InvalidArgument,
          "matched latitude family needs |delta1/delta2| < 1");
  return std::asin(std::sqrt(0.5 * (1.0 + ratio)));
}

/// Lifts a field on a 1-D grid to `dim` dimensions, constant along axes 1..m-1.
/// Every axis copies the node count and extent of the base axis.
inline SphereField product_extension(const SphereField& base, int dim) {
  const Grid& g1 = base.grid();
  require(g1.dim() == 1, ErrorCode::InvalidArgument, "product extension needs a 1-D base field");
  require(dim >= 1, ErrorCode::InvalidArgument, "dimension must be at least 1");
  const Grid g = g1.periodic() ? Grid::torus(dim, g1.size(0), g1.length(0))
                               : Grid::patch(dim, g1.size(0), g1.half_width(), g1.margin());
  const int nc = base.components();
  auto out = AmbientField::zeros(g, nc);
  for (std::size_t node = 0; node < g.node_count(); ++node) {
    auto src = base.at(g.index(node, 0));
    auto dst = out.at(node);
    for (int c = 0; c < nc; ++c) dst[c] = src[c];
  }
  return SphereField(std::move(out));
}

// ---------------------------------------------------------------------------
// Seeded randomness. The engine is fully specified by the standard; the
// normal deviates use our own Box-Muller so streams are portable.

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Independent uniformly distributed unit vectors at every node.
inline SphereField random_sphere_field(const Grid& grid, int n, std::uint64_t seed) {
  NormalStream rng(seed);
  auto f = AmbientField::zeros(grid, n + 1);
  for (double& v : f.values()) v = rng.normal();
  return project_sphere(f);
}

/// Gaussian ambient field (not projected).
inline AmbientField random_ambient_field(const Grid& grid, int components, std::uint64_t seed) {
  NormalStream rng(seed);
  auto f = AmbientField::zeros(grid, components);
  for (double& v : f.values()) v = rng.normal();
  return f;
}

/// Random tangent field along phi, scaled to the given sup-norm.
inline AmbientField random_tangent_field(const SphereField& phi, double sup, std::uint64_t seed) {
  AmbientField w = tangent_project(phi, random_ambient_field(phi.grid(), phi.components(), seed));
  const double s = sup_norm(w);
  return s > 0.0 ? (sup / s) * w : w;
}

/// project_sphere(phi + W) with W a random tangent field of sup-norm `amplitude`.
inline SphereField perturb(const SphereField& phi, double amplitude, std::uint64_t seed) {
  return project_sphere(phi.ambient() + random_tangent_field(phi, amplitude, seed));
}

}  // namespace sesqui
