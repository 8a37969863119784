#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sesqui/ball.hpp"
#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

struct MorreyParams {
  double p = 2.0;
  double lambda = 0.0;

  MorreyParams(double p_, double lambda_) : p(p_), lambda(lambda_) {
    require(std::isfinite(p) && p >= 1.0, ErrorCode::InvalidArgument, "Morrey exponent p must be finite and >= 1");
    require(std::isfinite(lambda) && lambda > 0.0, ErrorCode::InvalidArgument, "Morrey lambda must be positive");
  }

  void check(int m) const {
    require(lambda <= m, ErrorCode::InvalidArgument, "Morrey lambda must not exceed the dimension");
  }
};

/// Ball D = B_radius(center) with a node as centre.
struct BallRegion {
  std::size_t center = 0;
  double radius = 1.0;

  static BallRegion at_origin(const Grid& g, double radius) { return {g.origin_node(), radius}; }
};

struct MorreyOptions {
  /// Explicit radii; empty selects radius(D) * 2^-k for k >= 0 down to 2h.
  std::vector<double> radii;
  /// Ball centres sit on every `center_stride`-th node counted from the centre of D.
  int center_stride = 2;
};

struct MorreyResult {
  double p = 0.0;
  double lambda = 0.0;
  double norm = 0.0;
  std::vector<double> r_list;
  std::vector<double> best_center;
  double best_r = 0.0;
  std::size_t balls = 0;  ///< number of balls examined
};

inline std::vector<double> dyadic_radii(const Grid& g, double r_d) {
  std::vector<double> out;
  const double r_min = 2.0 * g.spacing(0);
  for (double r = r_d; r >= r_min - 1e-12 * r_d; r *= 0.5) out.push_back(r);
  return out;
}

/// sup over B_r(y) in D of (r^(lambda-m) * int_{B_r(y)} |f|^p)^(1/p), over a
/// radius family and a centre lattice. Every ball must lie in the valid region.
inline MorreyResult morrey_norm(const ScalarField& f, const MorreyParams& params, const BallRegion& d,
                                const MorreyOptions& opts = {}) {
  const Grid& g = f.grid();
  require(!g.periodic(), ErrorCode::InvalidDomain, "Morrey norms need a Euclidean patch");
  const int m = g.dim();
  params.check(m);
  require(opts.center_stride >= 1, ErrorCode::InvalidArgument, "center_stride must be positive");
  require(d.radius > 0.0, ErrorCode::InvalidArgument, "region radius must be positive");
  const int depth = region_depth(f);

  MorreyResult out;
  out.p = params.p;
  out.lambda = params.lambda;
  out.r_list = opts.radii.empty() ? dyadic_radii(g, d.radius) : opts.radii;

  ScalarField fp = f;
  for (double& v : fp.values()) v = std::pow(std::abs(v), params.p);

  const double h = g.spacing(0);
  std::vector<std::ptrdiff_t> dc(m);
  for (int a = 0; a < m; ++a) dc[a] = static_cast<std::ptrdiff_t>(g.index(d.center, a));

  double best = -1.0;
  std::size_t best_node = d.center;
  for (double r : out.r_list) {
    if (!(r > 0.0) || r > d.radius * (1.0 + 1e-12)) continue;
    const BallStencil ball(g, r);
    const double weight = std::pow(r, params.lambda - m);
    const int span = static_cast<int>(std::floor((d.radius - r) / h + 1e-9));
    std::vector<int> off(m, -span);
    while (true) {
      bool on_lattice = true;
      double dist2 = 0.0;
      std::ptrdiff_t node = 0;
      bool in_grid = true;
      for (int a = 0; a < m; ++a) {
        if (off[a] % opts.center_stride != 0) on_lattice = false;
        dist2 += static_cast<double>(off[a]) * off[a] * h * h;
        const std::ptrdiff_t k = dc[a] + off[a];
        if (k < 0 || k >= static_cast<std::ptrdiff_t>(g.size(a))) in_grid = false;
        node += k * static_cast<std::ptrdiff_t>(g.stride(a));
      }
      if (on_lattice && in_grid && std::sqrt(dist2) + r <= d.radius * (1.0 + 1e-12)) {
        const auto center = static_cast<std::size_t>(node);
        require(ball.fits(g, center, depth), ErrorCode::BallOutOfPatch,
                "Morrey ball leaves the valid region of the patch");
        const double v = weight * ball.integrate(fp, center);
        ++out.balls;
        if (v > best) {
          best = v;
          best_node = center;
          out.best_r = r;
        }
      }
      int a = m - 1;
      while (a >= 0 && ++off[a] > span) off[a--] = -span;
      if (a < 0) break;
    }
  }
  require(out.balls > 0, ErrorCode::EmptyBallFamily, "no ball of the family fits inside the region");
  out.norm = std::pow(std::max(best, 0.0), 1.0 / params.p);
  for (int a = 0; a < m; ++a) out.best_center.push_back(g.coord(best_node, a));
  return out;
}

/// sum_{i,j} |d_i d_j phi|^2 with flat second differences.
inline ScalarField flat_hessian_norm_squared(const SphereField& phi) {
  return hessian_norm_squared(phi.ambient(), 0.0);
}

struct SmallnessReport {
  double gradient_norm = 0.0;  ///< || |grad phi| ||_{M^{4,4}(B_1)}
  double hessian_norm = 0.0;   ///< || |grad^2 phi| ||_{M^{2,4}(B_1)}
  double quantity = 0.0;       ///< gradient_norm^4 + hessian_norm^2
  double epsilon0_sq = 0.0;
  bool satisfied = false;
  double m4_form = 0.0;        ///< int_{B_1} (|grad^2 phi|^2 + |grad phi|^4)
};

/// Smallness condition on the unit ball at the origin of a 4-D patch.
inline SmallnessReport smallness(const SphereField& phi, double eps0, const MorreyOptions& opts = {}) {
  const Grid& g = phi.grid();
  require(g.dim() == 4, ErrorCode::WrongDimension, "smallness condition is stated for m = 4");
  require(std::isfinite(eps0) && eps0 > 0.0, ErrorCode::InvalidArgument, "eps0 must be positive");
  ScalarField grad = energy_density(phi);
  for (double& v : grad.values()) v = std::sqrt(v);
  ScalarField hess = flat_hessian_norm_squared(phi);
  for (double& v : hess.values()) v = std::sqrt(v);

  const BallRegion unit = BallRegion::at_origin(g, 1.0);
  SmallnessReport out;
  out.gradient_norm = morrey_norm(grad, MorreyParams(4.0, 4.0), unit, opts).norm;
  out.hessian_norm = morrey_norm(hess, MorreyParams(2.0, 4.0), unit, opts).norm;
  out.quantity = std::pow(out.gradient_norm, 4) + out.hessian_norm * out.hessian_norm;
  out.epsilon0_sq = eps0 * eps0;
  out.satisfied = out.quantity <= out.epsilon0_sq;

  const BallStencil ball(g, 1.0);
  const std::size_t center = g.origin_node();
  require(ball.fits(g, center, region_depth(grad)), ErrorCode::BallOutOfPatch, "B_1 leaves the patch interior");
  out.m4_form = ball.integrate(hess, center, [](double v) { return v * v; }) +
                ball.integrate(grad, center, [](double v) { return v * v * v * v; });
  return out;
}

}  // namespace sesqui
