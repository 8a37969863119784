#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

/// Volume of the unit ball in R^m.
inline double unit_ball_volume(int m) {
  return std::pow(std::numbers::pi, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

/// Surface measure of the unit sphere S^{m-1}.
inline double unit_sphere_area(int m) { return m * unit_ball_volume(m); }

namespace detail {

/// Fraction of the cube c + [-a/2, a/2]^m lying on the ball side of the
/// tangent hyperplane at the point of the sphere |y| = r closest to c.
inline double halfspace_fraction(const std::vector<double>& c, double a, double r) {
  const int m = static_cast<int>(c.size());
  double norm = 0.0;
  for (double v : c) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) {
    // Cube centred on the ball centre: only reached when the ball is smaller
    // than the leaf cell.
    return std::min(1.0, unit_ball_volume(m) * std::pow(r / a, m));
  }
  // Sum of independent uniforms v_i in [0, w_i] below threshold t.
  std::vector<double> w;
  double total = 0.0;
  for (double v : c) total += std::abs(v) / norm * a;
  const double t = (r - norm) + 0.5 * total;
  if (t <= 0.0) return 0.0;
  if (t >= total) return 1.0;
  double shift = 0.0;
  for (double v : c) {
    const double wi = std::abs(v) / norm * a;
    if (wi > 1e-7 * a) {
      w.push_back(wi);
    } else {
      shift += 0.5 * wi;
    }
  }
  const double tt = t - shift;
  const int k = static_cast<int>(w.size());
  double prod = 1.0;
  for (double wi : w) prod *= wi;
  double factorial = 1.0;
  for (int q = 2; q <= k; ++q) factorial *= q;
  double sum = 0.0;
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    double s = tt;
    int bits = 0;
    for (int q = 0; q < k; ++q) {
      if (mask & (1u << q)) {
        s -= w[q];
        ++bits;
      }
    }
    if (s > 0.0) sum += (bits % 2 ? -1.0 : 1.0) * std::pow(s, k);
  }
  return std::clamp(sum / (factorial * prod), 0.0, 1.0);
}

inline double cube_ball_fraction(std::vector<double>& c, double a, double r, int levels) {
  const int m = static_cast<int>(c.size());
  double near = 0.0;
  double far = 0.0;
  for (double v : c) {
    const double lo = std::max(0.0, std::abs(v) - 0.5 * a);
    const double hi = std::abs(v) + 0.5 * a;
    near += lo * lo;
    far += hi * hi;
  }
  if (far <= r * r) return 1.0;
  if (near >= r * r) return 0.0;
  if (levels == 0) return halfspace_fraction(c, a, r);
  // Split into 2^m children of half the side.
  double sum = 0.0;
  std::vector<double> child(m);
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    for (int q = 0; q < m; ++q) child[q] = c[q] + ((mask >> q) & 1u ? 0.25 : -0.25) * a;
    sum += cube_ball_fraction(child, 0.5 * a, r, levels - 1);
  }
  return sum / static_cast<double>(1u << m);
}

}  // namespace detail

/// Quadrature weights for a ball of radius r centred on a node: each node
/// carries its cell volume times the fraction of its cell inside the ball.
/// Weights depend only on the offset from the centre, so one stencil serves
/// every node-centred ball of that radius.
class BallStencil {
 public:
  static constexpr int kDefaultLevels = 2;

  BallStencil(const Grid& grid, double radius, int levels = kDefaultLevels) : radius_(radius) {
    require(!grid.periodic(), ErrorCode::InvalidDomain, "ball integrals need a Euclidean patch");
    require(radius > 0.0, ErrorCode::InvalidArgument, "ball radius must be positive");
    const int m = grid.dim();
    const double h = grid.spacing(0);
    const int reach = static_cast<int>(std::ceil(radius / h + 0.5));
    const double cell = grid.cell_volume();
    std::vector<int> k(m, -reach);
    std::vector<double> c(m);
    while (true) {
      for (int q = 0; q < m; ++q) c[q] = k[q] * h;
      const double f = detail::cube_ball_fraction(c, h, radius, levels);
      if (f > 0.0) {
        std::ptrdiff_t offset = 0;
        int kmax = 0;
        for (int q = 0; q < m; ++q) {
          offset += static_cast<std::ptrdiff_t>(k[q]) * static_cast<std::ptrdiff_t>(grid.stride(q));
          kmax = std::max(kmax, std::abs(k[q]));
        }
        offsets_.push_back(offset);
        weights_.push_back(f * cell);
        reach_ = std::max(reach_, kmax);
        volume_ += f * cell;
      }
      int q = m - 1;
      while (q >= 0 && ++k[q] > reach) k[q--] = -reach;
      if (q < 0) break;
    }
  }

  double radius() const { return radius_; }
  /// Largest index offset carrying weight.
  int reach() const { return reach_; }
  /// Sum of weights; approximates the ball volume.
  double volume() const { return volume_; }

  /// True when every weighted node around `center` lies at least `depth` layers inside.
  bool fits(const Grid& grid, std::size_t center, int depth) const {
    for (int a = 0; a < grid.dim(); ++a) {
      const std::size_t k = grid.index(center, a);
      if (k < static_cast<std::size_t>(depth + reach_)) return false;
      if (k + depth + reach_ >= grid.size(a)) return false;
    }
    return true;
  }

  /// Integral of g(f(x)) over the ball around `center`.
  template <class Fn>
  double integrate(const ScalarField& f, std::size_t center, Fn&& g) const {
    double sum = 0.0;
    const auto base = static_cast<std::ptrdiff_t>(center);
    for (std::size_t q = 0; q < offsets_.size(); ++q) {
      sum += weights_[q] * g(f[static_cast<std::size_t>(base + offsets_[q])]);
    }
    return sum;
  }

  double integrate(const ScalarField& f, std::size_t center) const {
    return integrate(f, center, [](double v) { return v; });
  }

 private:
  double radius_;
  int reach_ = 0;
  double volume_ = 0.0;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<double> weights_;
};

/// Integral of f over B_r(origin) on a patch; the ball must lie in the
/// region where f is valid.
inline double integrate_ball(const ScalarField& f, double radius) {
  const Grid& g = f.grid();
  BallStencil ball(g, radius);
  const std::size_t center = g.origin_node();
  require(ball.fits(g, center, region_depth(f)), ErrorCode::BallOutOfPatch,
          "ball of radius " + std::to_string(radius) + " leaves the patch interior");
  return ball.integrate(f, center);
}

}  // namespace sesqui
