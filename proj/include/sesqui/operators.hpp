#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/grid.hpp"

namespace sesqui {

// ---------------------------------------------------------------------------
// Region helpers

/// Layers excluded from reductions: the patch margin, or deeper when the
/// field itself is only valid further inside.
template <class Tag>
int region_depth(const GridField<Tag>& f) {
  return f.grid().periodic() ? 0 : std::max(f.depth(), f.grid().margin());
}

inline int stencil_depth(const Grid& grid, int depth, int radius) {
  return grid.periodic() ? 0 : depth + radius;
}

// ---------------------------------------------------------------------------
// Linear stencils

inline void check_axis(const Grid& grid, int axis) {
  require(axis >= 0 && axis < grid.dim(), ErrorCode::AxisOutOfRange,
          "axis " + std::to_string(axis) + " out of range for dimension " +
              std::to_string(grid.dim()));
}

/// Central difference (F(x+h e_i) - F(x-h e_i)) / 2h.
template <class Tag>
GridField<Tag> partial(const GridField<Tag>& f, int axis) {
  const Grid& g = f.grid();
  check_axis(g, axis);
  const int depth = stencil_depth(g, f.depth(), 1);
  auto out = GridField<Tag>::zeros(g, f.components(), depth);
  const double scale = 0.5 / g.spacing(axis);
  const int nc = f.components();
  for_each_node(g, depth, [&](std::size_t x) {
    auto p = f.at(g.neighbor(x, axis, 1));
    auto m = f.at(g.neighbor(x, axis, -1));
    auto o = out.at(x);
    for (int c = 0; c < nc; ++c) o[c] = (p[c] - m[c]) * scale;
  });
  return out;
}

/// Standard (2m+1)-point Laplacian.
template <class Tag>
GridField<Tag> laplacian(const GridField<Tag>& f) {
  const Grid& g = f.grid();
  const int depth = stencil_depth(g, f.depth(), 1);
  auto out = GridField<Tag>::zeros(g, f.components(), depth);
  const int nc = f.components();
  std::vector<double> inv_h2(g.dim());
  for (int a = 0; a < g.dim(); ++a) inv_h2[a] = 1.0 / (g.spacing(a) * g.spacing(a));
  for_each_node(g, depth, [&](std::size_t x) {
    auto o = out.at(x);
    auto c0 = f.at(x);
    for (int a = 0; a < g.dim(); ++a) {
      auto p = f.at(g.neighbor(x, a, 1));
      auto m = f.at(g.neighbor(x, a, -1));
      for (int c = 0; c < nc; ++c) o[c] += (p[c] - 2.0 * c0[c] + m[c]) * inv_h2[a];
    }
  });
  return out;
}

/// Discrete Laplacian composed with itself.
template <class Tag>
GridField<Tag> bilaplacian(const GridField<Tag>& f) {
  return laplacian(laplacian(f));
}

/// Second difference d_i d_j: the 3-point stencil for i == j, the symmetric
/// 4-point cross stencil otherwise.
template <class Tag>
GridField<Tag> second_difference(const GridField<Tag>& f, int i, int j) {
  const Grid& g = f.grid();
  check_axis(g, i);
  check_axis(g, j);
  const int depth = stencil_depth(g, f.depth(), 1);
  auto out = GridField<Tag>::zeros(g, f.components(), depth);
  const int nc = f.components();
  if (i == j) {
    const double s = 1.0 / (g.spacing(i) * g.spacing(i));
    for_each_node(g, depth, [&](std::size_t x) {
      auto p = f.at(g.neighbor(x, i, 1));
      auto m = f.at(g.neighbor(x, i, -1));
      auto c0 = f.at(x);
      auto o = out.at(x);
      for (int c = 0; c < nc; ++c) o[c] = (p[c] - 2.0 * c0[c] + m[c]) * s;
    });
    return out;
  }
  const double s = 0.25 / (g.spacing(i) * g.spacing(j));
  for_each_node(g, depth, [&](std::size_t x) {
    const std::size_t xp = g.neighbor(x, i, 1);
    const std::size_t xm = g.neighbor(x, i, -1);
    auto pp = f.at(g.neighbor(xp, j, 1));
    auto pm = f.at(g.neighbor(xp, j, -1));
    auto mp = f.at(g.neighbor(xm, j, 1));
    auto mm = f.at(g.neighbor(xm, j, -1));
    auto o = out.at(x);
    for (int c = 0; c < nc; ++c) o[c] = (pp[c] - pm[c] - mp[c] + mm[c]) * s;
  });
  return out;
}

inline AmbientField partial(const SphereField& phi, int axis) { return partial(phi.ambient(), axis); }
inline AmbientField laplacian(const SphereField& phi) { return laplacian(phi.ambient()); }
inline AmbientField bilaplacian(const SphereField& phi) { return bilaplacian(phi.ambient()); }

// ---------------------------------------------------------------------------
// Pointwise algebra

inline ScalarField dot(const AmbientField& a, const AmbientField& b) {
  require_same_grid(a.grid(), b.grid());
  require(a.components() == b.components(), ErrorCode::InvalidArgument, "component mismatch");
  const int depth = std::max(a.depth(), b.depth());
  auto out = ScalarField::zeros(a.grid(), 1, depth);
  const int nc = a.components();
  for_each_node(a.grid(), depth, [&](std::size_t x) {
    auto u = a.at(x);
    auto v = b.at(x);
    double s = 0.0;
    for (int c = 0; c < nc; ++c) s += u[c] * v[c];
    out[x] = s;
  });
  return out;
}

inline ScalarField norm_squared(const AmbientField& a) { return dot(a, a); }

/// a(x) * b(x).
inline ScalarField product(const ScalarField& a, const ScalarField& b) {
  require_same_grid(a.grid(), b.grid());
  const int depth = std::max(a.depth(), b.depth());
  auto out = ScalarField::zeros(a.grid(), 1, depth);
  for_each_node(a.grid(), depth, [&](std::size_t x) { out[x] = a[x] * b[x]; });
  return out;
}

/// s(x) * V(x).
inline AmbientField scale(const ScalarField& s, const AmbientField& v) {
  require_same_grid(s.grid(), v.grid());
  const int depth = std::max(s.depth(), v.depth());
  auto out = AmbientField::zeros(v.grid(), v.components(), depth);
  const int nc = v.components();
  for_each_node(v.grid(), depth, [&](std::size_t x) {
    auto in = v.at(x);
    auto o = out.at(x);
    for (int c = 0; c < nc; ++c) o[c] = s[x] * in[c];
  });
  return out;
}

/// a * A + b * B.
template <class Tag>
GridField<Tag> combine(double a, const GridField<Tag>& A, double b, const GridField<Tag>& B) {
  require_same_grid(A.grid(), B.grid());
  require(A.components() == B.components(), ErrorCode::InvalidArgument, "component mismatch");
  const int depth = std::max(A.depth(), B.depth());
  auto out = GridField<Tag>::zeros(A.grid(), A.components(), depth);
  auto o = out.values();
  auto u = A.values();
  auto v = B.values();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = a * u[k] + b * v[k];
  return out;
}

template <class Tag>
GridField<Tag> operator+(const GridField<Tag>& A, const GridField<Tag>& B) {
  return combine(1.0, A, 1.0, B);
}
template <class Tag>
GridField<Tag> operator-(const GridField<Tag>& A, const GridField<Tag>& B) {
  return combine(1.0, A, -1.0, B);
}
template <class Tag>
GridField<Tag> operator*(double a, const GridField<Tag>& A) {
  auto out = A;
  for (double& v : out.values()) v *= a;
  return out;
}

// ---------------------------------------------------------------------------
// Reductions

/// Largest pointwise Euclidean norm over the valid region.
template <class Tag>
double sup_norm(const GridField<Tag>& f) {
  double best = 0.0;
  const int nc = f.components();
  for_each_node(f.grid(), region_depth(f), [&](std::size_t x) {
    auto v = f.at(x);
    double s = 0.0;
    for (int c = 0; c < nc; ++c) s += v[c] * v[c];
    best = std::max(best, std::sqrt(s));
  });
  return best;
}

/// Quadrature of a scalar field: sum of f(x) * prod h_i over the torus, or
/// over the patch interior.
inline double integrate(const ScalarField& f) {
  double sum = 0.0;
  for_each_node(f.grid(), region_depth(f), [&](std::size_t x) { sum += f[x]; });
  return sum * f.grid().cell_volume();
}

template <class Tag>
double l2_norm(const GridField<Tag>& f) {
  double sum = 0.0;
  for_each_node(f.grid(), region_depth(f), [&](std::size_t x) {
    for (double v : f.at(x)) sum += v * v;
  });
  return std::sqrt(sum * f.grid().cell_volume());
}

/// Grid inner product sum_x <A(x), B(x)> dV on the valid region.
inline double grid_inner(const AmbientField& a, const AmbientField& b) {
  return integrate(dot(a, b));
}

// ---------------------------------------------------------------------------
// Sphere geometry

/// V - <V, phi> phi.
inline AmbientField tangent_project(const SphereField& phi, const AmbientField& v) {
  require_same_grid(phi.grid(), v.grid());
  require(phi.components() == v.components(), ErrorCode::InvalidArgument, "component mismatch");
  auto out = AmbientField::zeros(v.grid(), v.components(), v.depth());
  const int nc = v.components();
  for_each_node(v.grid(), v.depth(), [&](std::size_t x) {
    auto p = phi.at(x);
    auto in = v.at(x);
    double s = 0.0;
    for (int c = 0; c < nc; ++c) s += in[c] * p[c];
    auto o = out.at(x);
    for (int c = 0; c < nc; ++c) o[c] = in[c] - s * p[c];
  });
  return out;
}

inline constexpr double kNearZeroNorm = 1e-8;

/// Normalization retraction F / |F|.
inline SphereField project_sphere(const AmbientField& f) {
  require(f.depth() == 0, ErrorCode::InvalidArgument, "cannot project a field with an invalid band");
  auto out = AmbientField::zeros(f.grid(), f.components());
  const int nc = f.components();
  for (std::size_t x = 0; x < f.node_count(); ++x) {
    auto in = f.at(x);
    double s = 0.0;
    for (int c = 0; c < nc; ++c) s += in[c] * in[c];
    const double norm = std::sqrt(s);
    require(norm >= kNearZeroNorm, ErrorCode::NearZeroVector,
            "node " + std::to_string(x) + " has norm below 1e-8");
    auto o = out.at(x);
    for (int c = 0; c < nc; ++c) o[c] = in[c] / norm;
  }
  return SphereField(std::move(out));
}

/// |d phi|^2 = sum_i |d_i phi|^2.
inline ScalarField energy_density(const SphereField& phi) {
  const Grid& g = phi.grid();
  ScalarField e = norm_squared(partial(phi, 0));
  for (int i = 1; i < g.dim(); ++i) e = e + norm_squared(partial(phi, i));
  return e;
}

/// First- and second-order quantities shared by the energy, current and
/// stress computations. Everything is built from the same stencils.
struct Kinematics {
  std::vector<AmbientField> d;  ///< d_i phi
  AmbientField lap;             ///< Delta phi
  ScalarField e;                ///< |d phi|^2
  AmbientField tau;             ///< Delta phi + |d phi|^2 phi
};

/// Accepts raw node values so the discrete energy can be differentiated off
/// the constraint manifold.
inline Kinematics kinematics(const AmbientField& phi) {
  const Grid& g = phi.grid();
  std::vector<AmbientField> d;
  d.reserve(g.dim());
  for (int i = 0; i < g.dim(); ++i) d.push_back(partial(phi, i));
  ScalarField e = norm_squared(d[0]);
  for (int i = 1; i < g.dim(); ++i) e = e + norm_squared(d[i]);
  AmbientField lap = laplacian(phi);
  AmbientField tau = lap + scale(e, phi);
  return {std::move(d), std::move(lap), std::move(e), std::move(tau)};
}

inline Kinematics kinematics(const SphereField& phi) { return kinematics(phi.ambient()); }

/// Tension field tau = Delta phi + |d phi|^2 phi in ambient coordinates.
inline AmbientField tension(const SphereField& phi) { return kinematics(phi).tau; }

/// Pullback connection of the tension: d_i(Delta phi) + d_i(|d phi|^2 phi)
/// + <Delta phi, d_i phi> phi.
inline AmbientField bar_nabla_tension(const Kinematics& k, const SphereField& phi, int axis) {
  check_axis(phi.grid(), axis);
  AmbientField out = partial(k.lap, axis) + partial(scale(k.e, phi.ambient()), axis);
  return out + scale(dot(k.lap, k.d[axis]), phi.ambient());
}

inline AmbientField bar_nabla_tension(const SphereField& phi, int axis) {
  return bar_nabla_tension(kinematics(phi), phi, axis);
}

/// Covariant Hessian of phi for a sphere target, indexed (i, j).
struct CovariantHessian {
  int dim = 0;
  std::vector<AmbientField> entries;
  const AmbientField& operator()(int i, int j) const { return entries[i * dim + j]; }
};

/// bar-nabla_i d_j phi = d_i d_j phi + <d_i phi, d_j phi> phi.
inline CovariantHessian bar_nabla_dphi(const SphereField& phi) {
  const Grid& g = phi.grid();
  const int m = g.dim();
  std::vector<AmbientField> d;
  for (int i = 0; i < m; ++i) d.push_back(partial(phi, i));
  CovariantHessian out;
  out.dim = m;
  out.entries.reserve(m * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (j < i) {
        out.entries.push_back(out.entries[j * m + i]);
        continue;
      }
      out.entries.push_back(second_difference(phi.ambient(), i, j) +
                            scale(dot(d[i], d[j]), phi.ambient()));
    }
  }
  return out;
}

/// sum_{i,j} |bar-nabla_i d_j phi|^2.
inline ScalarField covariant_hessian_norm_squared(const CovariantHessian& h) {
  ScalarField out = norm_squared(h.entries[0]);
  for (std::size_t k = 1; k < h.entries.size(); ++k) out = out + norm_squared(h.entries[k]);
  return out;
}

/// First and second differences of a vector field at one node, from the
/// same stencils as partial() and second_difference().
struct LocalJet {
  int dim = 0;
  int components = 0;
  std::vector<double> d;   ///< d_i phi, [i * components + k]
  std::vector<double> dd;  ///< d_i d_j phi, [(i * dim + j) * components + k]

  const double* first(int i) const { return &d[static_cast<std::size_t>(i) * components]; }
  const double* second(int i, int j) const { return &dd[(static_cast<std::size_t>(i) * dim + j) * components]; }
};

/// Calls fn(node, jet) for every node of the region where second differences
/// of phi are valid.
template <class Fn>
void for_each_jet(const AmbientField& phi, Fn&& fn) {
  const Grid& g = phi.grid();
  const int m = g.dim();
  const int nc = phi.components();
  LocalJet jet;
  jet.dim = m;
  jet.components = nc;
  jet.d.assign(static_cast<std::size_t>(m) * nc, 0.0);
  jet.dd.assign(static_cast<std::size_t>(m) * m * nc, 0.0);
  for_each_node(g, stencil_depth(g, phi.depth(), 1), [&](std::size_t x) {
    auto c0 = phi.at(x);
    for (int i = 0; i < m; ++i) {
      const double hi = g.spacing(i);
      auto p = phi.at(g.neighbor(x, i, 1));
      auto q = phi.at(g.neighbor(x, i, -1));
      for (int k = 0; k < nc; ++k) {
        jet.d[i * nc + k] = (p[k] - q[k]) * (0.5 / hi);
        jet.dd[(i * m + i) * nc + k] = (p[k] - 2.0 * c0[k] + q[k]) / (hi * hi);
      }
      for (int j = i + 1; j < m; ++j) {
        const std::size_t xp = g.neighbor(x, i, 1);
        const std::size_t xm = g.neighbor(x, i, -1);
        auto pp = phi.at(g.neighbor(xp, j, 1));
        auto pm = phi.at(g.neighbor(xp, j, -1));
        auto mp = phi.at(g.neighbor(xm, j, 1));
        auto mm = phi.at(g.neighbor(xm, j, -1));
        const double s = 0.25 / (hi * g.spacing(j));
        for (int k = 0; k < nc; ++k) {
          const double v = (pp[k] - pm[k] - mp[k] + mm[k]) * s;
          jet.dd[(i * m + j) * nc + k] = v;
          jet.dd[(j * m + i) * nc + k] = v;
        }
      }
    }
    fn(x, static_cast<const LocalJet&>(jet));
  });
}

/// sum_{i,j} |d_i d_j phi + c <d_i phi, d_j phi> phi|^2 evaluated node by
/// node without storing the Hessian; c = 1 gives the covariant Hessian of a
/// sphere-valued map, c = 0 the flat one.
inline ScalarField hessian_norm_squared(const AmbientField& phi, double c) {
  const Grid& g = phi.grid();
  const int m = g.dim();
  const int nc = phi.components();
  auto out = ScalarField::zeros(g, 1, stencil_depth(g, phi.depth(), 1));
  for_each_jet(phi, [&](std::size_t x, const LocalJet& jet) {
    auto p = phi.at(x);
    double sum = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double* di = jet.first(i);
        const double* dj = jet.first(j);
        const double* h = jet.second(i, j);
        double dd = 0.0;
        for (int k = 0; k < nc; ++k) dd += di[k] * dj[k];
        for (int k = 0; k < nc; ++k) {
          const double v = h[k] + c * dd * p[k];
          sum += v * v;
        }
      }
    }
    out[x] = sum;
  });
  return out;
}

inline ScalarField covariant_hessian_norm_squared(const SphereField& phi) {
  return hessian_norm_squared(phi.ambient(), 1.0);
}

}  // namespace sesqui
