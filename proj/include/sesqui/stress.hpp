#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "sesqui/energy.hpp"
#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

/// Symmetric m x m tensor field; upper triangle stored row by row.
struct SymTensorField {
  int dim = 0;
  std::vector<ScalarField> packed;

  static std::size_t slot(int dim, int i, int j) {
    if (i > j) std::swap(i, j);
    return static_cast<std::size_t>(i * dim - i * (i - 1) / 2 + (j - i));
  }
  const ScalarField& operator()(int i, int j) const { return packed.at(slot(dim, i, j)); }
  int components() const { return static_cast<int>(packed.size()); }
};

/// Pieces shared by the stress tensor and the vanishing identity.
struct StressTerms {
  Kinematics k;
  std::vector<AmbientField> bar_tau;  ///< bar-nabla_j tau
  ScalarField tau2;                   ///< |tau|^2
  ScalarField div_flux;               ///< sum_k d_k <d_k phi, tau>
};

inline StressTerms stress_terms(const SphereField& phi) {
  StressTerms t{kinematics(phi), {}, ScalarField::zeros(phi.grid()), ScalarField::zeros(phi.grid())};
  const int m = phi.grid().dim();
  for (int j = 0; j < m; ++j) t.bar_tau.push_back(bar_nabla_tension(t.k, phi, j));
  t.tau2 = norm_squared(t.k.tau);
  t.div_flux = partial(dot(t.k.d[0], t.k.tau), 0);
  for (int i = 1; i < m; ++i) t.div_flux = t.div_flux + partial(dot(t.k.d[i], t.k.tau), i);
  return t;
}

/// S_ij = delta1 (2<d_i phi, d_j phi> - delta_ij |d phi|^2)
///      + delta2 (-|tau|^2 + 2 d_k <d_k phi, tau>) delta_ij
///      - 2 delta2 (<d_i phi, bar-nabla_j tau> + <d_j phi, bar-nabla_i tau>).
inline SymTensorField stress_tensor(const StressTerms& t, const Coupling& c) {
  const int m = static_cast<int>(t.k.d.size());
  const ScalarField diag = combine(-c.delta1, t.k.e, c.delta2, combine(-1.0, t.tau2, 2.0, t.div_flux));
  SymTensorField out;
  out.dim = m;
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      ScalarField s = combine(2.0 * c.delta1, dot(t.k.d[i], t.k.d[j]), -2.0 * c.delta2,
                              dot(t.k.d[i], t.bar_tau[j]) + dot(t.k.d[j], t.bar_tau[i]));
      if (i == j) s = s + diag;
      out.packed.push_back(std::move(s));
    }
  }
  return out;
}

inline SymTensorField stress_tensor(const SphereField& phi, const Coupling& c) {
  return stress_tensor(stress_terms(phi), c);
}

/// (div S)_j = sum_i d_i S_ij, one field per axis j.
inline std::vector<ScalarField> stress_divergence(const SymTensorField& s) {
  std::vector<ScalarField> out;
  for (int j = 0; j < s.dim; ++j) {
    ScalarField acc = partial(s(0, j), 0);
    for (int i = 1; i < s.dim; ++i) acc = acc + partial(s(i, j), i);
    out.push_back(std::move(acc));
  }
  return out;
}

inline std::vector<ScalarField> stress_divergence(const SphereField& phi, const Coupling& c) {
  return stress_divergence(stress_tensor(phi, c));
}

/// max_j sup |(div S)_j|.
inline double stress_divergence_sup(const std::vector<ScalarField>& div) {
  double best = 0.0;
  for (const auto& f : div) best = std::max(best, sup_norm(f));
  return best;
}

/// eta(r) = 1 for r <= R, 0 for r >= 2R, and 1 - P((r - R) / R) between, with
/// P(t) = 10t^3 - 15t^4 + 6t^5. C^2 with |eta^(i)| <= C / R^i.
class RadialCutoff {
 public:
  explicit RadialCutoff(double inner_radius) : r_(inner_radius) {
    require(std::isfinite(inner_radius) && inner_radius > 0.0, ErrorCode::InvalidArgument,
            "cutoff radius must be positive");
  }

  double inner_radius() const { return r_; }
  double outer_radius() const { return 2.0 * r_; }

  double value(double r) const {
    const double t = local(r);
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  }
  double first(double r) const {
    if (r <= r_ || r >= 2.0 * r_) return 0.0;
    const double t = local(r);
    return -30.0 * t * t * (1.0 - t) * (1.0 - t) / r_;
  }
  double second(double r) const {
    if (r <= r_ || r >= 2.0 * r_) return 0.0;
    const double t = local(r);
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t) / (r_ * r_);
  }

  /// max over i = 1, 2 of sup R^i |eta^(i)|, sampled on a fine grid.
  double derivative_bound(int samples = 20001) const {
    double c = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double r = r_ * (1.0 + static_cast<double>(k) / (samples - 1));
      c = std::max({c, r_ * std::abs(first(r)), r_ * r_ * std::abs(second(r))});
    }
    return c;
  }

 private:
  double local(double r) const { return std::clamp((r - r_) / r_, 0.0, 1.0); }
  double r_;
};

namespace detail {

/// Checks that every node with |x| < 2R lies in the valid region of depth `depth`.
inline void require_cutoff_inside(const Grid& g, const RadialCutoff& eta, int depth) {
  require(!g.periodic(), ErrorCode::InvalidDomain, "cutoff pairings need a Euclidean patch");
  const double room = g.half_width() - depth * g.spacing(0);
  require(eta.outer_radius() <= room + 1e-12 * g.half_width(), ErrorCode::BallOutOfPatch,
          "cutoff support B_2R leaves the patch interior");
}

inline double radius_of(const Grid& g, std::size_t x, std::vector<double>& pos) {
  double r2 = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    pos[a] = g.coord(x, a);
    r2 += pos[a] * pos[a];
  }
  return std::sqrt(r2);
}

}  // namespace detail

/// sum_x dV k^ij S_ij with k_ij = delta_ij eta + x_i x_j eta'(r) / r.
inline double stationary_pairing(const SymTensorField& s, const RadialCutoff& eta) {
  const Grid& g = s.packed.at(0).grid();
  const int depth = region_depth(s.packed[0]);
  detail::require_cutoff_inside(g, eta, depth);
  const int m = s.dim;
  std::vector<double> x(m);
  double sum = 0.0;
  for_each_node(g, depth, [&](std::size_t node) {
    const double r = detail::radius_of(g, node, x);
    if (r >= eta.outer_radius()) return;
    const double e0 = eta.value(r);
    const double e1 = r > 0.0 ? eta.first(r) / r : 0.0;
    double v = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const double k = (i == j ? e0 : 0.0) + x[i] * x[j] * e1;
        v += k * s(i, j)[node];
      }
    }
    sum += v;
  });
  return sum * g.cell_volume();
}

inline double stationary_pairing(const SphereField& phi, const Coupling& c, const RadialCutoff& eta) {
  return stationary_pairing(stress_tensor(phi, c), eta);
}

/// Both sides of the integrated stationarity identity obtained with Y = x eta(r):
///   delta1 (2-m) int eta |d phi|^2 + delta2 (4-m) int eta |tau|^2 = sum of rhs terms.
struct VanishingIdentity {
  double lhs_dirichlet = 0.0;  ///< delta1 (2-m) int eta |d phi|^2
  double lhs_bienergy = 0.0;   ///< delta2 (4-m) int eta |tau|^2
  double lhs = 0.0;
  /// delta1 int eta' r (|d phi|^2 - 2|d phi(d_r)|^2),
  /// delta2 (2m-10) int eta' x_i/r <d_i phi, tau>,
  /// delta2 int eta' r |tau|^2,
  /// -2 delta2 int eta'' x_i <d_i phi, tau>,
  /// -4 delta2 int eta' x_i x_j / r <bar-nabla_j d_i phi, tau>.
  double rhs_terms[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
  double rhs = 0.0;
  double eta_volume = 0.0;  ///< int eta
};

inline VanishingIdentity vanishing_identity(const SphereField& phi, const Coupling& c, const RadialCutoff& eta) {
  const Grid& g = phi.grid();
  const int m = g.dim();
  const Kinematics k = kinematics(phi);
  const CovariantHessian hess = bar_nabla_dphi(phi);
  const ScalarField tau2 = norm_squared(k.tau);
  std::vector<ScalarField> d_tau;
  for (int i = 0; i < m; ++i) d_tau.push_back(dot(k.d[i], k.tau));
  std::vector<ScalarField> h_tau;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) h_tau.push_back(dot(hess(i, j), k.tau));
  }
  const int depth = region_depth(h_tau[0]);
  detail::require_cutoff_inside(g, eta, depth);

  VanishingIdentity out;
  double lhs_e = 0.0, lhs_t = 0.0, vol = 0.0;
  double t[5] = {0.0, 0.0, 0.0, 0.0, 0.0};
  std::vector<double> x(m);
  for_each_node(g, depth, [&](std::size_t node) {
    const double r = detail::radius_of(g, node, x);
    if (r >= eta.outer_radius()) return;
    const double e0 = eta.value(r);
    const double e1 = eta.first(r);
    const double e2 = eta.second(r);
    vol += e0;
    lhs_e += e0 * k.e[node];
    lhs_t += e0 * tau2[node];
    if (r == 0.0) return;
    double radial2 = 0.0;  // |d phi(d_r)|^2
    for (int q = 0; q < k.d[0].components(); ++q) {
      double v = 0.0;
      for (int i = 0; i < m; ++i) v += x[i] / r * k.d[i].at(node)[q];
      radial2 += v * v;
    }
    double xdt = 0.0;
    for (int i = 0; i < m; ++i) xdt += x[i] * d_tau[i][node];
    double xhx = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) xhx += x[i] * x[j] * h_tau[i * m + j][node];
    }
    t[0] += e1 * r * (k.e[node] - 2.0 * radial2);
    t[1] += e1 * xdt / r;
    t[2] += e1 * r * tau2[node];
    t[3] += e2 * xdt;
    t[4] += e1 * xhx / r;
  });
  const double dv = g.cell_volume();
  out.eta_volume = vol * dv;
  out.lhs_dirichlet = c.delta1 * (2.0 - m) * lhs_e * dv;
  out.lhs_bienergy = c.delta2 * (4.0 - m) * lhs_t * dv;
  out.lhs = out.lhs_dirichlet + out.lhs_bienergy;
  out.rhs_terms[0] = c.delta1 * t[0] * dv;
  out.rhs_terms[1] = c.delta2 * (2.0 * m - 10.0) * t[1] * dv;
  out.rhs_terms[2] = c.delta2 * t[2] * dv;
  out.rhs_terms[3] = -2.0 * c.delta2 * t[3] * dv;
  out.rhs_terms[4] = -4.0 * c.delta2 * t[4] * dv;
  for (double v : out.rhs_terms) out.rhs += v;
  return out;
}

/// sum_i S_ii.
inline ScalarField stress_trace(const SymTensorField& s) {
  ScalarField out = s(0, 0);
  for (int i = 1; i < s.dim; ++i) out = out + s(i, i);
  return out;
}

}  // namespace sesqui
