#pragma once

#include <cmath>
#include <string>

#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

/// Weights of the interpolating functional delta1 * int |d phi|^2 + delta2 * int |tau|^2.
struct Coupling {
  double delta1 = 0.0;
  double delta2 = 1.0;

  Coupling() = default;
  Coupling(double d1, double d2) : delta1(d1), delta2(d2) {
    require(std::isfinite(d1) && std::isfinite(d2), ErrorCode::InvalidCoupling,
            "coupling must be finite");
    require(d1 != 0.0 || d2 != 0.0, ErrorCode::InvalidCoupling, "coupling (0, 0) is degenerate");
  }

  double ratio() const {
    require(delta2 != 0.0, ErrorCode::Delta2Zero, "delta1/delta2 needs delta2 != 0");
    return delta1 / delta2;
  }

  /// delta2 < 0, or a purely harmonic functional with delta1 < 0: the
  /// discrete energy is not bounded below.
  bool noncoercive() const { return delta2 < 0.0 || (delta2 == 0.0 && delta1 < 0.0); }
};

struct EnergyBreakdown {
  double dirichlet = 0.0;       ///< int |d phi|^2
  double bienergy = 0.0;        ///< int |tau|^2
  double interpolating = 0.0;   ///< delta1 * dirichlet + delta2 * bienergy
  double extrinsic = 0.0;       ///< int |Delta phi|^2
  double volume = 0.0;          ///< measure of the integration region
  double quartic = 0.0;         ///< int |d phi|^4
};

inline EnergyBreakdown energies(const Kinematics& k, const Coupling& c) {
  EnergyBreakdown out;
  const Grid& g = k.e.grid();
  out.dirichlet = integrate(k.e);
  out.bienergy = integrate(norm_squared(k.tau));
  out.interpolating = c.delta1 * out.dirichlet + c.delta2 * out.bienergy;
  out.extrinsic = integrate(norm_squared(k.lap));
  auto e2 = k.e;
  for (double& v : e2.values()) v *= v;
  out.quartic = integrate(e2);
  out.volume = g.periodic() ? g.volume()
                            : static_cast<double>(g.inside_count(region_depth(k.tau))) * g.cell_volume();
  return out;
}

/// All integrals use the torus, or the patch interior.
inline EnergyBreakdown energies(const SphereField& phi, const Coupling& c) {
  return energies(kinematics(phi), c);
}

/// delta2 E_ext + delta1^2 / (4 delta2) vol - E_{delta1,delta2}. Non-negative
/// for sphere-valued fields; the inequality also holds node by node for the
/// discrete densities.
inline double extrinsic_bound_gap(const EnergyBreakdown& e, const Coupling& c) {
  require(c.delta2 > 0.0, ErrorCode::NonpositiveDelta2, "extrinsic bound needs delta2 > 0");
  return c.delta2 * e.extrinsic + c.delta1 * c.delta1 / (4.0 * c.delta2) * e.volume - e.interpolating;
}

inline double extrinsic_bound_gap(const SphereField& phi, const Coupling& c) {
  require(c.delta2 > 0.0, ErrorCode::NonpositiveDelta2, "extrinsic bound needs delta2 > 0");
  return extrinsic_bound_gap(energies(phi, c), c);
}

/// Sphere Euler-Lagrange operator
///   delta2 (D^2 phi + (|D phi|^2 + D|d phi|^2 + 2<d phi, grad D phi> + 2|d phi|^4) phi
///           + 2 sum_i d_i(|d phi|^2 d_i phi))
///   - delta1 (D phi + |d phi|^2 phi)
/// with D the discrete Laplacian.
inline AmbientField el_residual(const SphereField& phi, const Coupling& c) {
  const Kinematics k = kinematics(phi);
  const Grid& g = phi.grid();
  const AmbientField bilap = laplacian(k.lap);
  ScalarField coeff = norm_squared(k.lap) + laplacian(k.e);
  AmbientField flux_div = partial(scale(k.e, k.d[0]), 0);
  ScalarField cross = dot(k.d[0], partial(k.lap, 0));
  for (int i = 1; i < g.dim(); ++i) {
    flux_div = flux_div + partial(scale(k.e, k.d[i]), i);
    cross = cross + dot(k.d[i], partial(k.lap, i));
  }
  auto e2 = k.e;
  for (double& v : e2.values()) v *= v;
  coeff = coeff + combine(2.0, cross, 2.0, e2);
  AmbientField fourth = bilap + scale(coeff, phi.ambient()) + 2.0 * flux_div;
  return combine(c.delta2, fourth, -c.delta1, k.tau);
}

inline AmbientField el_residual_tangential(const SphereField& phi, const Coupling& c) {
  return tangent_project(phi, el_residual(phi, c));
}

// ---------------------------------------------------------------------------
// Discretize-then-optimize: the energy the flow actually descends.

/// E_h = sum_x dV (delta1 |d phi|^2 + delta2 |tau|^2) on a torus, evaluated
/// on raw node values (no normalization).
inline double discrete_energy(const AmbientField& phi, const Coupling& c) {
  require(phi.grid().periodic(), ErrorCode::InvalidDomain, "discrete energy is defined on tori");
  const Kinematics k = kinematics(phi);
  double sum = 0.0;
  const int nc = phi.components();
  for (std::size_t x = 0; x < phi.node_count(); ++x) {
    auto t = k.tau.at(x);
    double t2 = 0.0;
    for (int q = 0; q < nc; ++q) t2 += t[q] * t[q];
    sum += c.delta1 * k.e[x] + c.delta2 * t2;
  }
  return sum * phi.grid().cell_volume();
}

inline double discrete_energy(const SphereField& phi, const Coupling& c) {
  return discrete_energy(phi.ambient(), c);
}

/// Gradient of E_h with respect to node values, divided by the node volume,
/// so that sum_x dV <G, W> is the directional derivative along W:
///   G = -2 sum_i d_i(w d_i phi) + 2 delta2 (D tau + |d phi|^2 tau),
///   w = delta1 + 2 delta2 <tau, phi>.
inline AmbientField discrete_energy_gradient(const AmbientField& phi, const Coupling& c) {
  const Grid& g = phi.grid();
  require(g.periodic(), ErrorCode::InvalidDomain, "discrete energy gradient is defined on tori");
  const Kinematics k = kinematics(phi);
  ScalarField w = dot(k.tau, phi);
  for (double& v : w.values()) v = c.delta1 + 2.0 * c.delta2 * v;
  AmbientField flux = partial(scale(w, k.d[0]), 0);
  for (int i = 1; i < g.dim(); ++i) flux = flux + partial(scale(w, k.d[i]), i);
  AmbientField out = combine(-2.0, flux, 2.0 * c.delta2, laplacian(k.tau));
  return out + (2.0 * c.delta2) * scale(k.e, k.tau);
}

inline AmbientField discrete_energy_gradient(const SphereField& phi, const Coupling& c) {
  return discrete_energy_gradient(phi.ambient(), c);
}

/// Half the tangential discrete gradient: on smooth fields it approximates
/// the tangential Euler-Lagrange residual, and it vanishes exactly at
/// discrete critical points.
inline AmbientField discrete_residual(const SphereField& phi, const Coupling& c) {
  return 0.5 * tangent_project(phi, discrete_energy_gradient(phi, c));
}

/// bar-Delta tau - (-m K + delta1/delta2) tau for isometric immersions into a
/// sphere of curvature K; bar-Delta uses the projection connection
/// bar-nabla_i W = d_i W + <W, d_i phi> phi.
inline AmbientField immersion_residual(const SphereField& phi, const Coupling& c, double curvature,
                                       int dim) {
  require(c.delta2 != 0.0, ErrorCode::Delta2Zero, "immersion equation needs delta2 != 0");
  const Kinematics k = kinematics(phi);
  const Grid& g = phi.grid();
  AmbientField rough = AmbientField::zeros(g, phi.components(), 0);
  for (int i = 0; i < g.dim(); ++i) {
    const AmbientField v = bar_nabla_tension(k, phi, i);
    AmbientField term = partial(v, i) + scale(dot(v, k.d[i]), phi.ambient());
    rough = i == 0 ? std::move(term) : rough + term;
  }
  const double eigenvalue = -dim * curvature + c.delta1 / c.delta2;
  return combine(1.0, rough, -eigenvalue, k.tau);
}

}  // namespace sesqui
