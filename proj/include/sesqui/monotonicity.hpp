#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sesqui/ball.hpp"
#include "sesqui/energy.hpp"
#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

/// delta1 |d phi|^2 + delta2 |tau|^2 + 4 sqrt(m) |delta2| |bar-nabla d phi|^2,
/// evaluated node by node.
inline ScalarField theta_density(const SphereField& phi, const Coupling& c) {
  const Grid& g = phi.grid();
  const int m = g.dim();
  const int nc = phi.components();
  const double w = 4.0 * std::sqrt(static_cast<double>(m)) * std::abs(c.delta2);
  auto out = ScalarField::zeros(g, 1, stencil_depth(g, 0, 1));
  std::vector<double> tau(nc);
  for_each_jet(phi.ambient(), [&](std::size_t x, const LocalJet& jet) {
    auto p = phi.at(x);
    double e = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int k = 0; k < nc; ++k) e += jet.first(i)[k] * jet.first(i)[k];
    }
    double tau2 = 0.0;
    for (int k = 0; k < nc; ++k) {
      double lap = 0.0;
      for (int i = 0; i < m; ++i) lap += jet.second(i, i)[k];
      tau[k] = lap + e * p[k];
      tau2 += tau[k] * tau[k];
    }
    double hess = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        double dd = 0.0;
        for (int k = 0; k < nc; ++k) dd += jet.first(i)[k] * jet.first(j)[k];
        for (int k = 0; k < nc; ++k) {
          const double v = jet.second(i, j)[k] + dd * p[k];
          hess += v * v;
        }
      }
    }
    out[x] = c.delta1 * e + c.delta2 * tau2 + w * hess;
  });
  return out;
}

/// r^(4-m) times the ball integral of the density around the origin.
inline double theta(const ScalarField& density, double r) {
  return std::pow(r, 4.0 - density.grid().dim()) * integrate_ball(density, r);
}

inline double theta(const SphereField& phi, const Coupling& c, double r) {
  return theta(theta_density(phi, c), r);
}

/// max over nodes and axes of |<tau, d_i phi>| / (1 + |tau| |d_i phi|).
inline double tau_orthogonality(const SphereField& phi) {
  const Kinematics k = kinematics(phi);
  double worst = 0.0;
  const int nc = phi.components();
  for_each_node(phi.grid(), region_depth(k.tau), [&](std::size_t x) {
    auto t = k.tau.at(x);
    double t2 = 0.0;
    for (int q = 0; q < nc; ++q) t2 += t[q] * t[q];
    for (const auto& d : k.d) {
      auto v = d.at(x);
      double dot_td = 0.0, d2 = 0.0;
      for (int q = 0; q < nc; ++q) {
        dot_td += t[q] * v[q];
        d2 += v[q] * v[q];
      }
      worst = std::max(worst, std::abs(dot_td) / (1.0 + std::sqrt(t2 * d2)));
    }
  });
  return worst;
}

struct MonotonicityRow {
  double r = 0.0;
  double theta = 0.0;
  double tau_orth = 0.0;
  double tolerance = 0.0;  ///< staircase tolerance at this radius
};

enum class Verdict { Pass, Fail, PreconditionsUnmet, NotApplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::PreconditionsUnmet: return "PreconditionsUnmet";
    case Verdict::NotApplicable: return "NotApplicable";
  }
  return "Unknown";
}

struct MonotonicityReport {
  std::vector<MonotonicityRow> rows;
  Verdict verdict = Verdict::NotApplicable;
  double tau_orth = 0.0;
};

inline constexpr double kTauOrthogonalityThreshold = 1e-2;

/// Theta at the given radii (sorted ascending). The verdict is asserted only
/// for m > 4 and tau-orthogonality defect below threshold; otherwise the rows
/// are still reported. A decrease is tolerated up to
///   eps(r) = r^(4-m) * sup|density| * h * |S^(m-1)| r^(m-1),
/// the density mass of one staircase layer at radius r.
inline MonotonicityReport monotonicity_report(const SphereField& phi, const Coupling& c,
                                              std::vector<double> radii) {
  std::sort(radii.begin(), radii.end());
  const Grid& g = phi.grid();
  const int m = g.dim();
  const ScalarField density = theta_density(phi, c);
  MonotonicityReport out;
  out.tau_orth = tau_orthogonality(phi);
  const double scale = sup_norm(density);
  const double h = g.spacing(0);
  for (double r : radii) {
    const double eps = std::pow(r, 4.0 - m) * scale * h * unit_sphere_area(m) * std::pow(r, m - 1);
    out.rows.push_back({r, theta(density, r), out.tau_orth, eps});
  }
  if (m <= 4) {
    out.verdict = Verdict::NotApplicable;
  } else if (!(out.tau_orth <= kTauOrthogonalityThreshold)) {
    out.verdict = Verdict::PreconditionsUnmet;
  } else {
    out.verdict = Verdict::Pass;
    for (std::size_t q = 0; q + 1 < out.rows.size(); ++q) {
      if (out.rows[q].theta > out.rows[q + 1].theta + out.rows[q + 1].tolerance) out.verdict = Verdict::Fail;
    }
  }
  return out;
}

}  // namespace sesqui
