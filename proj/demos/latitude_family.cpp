// Energies and Euler-Lagrange residuals along the latitude family for a
// few coupling ratios.
#include <cmath>
#include <cstdio>

#include "sesqui/sesqui.hpp"

int main() {
  using namespace sesqui;
  const Grid g = Grid::torus(1, 256, kTwoPi);
  for (double q : {-0.5, 0.0, 0.5}) {
    const Coupling c(q, 1.0);
    const double alpha = matched_latitude_angle(q);
    std::printf("q = %+.2f  matched alpha = %.6f\n", q, alpha);
    std::printf("  %10s %14s %14s %14s\n", "alpha", "bienergy", "interpolating", "sup residual");
    for (double da : {-0.2, -0.1, 0.0, 0.1, 0.2}) {
      const SphereField phi = latitude_circle(g, alpha + da);
      const EnergyBreakdown e = energies(phi, c);
      std::printf("  %10.6f %14.8f %14.8f %14.3e\n", alpha + da, e.bienergy, e.interpolating,
                  sup_norm(el_residual_tangential(phi, c)));
    }
  }
  return 0;
}
