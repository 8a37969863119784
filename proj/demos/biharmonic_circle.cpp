// Discrete biharmonic circle: locate the critical latitude, certify it with
// the flow solver, then report its Noether currents and stress.
#include <cmath>
#include <cstdio>
#include <numbers>

#include "sesqui/sesqui.hpp"

int main() {
  using namespace sesqui;
  const Grid g = Grid::torus(1, 256, kTwoPi);
  const Coupling c(0.0, 1.0);
  const double pi4 = std::numbers::pi / 4.0;
  const double alpha = latitude_critical_angle(g, c, pi4 - 0.01, pi4 + 0.01);
  std::printf("critical alpha = %.15f (pi/4 %+.3e)\n", alpha, alpha - pi4);

  SolveOptions opts;
  opts.residual_tol = 1e-8;
  const SolveReport rep = solve(latitude_circle(g, alpha), c, opts);
  std::printf("solver: %s after %d iterations, discrete residual %.3e, EL residual %.3e\n",
              to_string(rep.termination), rep.iterations, rep.residual_history.back(), rep.el_residual_sup);

  for (const auto& row : conservation_report(rep.final_field, c)) {
    std::printf("generator E_%d%d: sup|div J| = %.3e\n", row.a, row.b, row.sup_div);
  }
  const CurrentField jz = current(rep.final_field, c, KillingGenerator::z_rotation(3));
  std::printf("z-rotation current at x = 0: %.9f\n", jz.J[0][0]);

  const SymTensorField s = stress_tensor(rep.final_field, c);
  std::printf("S_11 at x = 0: %.9f, sup|div S| = %.3e\n", s(0, 0)[0], stress_divergence_sup(stress_divergence(s)));

  // Along the latitude family the circle is a maximum of the bienergy, so a
  // perturbed start rolls off towards the great circle.
  SolveOptions flow = opts;
  flow.max_iters = 50000;
  flow.residual_tol = 1e-7;
  const SolveReport off = solve(latitude_circle(g, alpha + 0.1), c, flow);
  std::printf("flow from alpha + 0.1: %s, bienergy %.3e\n", to_string(off.termination),
              energies(off.final_field, c).bienergy);
  return 0;
}
