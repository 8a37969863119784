#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "sesqui/energy.hpp"
#include "sesqui/error.hpp"
#include "sesqui/families.hpp"
#include "sesqui/field.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

enum class StepRule {
  /// Steepest descent; trial step = last accepted step / backtrack_factor.
  Backtracking,
  /// Steepest descent; trial step = Barzilai-Borwein quotient <s, s> / <s, y>.
  BarzilaiBorwein,
  /// Limited-memory BFGS direction built from the last `memory` moves,
  /// projected to the tangent space; unit trial step.
  LBFGS,
};

struct SolveOptions {
  int max_iters = 100000;
  double residual_tol = 1e-8;
  /// <= 0 selects 1e-2 h^4 / |delta2| (or 1e-1 h^2 / |delta1| when delta2 = 0).
  double initial_step = 0.0;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  int record_every = 1;
  StepRule step_rule = StepRule::LBFGS;
  int memory = 8;
  /// Required to run with delta2 = 0.
  bool allow_harmonic = false;

  void validate() const {
    require(max_iters >= 0, ErrorCode::InvalidArgument, "max_iters must be non-negative");
    require(residual_tol > 0.0, ErrorCode::InvalidArgument, "residual_tol must be positive");
    require(armijo_c > 0.0 && armijo_c < 1.0, ErrorCode::InvalidArgument, "armijo_c must lie in (0, 1)");
    require(backtrack_factor > 0.0 && backtrack_factor < 1.0, ErrorCode::InvalidArgument,
            "backtrack_factor must lie in (0, 1)");
    require(record_every >= 1, ErrorCode::InvalidArgument, "record_every must be at least 1");
    require(memory >= 1, ErrorCode::InvalidArgument, "memory must be at least 1");
  }
};

enum class Termination { ResidualMet, MaxIters, StepUnderflow };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::ResidualMet: return "ResidualMet";
    case Termination::MaxIters: return "MaxIters";
    case Termination::StepUnderflow: return "StepUnderflow";
  }
  return "Unknown";
}

struct HistoryRow {
  int iteration = 0;
  double energy = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct SolveReport {
  explicit SolveReport(SphereField start) : final_field(std::move(start)) {}

  SphereField final_field;
  int iterations = 0;
  std::vector<double> energy_history;
  std::vector<double> residual_history;
  std::vector<HistoryRow> rows;  ///< every record_every-th iterate, plus the last
  bool converged = false;
  Termination termination = Termination::MaxIters;
  bool noncoercive = false;
  /// sup |el_residual_tangential| at the final field; differs from the
  /// discrete residual by the O(h^2) discretization error.
  double el_residual_sup = 0.0;
  double initial_step = 0.0;
};

/// Slack allowed on an accepted step's energy change.
inline double energy_slack(double energy) { return 1e-12 * std::max(1.0, std::abs(energy)); }

inline double default_initial_step(const Grid& grid, const Coupling& c) {
  const double h = grid.min_spacing();
  if (c.delta2 != 0.0) return 1e-2 * std::pow(h, 4) / std::abs(c.delta2);
  return 1e-1 * h * h / std::abs(c.delta1);
}

namespace detail {

inline void require_flow_coupling(const Coupling& c, bool allow_harmonic) {
  require(c.delta2 != 0.0 || (allow_harmonic && c.delta1 != 0.0), ErrorCode::Delta2Zero,
          "flow needs delta2 != 0 unless harmonic mode is flagged");
}

}  // namespace detail

/// phi' = project_sphere(phi - t * tangent_project(phi, G)); returns phi' and E_h(phi').
inline std::pair<SphereField, double> step(const SphereField& phi, const Coupling& c, double t,
                                           bool allow_harmonic = false) {
  detail::require_flow_coupling(c, allow_harmonic);
  const AmbientField g = tangent_project(phi, discrete_energy_gradient(phi, c));
  SphereField next = project_sphere(combine(1.0, phi.ambient(), -t, g));
  const double e = discrete_energy(next, c);
  return {std::move(next), e};
}

namespace detail {

/// Two-loop recursion: approximates -H^{-1} g from stored (s, y) pairs.
inline AmbientField lbfgs_direction(const AmbientField& g, const std::vector<AmbientField>& s_hist,
                                    const std::vector<AmbientField>& y_hist) {
  const std::size_t k = s_hist.size();
  std::vector<double> alpha(k), rho(k);
  AmbientField q = g;
  for (std::size_t i = k; i-- > 0;) {
    rho[i] = 1.0 / grid_inner(y_hist[i], s_hist[i]);
    alpha[i] = rho[i] * grid_inner(s_hist[i], q);
    q = combine(1.0, q, -alpha[i], y_hist[i]);
  }
  const double gamma = grid_inner(s_hist[k - 1], y_hist[k - 1]) / grid_inner(y_hist[k - 1], y_hist[k - 1]);
  q = gamma * q;
  for (std::size_t i = 0; i < k; ++i) {
    const double beta = rho[i] * grid_inner(y_hist[i], q);
    q = combine(1.0, q, alpha[i] - beta, s_hist[i]);
  }
  return -1.0 * q;
}

}  // namespace detail

/// Projected descent on the discrete energy: retraction by renormalization,
/// Armijo backtracking (accept when E(phi') <= E(phi) + armijo_c t <g, d>,
/// which is E - armijo_c t |g|^2 for d = -g). Accepted steps never raise the
/// energy beyond energy_slack.
inline SolveReport solve(const SphereField& start, const Coupling& c, const SolveOptions& opts) {
  opts.validate();
  detail::require_flow_coupling(c, opts.allow_harmonic);
  require(start.grid().periodic(), ErrorCode::InvalidDomain, "the flow runs on tori");

  const double t0 = opts.initial_step > 0.0 ? opts.initial_step : default_initial_step(start.grid(), c);
  const double t_min = 1e-14 * t0;
  const double t_max = 1e12 * t0;
  const bool quasi_newton = opts.step_rule == StepRule::LBFGS;

  SolveReport report(start);
  report.noncoercive = c.noncoercive();
  report.initial_step = t0;

  SphereField phi = start;
  double energy = discrete_energy(phi, c);
  AmbientField grad = tangent_project(phi, discrete_energy_gradient(phi, c));
  double residual = 0.5 * sup_norm(grad);
  double t = t0;
  std::vector<AmbientField> s_hist, y_hist;

  auto record = [&](int iter, double step_taken, bool force) {
    report.energy_history.push_back(energy);
    report.residual_history.push_back(residual);
    if (force || iter % opts.record_every == 0) report.rows.push_back({iter, energy, residual, step_taken});
  };
  record(0, 0.0, true);

  int iter = 0;
  Termination why = Termination::MaxIters;
  while (true) {
    if (residual <= opts.residual_tol) {
      why = Termination::ResidualMet;
      break;
    }
    if (iter >= opts.max_iters) {
      why = Termination::MaxIters;
      break;
    }
    AmbientField dir = -1.0 * grad;
    if (quasi_newton && !s_hist.empty()) {
      AmbientField cand = tangent_project(phi, detail::lbfgs_direction(grad, s_hist, y_hist));
      if (grid_inner(cand, grad) < 0.0) {
        dir = std::move(cand);
        t = 1.0;
      } else {
        s_hist.clear();
        y_hist.clear();
      }
    }
    const double slope = grid_inner(grad, dir);
    std::optional<SphereField> trial;
    double trial_energy = 0.0;
    bool underflow = false;
    while (true) {
      if (t < t_min) {
        underflow = true;
        break;
      }
      try {
        SphereField cand = project_sphere(combine(1.0, phi.ambient(), t, dir));
        const double e = discrete_energy(cand, c);
        if (e <= energy + opts.armijo_c * t * slope + energy_slack(energy)) {
          trial.emplace(std::move(cand));
          trial_energy = e;
          break;
        }
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NearZeroVector) throw;
      }
      t *= opts.backtrack_factor;
    }
    if (underflow) {
      // A quasi-Newton direction may be poor; retry once along -g before giving up.
      if (quasi_newton && !s_hist.empty()) {
        s_hist.clear();
        y_hist.clear();
        t = t0;
        continue;
      }
      why = Termination::StepUnderflow;
      break;
    }

    AmbientField next_grad = tangent_project(*trial, discrete_energy_gradient(*trial, c));
    const double accepted = t;
    const AmbientField s = trial->ambient() - phi.ambient();
    const AmbientField y = next_grad - grad;
    const double sy = grid_inner(s, y);
    if (quasi_newton) {
      if (sy > 1e-12 * std::sqrt(grid_inner(s, s) * grid_inner(y, y))) {
        s_hist.push_back(s);
        y_hist.push_back(y);
        if (static_cast<int>(s_hist.size()) > opts.memory) {
          s_hist.erase(s_hist.begin());
          y_hist.erase(y_hist.begin());
        }
      }
      t = std::clamp(sy > 0.0 ? grid_inner(s, s) / sy : accepted / opts.backtrack_factor, t_min, t_max);
    } else if (opts.step_rule == StepRule::BarzilaiBorwein) {
      t = std::clamp(sy > 0.0 ? grid_inner(s, s) / sy : accepted / opts.backtrack_factor, t_min, t_max);
    } else {
      t = std::clamp(accepted / opts.backtrack_factor, t_min, t_max);
    }

    phi = std::move(*trial);
    energy = trial_energy;
    grad = std::move(next_grad);
    residual = 0.5 * sup_norm(grad);
    ++iter;
    record(iter, accepted, false);
  }

  if (report.rows.back().iteration != iter) report.rows.push_back({iter, energy, residual, 0.0});
  report.iterations = iter;
  report.termination = why;
  report.converged = residual <= opts.residual_tol;
  report.el_residual_sup = sup_norm(el_residual_tangential(phi, c));
  report.final_field = std::move(phi);
  return report;
}

/// Derivative of E_h along the latitude family at angle alpha:
/// sum_x dV <G(phi_alpha), d phi_alpha / d alpha>.
inline double latitude_energy_slope(const Grid& grid, const Coupling& c, double alpha, int n = 2) {
  const SphereField phi = latitude_circle(grid, alpha, n);
  const AmbientField g = discrete_energy_gradient(phi, c);
  const double s = std::sin(alpha);
  const double co = std::cos(alpha);
  double sum = 0.0;
  for (std::size_t x = 0; x < grid.node_count(); ++x) {
    const double t = grid.coord(x, 0);
    auto gx = g.at(x);
    sum += gx[0] * co * std::cos(t) + gx[1] * co * std::sin(t) - gx[n] * s;
  }
  return sum * grid.cell_volume();
}

/// Discrete critical point of the interpolating energy inside the latitude
/// family. A uniformly sampled latitude circle is equivariant under the grid
/// shift, so its discrete gradient points along d/d alpha everywhere and the
/// critical points of the full field problem in this family are roots of a
/// scalar function. [lo, hi] must bracket a sign change.
inline double latitude_critical_angle(const Grid& grid, const Coupling& c, double lo, double hi,
                                      int n = 2) {
  double flo = latitude_energy_slope(grid, c, lo, n);
  double fhi = latitude_energy_slope(grid, c, hi, n);
  require(flo == 0.0 || fhi == 0.0 || (flo < 0.0) != (fhi < 0.0), ErrorCode::InvalidArgument,
          "latitude bracket does not contain a critical angle");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  // Illinois-modified regula falsi.
  int side = 0;
  for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15; ++it) {
    const double mid = (lo * fhi - hi * flo) / (fhi - flo);
    const double fm = latitude_energy_slope(grid, c, mid, n);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = mid;
      fhi = fm;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
  }
  return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

}  // namespace sesqui
