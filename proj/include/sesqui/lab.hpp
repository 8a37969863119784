#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "sesqui/ball.hpp"
#include "sesqui/energy.hpp"
#include "sesqui/error.hpp"
#include "sesqui/families.hpp"
#include "sesqui/io.hpp"
#include "sesqui/monotonicity.hpp"
#include "sesqui/morrey.hpp"
#include "sesqui/noether.hpp"
#include "sesqui/solver.hpp"
#include "sesqui/stress.hpp"
#include "sesqui/version.hpp"

namespace sesqui {

enum class Mode { Solve, Residual, Conserve, Stress, Monotone, Morrey, Sweep };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::Solve: return "solve";
    case Mode::Residual: return "residual";
    case Mode::Conserve: return "conserve";
    case Mode::Stress: return "stress";
    case Mode::Monotone: return "monotone";
    case Mode::Morrey: return "morrey";
    case Mode::Sweep: return "sweep";
  }
  return "unknown";
}

inline Mode parse_mode(const std::string& s) {
  for (Mode m : {Mode::Solve, Mode::Residual, Mode::Conserve, Mode::Stress, Mode::Monotone, Mode::Morrey,
                 Mode::Sweep}) {
    if (s == to_string(m)) return m;
  }
  throw Error(ErrorCode::ConfigError, "mode: unknown mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// Config access. Every error names the offending key path.

namespace cfg {

inline const Json* find(const Json& j, const std::string& key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline const Json& section(const Json& j, const std::string& key) {
  static const Json empty = Json::object();
  const Json* v = find(j, key);
  if (!v) return empty;
  require(v->is_object(), ErrorCode::ConfigError, key + ": expected an object");
  return *v;
}

inline double number(const Json& j, const std::string& key, const std::string& path) {
  const Json* v = find(j, key);
  require(v != nullptr, ErrorCode::ConfigError, path + ": missing required key \"" + key + "\"");
  require(v->is_number(), ErrorCode::ConfigError, path + ": expected a number");
  const double d = v->get<double>();
  require(std::isfinite(d), ErrorCode::ConfigError, path + ": must be finite");
  return d;
}

inline double number_or(const Json& j, const std::string& key, const std::string& path, double fallback) {
  return find(j, key) ? number(j, key, path) : fallback;
}

inline long long integer_or(const Json& j, const std::string& key, const std::string& path, long long fallback) {
  const Json* v = find(j, key);
  if (!v) return fallback;
  require(v->is_number_integer(), ErrorCode::ConfigError, path + ": expected an integer");
  return v->get<long long>();
}

inline bool flag_or(const Json& j, const std::string& key, const std::string& path, bool fallback) {
  const Json* v = find(j, key);
  if (!v) return fallback;
  require(v->is_boolean(), ErrorCode::ConfigError, path + ": expected true or false");
  return v->get<bool>();
}

inline std::string text_or(const Json& j, const std::string& key, const std::string& path,
                           const std::string& fallback) {
  const Json* v = find(j, key);
  if (!v) return fallback;
  require(v->is_string(), ErrorCode::ConfigError, path + ": expected a string");
  return v->get<std::string>();
}

inline std::vector<double> numbers_or(const Json& j, const std::string& key, const std::string& path,
                                      std::vector<double> fallback) {
  const Json* v = find(j, key);
  if (!v) return fallback;
  require(v->is_array(), ErrorCode::ConfigError, path + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : *v) {
    require(e.is_number(), ErrorCode::ConfigError, path + ": expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace cfg

// ---------------------------------------------------------------------------
// Typed configuration

struct DomainSpec {
  DomainKind kind = DomainKind::Torus;
  int dim = 1;
  std::size_t nodes = 64;
  double length = kTwoPi;
  double half_width = 1.0;
  int margin = Grid::kMinPatchMargin;

  Grid grid(std::size_t n) const {
    return kind == DomainKind::Torus ? Grid::torus(dim, n, length) : Grid::patch(dim, n, half_width, margin);
  }
  Grid grid() const { return grid(nodes); }
};

struct InitialSpec {
  std::string family = "latitude";
  std::optional<double> alpha;
  bool matched = false;
  std::vector<double> bracket;  ///< critical_latitude search interval
  std::vector<double> point;    ///< constant family value
  double noise = 0.0;
  std::string file;
};

struct ExperimentConfig {
  Mode mode = Mode::Solve;
  DomainSpec domain;
  int target_dim = 2;
  std::optional<Coupling> coupling;
  InitialSpec initial;
  SolveOptions solver;
  std::uint64_t seed = 0;
  std::string out = "out";
  Json sections;  ///< per-mode sections, read by the mode runners
};

inline DomainSpec parse_domain(const Json& j) {
  DomainSpec d;
  const std::string kind = cfg::text_or(j, "kind", "domain.kind", "torus");
  require(kind == "torus" || kind == "patch", ErrorCode::ConfigError, "domain.kind: expected torus or patch");
  d.kind = kind == "torus" ? DomainKind::Torus : DomainKind::Patch;
  d.dim = static_cast<int>(cfg::integer_or(j, "dim", "domain.dim", 1));
  require(d.dim >= 1 && d.dim <= 8, ErrorCode::ConfigError, "domain.dim: must lie in 1..8");
  const long long n = cfg::integer_or(j, "nodes", "domain.nodes", 64);
  require(n >= 1, ErrorCode::ConfigError, "domain.nodes: must be positive");
  d.nodes = static_cast<std::size_t>(n);
  d.length = cfg::number_or(j, "length", "domain.length", kTwoPi);
  if (d.kind == DomainKind::Patch) d.half_width = cfg::number(j, "half_width", "domain.half_width");
  d.margin = static_cast<int>(cfg::integer_or(j, "margin", "domain.margin", Grid::kMinPatchMargin));
  return d;
}

inline SolveOptions parse_solver(const Json& j) {
  SolveOptions o;
  o.max_iters = static_cast<int>(cfg::integer_or(j, "max_iters", "solver.max_iters", o.max_iters));
  o.residual_tol = cfg::number_or(j, "residual_tol", "solver.residual_tol", o.residual_tol);
  o.initial_step = cfg::number_or(j, "initial_step", "solver.initial_step", o.initial_step);
  o.armijo_c = cfg::number_or(j, "armijo_c", "solver.armijo_c", o.armijo_c);
  o.backtrack_factor = cfg::number_or(j, "backtrack_factor", "solver.backtrack_factor", o.backtrack_factor);
  o.record_every = static_cast<int>(cfg::integer_or(j, "record_every", "solver.record_every", o.record_every));
  o.allow_harmonic = cfg::flag_or(j, "allow_harmonic", "solver.allow_harmonic", o.allow_harmonic);
  o.memory = static_cast<int>(cfg::integer_or(j, "memory", "solver.memory", o.memory));
  const std::string rule = cfg::text_or(j, "step_rule", "solver.step_rule", "lbfgs");
  if (rule == "lbfgs") {
    o.step_rule = StepRule::LBFGS;
  } else if (rule == "bb") {
    o.step_rule = StepRule::BarzilaiBorwein;
  } else {
    require(rule == "backtracking", ErrorCode::ConfigError, "solver.step_rule: expected lbfgs, bb or backtracking");
    o.step_rule = StepRule::Backtracking;
  }
  try {
    o.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("solver: ") + e.what());
  }
  return o;
}

inline InitialSpec parse_initial(const Json& j) {
  InitialSpec s;
  s.family = cfg::text_or(j, "family", "initial.family", s.family);
  static const std::vector<std::string> families = {"latitude", "great_circle", "constant", "random",
                                                    "unit_speed_latitude", "critical_latitude", "file"};
  require(std::find(families.begin(), families.end(), s.family) != families.end(), ErrorCode::ConfigError,
          "initial.family: unknown family '" + s.family + "'");
  if (cfg::find(j, "alpha")) s.alpha = cfg::number(j, "alpha", "initial.alpha");
  s.matched = cfg::flag_or(j, "matched", "initial.matched", false);
  s.bracket = cfg::numbers_or(j, "bracket", "initial.bracket", {});
  require(s.bracket.empty() || s.bracket.size() == 2, ErrorCode::ConfigError, "initial.bracket: expected [lo, hi]");
  s.point = cfg::numbers_or(j, "point", "initial.point", {});
  s.noise = cfg::number_or(j, "noise", "initial.noise", 0.0);
  require(s.noise >= 0.0, ErrorCode::ConfigError, "initial.noise: must be non-negative");
  s.file = cfg::text_or(j, "file", "initial.file", "");
  require(s.family != "file" || !s.file.empty(), ErrorCode::ConfigError, "initial.file: required for family file");
  return s;
}

inline Coupling parse_coupling(const Json& j, const std::string& path) {
  const double d1 = cfg::number(j, "delta1", path + ".delta1");
  const double d2 = cfg::number(j, "delta2", path + ".delta2");
  try {
    return Coupling(d1, d2);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, path + ": " + e.what());
  }
}

inline ExperimentConfig parse_config(const Json& j) {
  require(j.is_object(), ErrorCode::ConfigError, "config: expected a JSON object");
  ExperimentConfig c;
  c.mode = parse_mode(cfg::text_or(j, "mode", "mode", "solve"));
  c.domain = parse_domain(cfg::section(j, "domain"));
  c.target_dim = static_cast<int>(cfg::integer_or(j, "target_dim", "target_dim", 2));
  require(c.target_dim >= 1, ErrorCode::ConfigError, "target_dim: must be at least 1");
  if (c.mode != Mode::Sweep || cfg::find(j, "coupling")) {
    require(cfg::find(j, "coupling") != nullptr, ErrorCode::ConfigError,
            "coupling: missing required section with keys \"delta1\" and \"delta2\"");
    c.coupling = parse_coupling(cfg::section(j, "coupling"), "coupling");
  }
  c.initial = parse_initial(cfg::section(j, "initial"));
  c.solver = parse_solver(cfg::section(j, "solver"));
  const Json* seed = cfg::find(j, "seed");
  if (seed) {
    require(seed->is_number_unsigned() || (seed->is_number_integer() && seed->get<long long>() >= 0),
            ErrorCode::ConfigError, "seed: expected a non-negative integer");
    c.seed = seed->get<std::uint64_t>();
  }
  c.out = cfg::text_or(j, "out", "out", c.out);
  c.sections = j;
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open config " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "config: " + std::string(e.what()));
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// Field construction

namespace detail {

inline double latitude_alpha(const InitialSpec& s, const Coupling& c) {
  if (s.matched && c.delta2 != 0.0 && std::abs(c.ratio()) < 1.0) return matched_latitude_angle(c.ratio());
  require(s.alpha.has_value(), ErrorCode::ConfigError,
          "initial.alpha: required unless initial.matched applies (|delta1/delta2| < 1)");
  return *s.alpha;
}

}  // namespace detail

/// Initial field on `grid` for the given coupling, with optional tangent noise.
inline SphereField build_initial(const InitialSpec& s, const Grid& grid, int n, const Coupling& c,
                                 std::uint64_t seed) {
  std::optional<SphereField> phi;
  if (s.family == "latitude") {
    phi = latitude_circle(grid, detail::latitude_alpha(s, c), n);
  } else if (s.family == "great_circle") {
    phi = great_circle(grid, n);
  } else if (s.family == "unit_speed_latitude") {
    phi = unit_speed_latitude_circle(grid, detail::latitude_alpha(s, c), n);
  } else if (s.family == "critical_latitude") {
    const double guess = detail::latitude_alpha(s, c);
    const double lo = s.bracket.empty() ? guess - 0.05 : s.bracket[0];
    const double hi = s.bracket.empty() ? guess + 0.05 : s.bracket[1];
    phi = latitude_circle(grid, latitude_critical_angle(grid, c, lo, hi, n), n);
  } else if (s.family == "constant") {
    if (s.point.empty()) {
      phi = north_pole_map(grid, n);
    } else {
      require(static_cast<int>(s.point.size()) == n + 1, ErrorCode::ConfigError,
              "initial.point: expected target_dim + 1 entries");
      phi = constant_map(grid, s.point);
    }
  } else if (s.family == "random") {
    phi = random_sphere_field(grid, n, seed);
  } else {
    AmbientField f = read_field(s.file);
    require(f.grid() == grid, ErrorCode::ConfigError, "initial.file: grid does not match the domain section");
    require(f.components() == n + 1, ErrorCode::ConfigError, "initial.file: component count != target_dim + 1");
    phi = SphereField(std::move(f));
  }
  if (s.noise > 0.0) phi = perturb(*phi, s.noise, seed);
  return std::move(*phi);
}

// ---------------------------------------------------------------------------
// Mode runners. Each returns the mode-specific part of summary.json and
// writes its tables into `out`.

struct RunContext {
  const ExperimentConfig& config;
  std::filesystem::path out;
};

namespace detail {

struct Stats {
  double min = 0.0, max = 0.0, mean = 0.0;
};

inline Stats stats(const ScalarField& f) {
  Stats s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0};
  std::size_t count = 0;
  for_each_node(f.grid(), region_depth(f), [&](std::size_t x) {
    s.min = std::min(s.min, f[x]);
    s.max = std::max(s.max, f[x]);
    s.mean += f[x];
    ++count;
  });
  s.mean = count ? s.mean / static_cast<double>(count) : 0.0;
  return s;
}

inline Json to_json(const Stats& s) { return Json{{"min", s.min}, {"max", s.max}, {"mean", s.mean}}; }

/// Least-squares slope of log2(y) against log2(x).
inline double log2_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::log2(x[k]);
    const double b = std::log2(y[k]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline int thread_cap() {
  const char* env = std::getenv("SESQUI_THREADS");
  if (!env) return 1;
  const int v = std::atoi(env);
  return v >= 1 ? v : 1;
}

}  // namespace detail

inline Json run_solve(const RunContext& ctx) {
  const auto& c = ctx.config;
  const Grid g = c.domain.grid();
  const SphereField start = build_initial(c.initial, g, c.target_dim, *c.coupling, c.seed);
  const SolveReport rep = solve(start, *c.coupling, c.solver);
  history_table(rep).write(ctx.out / "energy_history.csv");
  write_field((ctx.out / "final_field.bin").string(), rep.final_field);
  Json j = to_json(rep);
  j.erase("energy_history");
  j.erase("residual_history");
  j["energies"] = to_json(energies(rep.final_field, *c.coupling));
  j["sup_tension"] = sup_norm(tension(rep.final_field));
  return j;
}

inline Json run_residual(const RunContext& ctx) {
  const auto& c = ctx.config;
  const Json& sec = cfg::section(c.sections, "residual");
  std::vector<double> nodes = cfg::numbers_or(sec, "nodes", "residual.nodes", {static_cast<double>(c.domain.nodes)});
  CsvTable table({"nodes", "h", "sup_residual", "sup_discrete_residual"});
  std::vector<double> ns, res;
  for (double nd : nodes) {
    require(nd >= 1 && nd == std::floor(nd), ErrorCode::ConfigError, "residual.nodes: expected positive integers");
    const Grid g = c.domain.grid(static_cast<std::size_t>(nd));
    const SphereField phi = build_initial(c.initial, g, c.target_dim, *c.coupling, c.seed);
    const double r = sup_norm(el_residual_tangential(phi, *c.coupling));
    const double rd = g.periodic() ? sup_norm(discrete_residual(phi, *c.coupling)) : 0.0;
    table.row().add(static_cast<std::size_t>(nd)).add(g.spacing(0)).add(r).add(rd);
    ns.push_back(nd);
    res.push_back(r);
  }
  table.write(ctx.out / "residual.csv");
  Json j;
  j["nodes"] = ns;
  j["sup_residual"] = res;
  std::vector<double> orders;
  for (std::size_t k = 0; k + 1 < ns.size(); ++k) {
    orders.push_back(-std::log2(res[k + 1] / res[k]) / std::log2(ns[k + 1] / ns[k]));
  }
  j["pairwise_order"] = orders;
  j["refinement_slope"] = ns.size() >= 2 ? -detail::log2_slope(ns, res) : 0.0;
  return j;
}

inline Json run_conserve(const RunContext& ctx) {
  const auto& c = ctx.config;
  const Json& sec = cfg::section(c.sections, "conserve");
  const Grid g = c.domain.grid();
  SphereField phi = build_initial(c.initial, g, c.target_dim, *c.coupling, c.seed);
  Json j;
  if (cfg::flag_or(sec, "solve_first", "conserve.solve_first", false)) {
    SolveReport rep = solve(phi, *c.coupling, c.solver);
    Json s = to_json(rep);
    s.erase("energy_history");
    s.erase("residual_history");
    j["solve"] = s;
    phi = std::move(rep.final_field);
  }
  const int max_mode = static_cast<int>(cfg::integer_or(sec, "max_mode", "conserve.max_mode", 3));
  const auto rows = conservation_report(phi, *c.coupling, max_mode);
  conservation_table(rows).write(ctx.out / "conservation.csv");
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.sup_div);
  j["max_sup_div"] = worst;
  const CurrentField jz = current(phi, *c.coupling, KillingGenerator::z_rotation(phi.components()));
  j["z_current_axis0"] = detail::to_json(detail::stats(jz.J[0]));
  if (g.periodic()) j["sup_discrete_residual"] = sup_norm(discrete_residual(phi, *c.coupling));
  j["sup_residual"] = sup_norm(el_residual_tangential(phi, *c.coupling));
  return j;
}

inline Json run_stress(const RunContext& ctx) {
  const auto& c = ctx.config;
  const Json& sec = cfg::section(c.sections, "stress");
  const Grid g = c.domain.grid();
  const SphereField phi = build_initial(c.initial, g, c.target_dim, *c.coupling, c.seed);
  const SymTensorField s = stress_tensor(phi, *c.coupling);
  const auto div = stress_divergence(s);
  CsvTable t({"i", "j", "min", "max", "mean", "sup_div_j"});
  for (int i = 0; i < s.dim; ++i) {
    for (int k = i; k < s.dim; ++k) {
      const auto st = detail::stats(s(i, k));
      t.row().add(i).add(k).add(st.min).add(st.max).add(st.mean).add(sup_norm(div[k]));
    }
  }
  t.write(ctx.out / "stress.csv");
  Json j;
  j["sup_div"] = stress_divergence_sup(div);
  if (const Json* r = cfg::find(sec, "cutoff_radius")) {
    require(r->is_number(), ErrorCode::ConfigError, "stress.cutoff_radius: expected a number");
    const RadialCutoff eta(r->get<double>());
    const VanishingIdentity v = vanishing_identity(phi, *c.coupling, eta);
    j["stationary_pairing"] = stationary_pairing(s, eta);
    j["cutoff_bound_C"] = eta.derivative_bound();
    j["vanishing"] = Json{{"lhs", v.lhs},
                          {"lhs_dirichlet", v.lhs_dirichlet},
                          {"lhs_bienergy", v.lhs_bienergy},
                          {"rhs", v.rhs},
                          {"rhs_terms", std::vector<double>(std::begin(v.rhs_terms), std::end(v.rhs_terms))}};
  }
  return j;
}

inline Json run_monotone(const RunContext& ctx) {
  const auto& c = ctx.config;
  const Json& sec = cfg::section(c.sections, "monotone");
  const Grid g = c.domain.grid();
  const SphereField phi = build_initial(c.initial, g, c.target_dim, *c.coupling, c.seed);
  const auto radii = cfg::numbers_or(sec, "radii", "monotone.radii", {});
  require(!radii.empty(), ErrorCode::ConfigError, "monotone.radii: missing required key \"radii\"");
  const MonotonicityReport rep = monotonicity_report(phi, *c.coupling, radii);
  monotonicity_table(rep).write(ctx.out / "monotonicity.csv");
  Json j;
  j["verdict"] = to_string(rep.verdict);
  j["tau_orth"] = rep.tau_orth;
  std::vector<double> tol;
  for (const auto& r : rep.rows) tol.push_back(r.tolerance);
  j["staircase_tolerance"] = tol;
  return j;
}

inline Json run_morrey(const RunContext& ctx) {
  const auto& c = ctx.config;
  const Json& sec = cfg::section(c.sections, "morrey");
  const Grid g = c.domain.grid();
  const SphereField phi = build_initial(c.initial, g, c.target_dim, *c.coupling, c.seed);
  const std::string what = cfg::text_or(sec, "quantity", "morrey.quantity", "gradient");
  ScalarField f = ScalarField::zeros(g);
  if (what == "gradient") {
    f = energy_density(phi);
    for (double& v : f.values()) v = std::sqrt(v);
  } else if (what == "hessian") {
    f = flat_hessian_norm_squared(phi);
    for (double& v : f.values()) v = std::sqrt(v);
  } else {
    require(what == "one", ErrorCode::ConfigError, "morrey.quantity: expected gradient, hessian or one");
    for (double& v : f.values()) v = 1.0;
  }
  const double p = cfg::number_or(sec, "p", "morrey.p", 2.0);
  const double lambda = cfg::number_or(sec, "lambda", "morrey.lambda", g.dim());
  MorreyOptions opts;
  opts.radii = cfg::numbers_or(sec, "radii", "morrey.radii", {});
  opts.center_stride = static_cast<int>(cfg::integer_or(sec, "center_stride", "morrey.center_stride", 2));
  std::optional<MorreyParams> params;
  try {
    params.emplace(p, lambda);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("morrey: ") + e.what());
  }
  const double radius = cfg::number_or(sec, "radius", "morrey.radius", 1.0);
  const MorreyResult res = morrey_norm(f, *params, BallRegion::at_origin(g, radius), opts);
  Json report = to_json(res);
  if (const Json* eps = cfg::find(sec, "eps0")) {
    require(eps->is_number(), ErrorCode::ConfigError, "morrey.eps0: expected a number");
    report["smallness"] = to_json(smallness(phi, eps->get<double>(), opts));
  }
  write_json(ctx.out / "morrey.json", report);
  return Json{{"norm", res.norm}, {"best_r", res.best_r}};
}

struct SweepRow {
  Coupling coupling;
  SolveReport report;
  EnergyBreakdown energy;
  double sup_tau = 0.0;
  double conservation_defect = 0.0;
};

inline std::vector<Coupling> sweep_couplings(const Json& sec) {
  std::vector<Coupling> out;
  const double d2 = cfg::number_or(sec, "delta2", "sweep.delta2", 1.0);
  for (double q : cfg::numbers_or(sec, "ratios", "sweep.ratios", {})) out.emplace_back(q * d2, d2);
  if (const Json* list = cfg::find(sec, "couplings")) {
    require(list->is_array(), ErrorCode::ConfigError, "sweep.couplings: expected an array");
    for (const auto& e : *list) out.push_back(parse_coupling(e, "sweep.couplings[]"));
  }
  return out;
}

inline Json run_sweep(const RunContext& ctx) {
  const auto& c = ctx.config;
  const Json& sec = cfg::section(c.sections, "sweep");
  const std::vector<Coupling> couplings = sweep_couplings(sec);
  const Grid g = c.domain.grid();
  std::vector<std::optional<SweepRow>> rows(couplings.size());
  std::vector<std::string> errors(couplings.size());

  auto work = [&](std::size_t k) {
    try {
      const Coupling& cp = couplings[k];
      const SphereField start = build_initial(c.initial, g, c.target_dim, cp, c.seed);
      SolveReport rep = solve(start, cp, c.solver);
      SweepRow row{cp, rep, energies(rep.final_field, cp), sup_norm(tension(rep.final_field)), 0.0};
      for (const auto& r : conservation_report(rep.final_field, cp, 1)) {
        row.conservation_defect = std::max(row.conservation_defect, r.sup_div);
      }
      rows[k].emplace(std::move(row));
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  };
  const int threads = std::min<int>(detail::thread_cap(), static_cast<int>(std::max<std::size_t>(1, rows.size())));
  if (threads <= 1) {
    for (std::size_t k = 0; k < rows.size(); ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < rows.size(); k = next++) work(k);
      });
    }
    for (auto& th : pool) th.join();
  }
  for (std::size_t k = 0; k < errors.size(); ++k) {
    if (!errors[k].empty()) throw Error(ErrorCode::InvalidArgument, "sweep row " + std::to_string(k) + ": " + errors[k]);
  }

  CsvTable t({"delta1", "delta2", "converged", "termination", "iterations", "dirichlet", "bienergy", "sup_tau",
              "conservation_defect", "final_residual"});
  Json summary_rows = Json::array();
  for (const auto& r : rows) {
    t.row()
        .add(r->coupling.delta1)
        .add(r->coupling.delta2)
        .add(r->report.converged)
        .add_text(to_string(r->report.termination))
        .add(r->report.iterations)
        .add(r->energy.dirichlet)
        .add(r->energy.bienergy)
        .add(r->sup_tau)
        .add(r->conservation_defect)
        .add(r->report.residual_history.back());
    summary_rows.push_back(Json{{"delta1", r->coupling.delta1},
                                {"delta2", r->coupling.delta2},
                                {"converged", r->report.converged},
                                {"sup_tau", r->sup_tau},
                                {"bienergy", r->energy.bienergy}});
  }
  t.write(ctx.out / "sweep.csv");
  return Json{{"rows", summary_rows}};
}

// ---------------------------------------------------------------------------

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs one experiment and writes its artifacts plus summary.json (no
/// timestamps) and metadata.json (timestamp) into config.out.
inline Json run(const ExperimentConfig& config) {
  const std::filesystem::path out(config.out);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  require(!ec && std::filesystem::is_directory(out), ErrorCode::IoError, "cannot create output directory " + config.out);
  const RunContext ctx{config, out};

  Json summary;
  summary["mode"] = to_string(config.mode);
  summary["version"] = kVersion;
  summary["seed"] = config.seed;
  summary["grid"] = to_json(config.domain.grid());
  summary["target_dim"] = config.target_dim;
  if (config.coupling) {
    summary["coupling"] = to_json(*config.coupling);
    summary["noncoercive"] = config.coupling->noncoercive();
  }
  switch (config.mode) {
    case Mode::Solve: summary["result"] = run_solve(ctx); break;
    case Mode::Residual: summary["result"] = run_residual(ctx); break;
    case Mode::Conserve: summary["result"] = run_conserve(ctx); break;
    case Mode::Stress: summary["result"] = run_stress(ctx); break;
    case Mode::Monotone: summary["result"] = run_monotone(ctx); break;
    case Mode::Morrey: summary["result"] = run_morrey(ctx); break;
    case Mode::Sweep: summary["result"] = run_sweep(ctx); break;
  }
  write_json(out / "summary.json", summary);
  write_json(out / "metadata.json",
             Json{{"timestamp", utc_timestamp()}, {"version", kVersion}, {"threads", detail::thread_cap()}});
  return summary;
}

}  // namespace sesqui
