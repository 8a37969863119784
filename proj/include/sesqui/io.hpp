#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "sesqui/energy.hpp"
#include "sesqui/error.hpp"
#include "sesqui/field.hpp"
#include "sesqui/grid.hpp"
#include "sesqui/monotonicity.hpp"
#include "sesqui/morrey.hpp"
#include "sesqui/noether.hpp"
#include "sesqui/solver.hpp"

namespace sesqui {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Binary field files. Layout (little-endian):
//   char[8] "SESQFLD1", u32 version, u32 kind (0 torus, 1 patch), u32 m,
//   u32 components, u64 sizes[m], f64 lengths[m], f64 half_width, u32 margin,
//   f64 values[node_count * components] in row-major node order.

inline constexpr char kFieldMagic[8] = {'S', 'E', 'S', 'Q', 'F', 'L', 'D', '1'};
inline constexpr std::uint32_t kFieldVersion = 1;

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

namespace detail {

template <class T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::string& path) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(static_cast<bool>(in), ErrorCode::IoError, "truncated field file " + path);
  return v;
}

}  // namespace detail

inline void write_field(const std::string& path, const AmbientField& f) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path + " for writing");
  const Grid& g = f.grid();
  out.write(kFieldMagic, sizeof(kFieldMagic));
  detail::put(out, kFieldVersion);
  detail::put(out, static_cast<std::uint32_t>(g.periodic() ? 0 : 1));
  detail::put(out, static_cast<std::uint32_t>(g.dim()));
  detail::put(out, static_cast<std::uint32_t>(f.components()));
  for (int a = 0; a < g.dim(); ++a) detail::put(out, static_cast<std::uint64_t>(g.size(a)));
  for (int a = 0; a < g.dim(); ++a) detail::put(out, g.length(a));
  detail::put(out, g.periodic() ? 0.0 : g.half_width());
  detail::put(out, static_cast<std::uint32_t>(g.periodic() ? 0 : g.margin()));
  const auto v = f.values();
  out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path);
}

inline void write_field(const std::string& path, const SphereField& f) { write_field(path, f.ambient()); }

inline AmbientField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  require(static_cast<bool>(in) && std::memcmp(magic, kFieldMagic, 8) == 0, ErrorCode::IoError,
          path + " is not a field file");
  const auto version = detail::get<std::uint32_t>(in, path);
  require(version == kFieldVersion, ErrorCode::IoError, "unsupported field file version");
  const auto kind = detail::get<std::uint32_t>(in, path);
  const auto m = static_cast<int>(detail::get<std::uint32_t>(in, path));
  const auto comps = static_cast<int>(detail::get<std::uint32_t>(in, path));
  require(kind <= 1 && m >= 1 && m <= 16 && comps >= 1, ErrorCode::IoError, "corrupt field header in " + path);
  std::vector<std::size_t> sizes(m);
  std::vector<double> lengths(m);
  for (auto& s : sizes) s = static_cast<std::size_t>(detail::get<std::uint64_t>(in, path));
  for (auto& l : lengths) l = detail::get<double>(in, path);
  const double half_width = detail::get<double>(in, path);
  const auto margin = static_cast<int>(detail::get<std::uint32_t>(in, path));
  const Grid g = kind == 0 ? Grid::torus(sizes, lengths) : Grid::patch(m, sizes[0], half_width, margin);
  require(g.sizes() == sizes, ErrorCode::IoError, "patch files need equal axis sizes");
  std::vector<double> values(g.node_count() * comps);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
  require(static_cast<bool>(in), ErrorCode::IoError, "truncated field data in " + path);
  return AmbientField(g, comps, std::move(values));
}

// ---------------------------------------------------------------------------
// CSV

/// %.17g: round-trips every double.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& add(double v) { return add_text(format_number(v)); }
  CsvTable& add(int v) { return add_text(std::to_string(v)); }
  CsvTable& add(std::size_t v) { return add_text(std::to_string(v)); }
  CsvTable& add(bool v) { return add_text(v ? "true" : "false"); }
  CsvTable& add_text(const std::string& s) {
    rows_.back().push_back(s);
    return *this;
  }

  std::size_t size() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (k) out += ',';
        out += cells[k];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  void write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    out << str();
    require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path.string());
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  require(static_cast<bool>(out), ErrorCode::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// JSON views

inline Json to_json(const Grid& g) {
  Json j;
  j["kind"] = to_string(g.kind());
  j["dim"] = g.dim();
  j["sizes"] = g.sizes();
  j["lengths"] = g.lengths();
  j["spacings"] = g.spacings();
  if (!g.periodic()) {
    j["half_width"] = g.half_width();
    j["margin"] = g.margin();
  }
  return j;
}

inline Json to_json(const Coupling& c) { return Json{{"delta1", c.delta1}, {"delta2", c.delta2}}; }

inline Json to_json(const EnergyBreakdown& e) {
  return Json{{"dirichlet", e.dirichlet}, {"bienergy", e.bienergy}, {"interpolating", e.interpolating},
              {"extrinsic", e.extrinsic}, {"volume", e.volume},     {"quartic", e.quartic}};
}

inline Json to_json(const SolveReport& r) {
  return Json{{"iterations", r.iterations},
              {"converged", r.converged},
              {"termination", to_string(r.termination)},
              {"noncoercive", r.noncoercive},
              {"initial_energy", r.energy_history.empty() ? 0.0 : r.energy_history.front()},
              {"final_energy", r.energy_history.empty() ? 0.0 : r.energy_history.back()},
              {"final_residual", r.residual_history.empty() ? 0.0 : r.residual_history.back()},
              {"el_residual_sup", r.el_residual_sup},
              {"initial_step", r.initial_step},
              {"energy_history", r.energy_history},
              {"residual_history", r.residual_history}};
}

inline Json to_json(const MorreyResult& m) {
  return Json{{"p", m.p},           {"lambda", m.lambda},           {"norm", m.norm},
              {"r_list", m.r_list}, {"best_center", m.best_center}, {"best_r", m.best_r},
              {"balls", m.balls}};
}

inline Json to_json(const SmallnessReport& s) {
  return Json{{"gradient_norm", s.gradient_norm}, {"hessian_norm", s.hessian_norm}, {"quantity", s.quantity},
              {"epsilon0_sq", s.epsilon0_sq},     {"satisfied", s.satisfied},       {"m4_form", s.m4_form}};
}

/// energy_history.csv body: iter, energy, residual, stepsize.
inline CsvTable history_table(const SolveReport& r) {
  CsvTable t({"iter", "energy", "residual", "stepsize"});
  for (const auto& row : r.rows) t.row().add(row.iteration).add(row.energy).add(row.residual).add(row.step);
  return t;
}

inline CsvTable conservation_table(const std::vector<ConservationRow>& rows) {
  CsvTable t({"generator", "a", "b", "sup_div", "l2_div", "max_weak"});
  for (const auto& r : rows) t.row().add(r.generator).add(r.a).add(r.b).add(r.sup_div).add(r.l2_div).add(r.max_weak);
  return t;
}

inline CsvTable monotonicity_table(const MonotonicityReport& rep) {
  CsvTable t({"r", "theta", "tau_orth"});
  for (const auto& r : rep.rows) t.row().add(r.r).add(r.theta).add(r.tau_orth);
  return t;
}

}  // namespace sesqui
