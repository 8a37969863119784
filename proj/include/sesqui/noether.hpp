#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "sesqui/energy.hpp"
#include "sesqui/error.hpp"
#include "sesqui/families.hpp"
#include "sesqui/field.hpp"
#include "sesqui/operators.hpp"

namespace sesqui {

/// Skew-symmetric (n+1)x(n+1) matrix generating a rotation of S^n.
class KillingGenerator {
 public:
  static constexpr double kSkewTolerance = 1e-14;

  /// Row-major entries.
  KillingGenerator(int size, std::vector<double> entries) : size_(size), a_(std::move(entries)) {
    require(size >= 2, ErrorCode::InvalidArgument, "generator must be at least 2x2");
    require(a_.size() == static_cast<std::size_t>(size) * size, ErrorCode::InvalidArgument,
            "generator entry count must be size^2");
    for (int i = 0; i < size; ++i) {
      for (int j = 0; j < size; ++j) {
        require(std::isfinite((*this)(i, j)), ErrorCode::NonFinite, "generator has a non-finite entry");
        require(std::abs((*this)(i, j) + (*this)(j, i)) <= kSkewTolerance, ErrorCode::InvalidArgument,
                "generator is not skew-symmetric");
      }
    }
  }

  static KillingGenerator zero(int size) {
    return KillingGenerator(size, std::vector<double>(static_cast<std::size_t>(size) * size, 0.0));
  }

  /// E_ab: +1 at (a, b), -1 at (b, a).
  static KillingGenerator elementary(int size, int a, int b) {
    require(a >= 0 && b >= 0 && a < size && b < size && a != b, ErrorCode::InvalidArgument,
            "elementary generator needs distinct indices in range");
    std::vector<double> e(static_cast<std::size_t>(size) * size, 0.0);
    e[a * size + b] = 1.0;
    e[b * size + a] = -1.0;
    return KillingGenerator(size, std::move(e));
  }

  /// Rotation of the (x, y) plane: (y0, y1, ...) -> (-y1, y0, 0, ...).
  static KillingGenerator z_rotation(int size) { return elementary(size, 1, 0); }

  int size() const { return size_; }
  double operator()(int i, int j) const { return a_[i * size_ + j]; }
  const std::vector<double>& entries() const { return a_; }

  /// alpha * this + beta * other.
  KillingGenerator combine(double alpha, double beta, const KillingGenerator& other) const {
    require(other.size_ == size_, ErrorCode::InvalidArgument, "generator size mismatch");
    std::vector<double> e(a_.size());
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = alpha * a_[k] + beta * other.a_[k];
    return KillingGenerator(size_, std::move(e));
  }

 private:
  int size_;
  std::vector<double> a_;
};

struct BasisGenerator {
  int a = 0;
  int b = 0;
  KillingGenerator generator;
};

/// The n(n+1)/2 elementary generators E_ab, a < b, in lexicographic order.
inline std::vector<BasisGenerator> so_basis(int n) {
  require(n >= 1, ErrorCode::InvalidArgument, "so_basis needs n >= 1");
  std::vector<BasisGenerator> out;
  for (int a = 0; a <= n; ++a) {
    for (int b = a + 1; b <= n; ++b) out.push_back({a, b, KillingGenerator::elementary(n + 1, a, b)});
  }
  return out;
}

/// A * V at every node.
inline AmbientField apply(const KillingGenerator& A, const AmbientField& v) {
  require(A.size() == v.components(), ErrorCode::InvalidArgument, "generator does not match the target");
  auto out = AmbientField::zeros(v.grid(), v.components(), v.depth());
  const int n = A.size();
  for_each_node(v.grid(), v.depth(), [&](std::size_t x) {
    auto in = v.at(x);
    auto o = out.at(x);
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += A(i, j) * in[j];
      o[i] = s;
    }
  });
  return out;
}

/// X(phi) = A phi.
inline AmbientField killing_field(const KillingGenerator& A, const SphereField& phi) {
  return apply(A, phi.ambient());
}

/// Components J_i of a vector field on the domain.
struct CurrentField {
  std::vector<ScalarField> J;
  int dim() const { return static_cast<int>(J.size()); }
};

/// J_i = delta2 (<d_i D phi, A phi> - <D phi, A d_i phi> + 2|d phi|^2 <d_i phi, A phi>)
///       - delta1 <d_i phi, A phi>.
inline CurrentField current(const Kinematics& k, const SphereField& phi, const Coupling& c,
                            const KillingGenerator& A) {
  const AmbientField X = apply(A, phi.ambient());
  CurrentField out;
  for (int i = 0; i < phi.grid().dim(); ++i) {
    const ScalarField first = dot(k.d[i], X);
    ScalarField bi = dot(partial(k.lap, i), X) - dot(k.lap, apply(A, k.d[i]));
    ScalarField quart = first;
    for_each_node(phi.grid(), quart.depth(), [&](std::size_t x) { quart[x] *= 2.0 * k.e[x]; });
    bi = bi + quart;
    out.J.push_back(combine(c.delta2, bi, -c.delta1, first));
  }
  return out;
}

inline CurrentField current(const SphereField& phi, const Coupling& c, const KillingGenerator& A) {
  return current(kinematics(phi), phi, c, A);
}

/// sum_i d_i J_i.
inline ScalarField divergence(const CurrentField& j) {
  require(!j.J.empty(), ErrorCode::InvalidArgument, "empty current");
  ScalarField out = partial(j.J[0], 0);
  for (int i = 1; i < j.dim(); ++i) out = out + partial(j.J[i], i);
  return out;
}

inline ScalarField current_divergence(const SphereField& phi, const Coupling& c, const KillingGenerator& A) {
  return divergence(current(phi, c, A));
}

/// sum_x dV sum_i W_i d_i eta with W = -J the weak-form integrand
///   delta2 (<D phi, d_i X> - <d_i D phi, X> - 2|d phi|^2 <d_i phi, X>) + delta1 <d_i phi, X>.
/// Central differences are skew-adjoint on the torus, so this equals
/// sum_x dV eta div J exactly.
inline double weak_pairing(const CurrentField& j, const ScalarField& eta) {
  const Grid& g = eta.grid();
  require(g.periodic(), ErrorCode::InvalidDomain, "weak pairing is defined on tori");
  require(j.dim() == g.dim(), ErrorCode::InvalidArgument, "current dimension mismatch");
  double sum = 0.0;
  for (int i = 0; i < g.dim(); ++i) {
    require_same_grid(j.J[i].grid(), g);
    sum -= integrate(product(j.J[i], partial(eta, i)));
  }
  return sum;
}

inline double weak_pairing(const SphereField& phi, const Coupling& c, const KillingGenerator& A,
                           const ScalarField& eta) {
  return weak_pairing(current(phi, c, A), eta);
}

struct TestFunction {
  std::string label;
  ScalarField eta;
};

/// {1} and sin, cos(2 pi k x_a / L_a) for every axis a and k = 1..max_mode.
inline std::vector<TestFunction> trig_test_family(const Grid& grid, int max_mode = 3) {
  require(grid.periodic(), ErrorCode::InvalidDomain, "trig test family lives on tori");
  std::vector<TestFunction> out;
  out.push_back({"1", sample_scalar(grid, [](std::span<const double>) { return 1.0; })});
  for (int a = 0; a < grid.dim(); ++a) {
    const double w = kTwoPi / grid.length(a);
    for (int k = 1; k <= max_mode; ++k) {
      const std::string tag = std::to_string(k) + "x" + std::to_string(a);
      out.push_back({"sin" + tag, sample_scalar(grid, [&](std::span<const double> x) { return std::sin(k * w * x[a]); })});
      out.push_back({"cos" + tag, sample_scalar(grid, [&](std::span<const double> x) { return std::cos(k * w * x[a]); })});
    }
  }
  return out;
}

/// Matrix-valued current per axis:
///   delta2 (d_i D phi ^ phi - D phi ^ d_i phi + 2|d phi|^2 d_i phi ^ phi) - delta1 d_i phi ^ phi,
/// a ^ b = a b^T - b a^T. Entry (a, b) equals the current of E_ab.
struct WedgeCurrent {
  int size = 0;
  std::vector<AmbientField> axes;  ///< (size*size) components per node, row-major

  ScalarField entry(int axis, int a, int b) const {
    const AmbientField& f = axes.at(axis);
    auto out = ScalarField::zeros(f.grid(), 1, f.depth());
    for_each_node(f.grid(), f.depth(), [&](std::size_t x) { out[x] = f.at(x)[a * size + b]; });
    return out;
  }
};

inline WedgeCurrent wedge_current(const SphereField& phi, const Coupling& c) {
  const Kinematics k = kinematics(phi);
  const Grid& g = phi.grid();
  const int n = phi.components();
  WedgeCurrent out;
  out.size = n;
  for (int i = 0; i < g.dim(); ++i) {
    const AmbientField dlap = partial(k.lap, i);
    auto w = AmbientField::zeros(g, n * n, dlap.depth());
    for_each_node(g, dlap.depth(), [&](std::size_t x) {
      auto p = phi.at(x);
      auto d = k.d[i].at(x);
      auto l = k.lap.at(x);
      auto dl = dlap.at(x);
      const double e = k.e[x];
      auto o = w.at(x);
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          const double dphi_wedge = d[a] * p[b] - d[b] * p[a];
          const double bi = (dl[a] * p[b] - dl[b] * p[a]) - (l[a] * d[b] - l[b] * d[a]) + 2.0 * e * dphi_wedge;
          o[a * n + b] = c.delta2 * bi - c.delta1 * dphi_wedge;
        }
      }
    });
    out.axes.push_back(std::move(w));
  }
  return out;
}

struct ConservationRow {
  int generator = 0;
  int a = 0;
  int b = 0;
  double sup_div = 0.0;
  double l2_div = 0.0;
  double max_weak = 0.0;  ///< max |weak_pairing| over the trig test family
};

/// One row per elementary generator of so(n+1).
inline std::vector<ConservationRow> conservation_report(const SphereField& phi, const Coupling& c,
                                                        int max_mode = 3) {
  const Kinematics k = kinematics(phi);
  const int n = phi.target_dim();
  std::vector<TestFunction> tests;
  if (phi.grid().periodic()) tests = trig_test_family(phi.grid(), max_mode);
  std::vector<ConservationRow> rows;
  int idx = 0;
  for (const auto& gen : so_basis(n)) {
    const CurrentField j = current(k, phi, c, gen.generator);
    const ScalarField div = divergence(j);
    ConservationRow row{idx++, gen.a, gen.b, sup_norm(div), l2_norm(div), 0.0};
    for (const auto& t : tests) row.max_weak = std::max(row.max_weak, std::abs(weak_pairing(j, t.eta)));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sesqui
