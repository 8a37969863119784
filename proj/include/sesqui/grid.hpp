#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "sesqui/error.hpp"

namespace sesqui {

enum class DomainKind { Torus, Patch };

inline const char* to_string(DomainKind kind) {
  return kind == DomainKind::Torus ? "torus" : "patch";
}

/// Uniform Cartesian grid on either a flat torus (periodic, node k at k*h)
/// or a Euclidean patch [-R, R]^m (odd node count so the origin is a node).
///
/// Nodes are stored row-major: axis 0 varies slowest. On a patch, stencils
/// are only evaluated on nodes at least `depth` layers away from the
/// boundary; fields carry that depth with them.
class Grid {
 public:
  static constexpr std::size_t kMinTorusNodes = 8;
  static constexpr int kMinPatchMargin = 2;

  static Grid torus(std::vector<std::size_t> sizes, std::vector<double> lengths) {
    require(!sizes.empty(), ErrorCode::InvalidGrid, "torus needs at least one axis");
    require(sizes.size() == lengths.size(), ErrorCode::InvalidGrid,
            "sizes and lengths must have the same length");
    Grid g;
    g.kind_ = DomainKind::Torus;
    for (std::size_t a = 0; a < sizes.size(); ++a) {
      require(sizes[a] >= kMinTorusNodes, ErrorCode::InvalidGrid,
              "torus axis " + std::to_string(a) + " needs at least 8 nodes");
      require(std::isfinite(lengths[a]) && lengths[a] > 0.0, ErrorCode::InvalidGrid,
              "torus period must be positive");
      g.spacings_.push_back(lengths[a] / static_cast<double>(sizes[a]));
    }
    g.sizes_ = std::move(sizes);
    g.lengths_ = std::move(lengths);
    g.finish();
    return g;
  }

  /// Torus with `dim` identical axes.
  static Grid torus(int dim, std::size_t nodes, double length) {
    require(dim >= 1, ErrorCode::InvalidGrid, "dimension must be at least 1");
    return torus(std::vector<std::size_t>(dim, nodes), std::vector<double>(dim, length));
  }

  static Grid patch(int dim, std::size_t nodes, double half_width, int margin = kMinPatchMargin) {
    require(dim >= 1, ErrorCode::InvalidGrid, "dimension must be at least 1");
    require(nodes % 2 == 1, ErrorCode::InvalidGrid, "patch node count must be odd");
    require(std::isfinite(half_width) && half_width > 0.0, ErrorCode::InvalidGrid,
            "patch half width must be positive");
    require(margin >= kMinPatchMargin, ErrorCode::InvalidGrid, "patch margin must be at least 2");
    require(nodes >= static_cast<std::size_t>(2 * margin + 1), ErrorCode::InvalidGrid,
            "patch interior is empty");
    Grid g;
    g.kind_ = DomainKind::Patch;
    g.sizes_.assign(dim, nodes);
    g.lengths_.assign(dim, 2.0 * half_width);
    g.spacings_.assign(dim, 2.0 * half_width / static_cast<double>(nodes - 1));
    g.half_width_ = half_width;
    g.margin_ = margin;
    g.finish();
    return g;
  }

  DomainKind kind() const { return kind_; }
  bool periodic() const { return kind_ == DomainKind::Torus; }
  int dim() const { return static_cast<int>(sizes_.size()); }
  std::size_t size(int axis) const { return sizes_.at(axis); }
  const std::vector<std::size_t>& sizes() const { return sizes_; }
  double length(int axis) const { return lengths_.at(axis); }
  const std::vector<double>& lengths() const { return lengths_; }
  double spacing(int axis) const { return spacings_.at(axis); }
  const std::vector<double>& spacings() const { return spacings_; }
  std::size_t stride(int axis) const { return strides_[axis]; }
  std::size_t node_count() const { return count_; }
  double half_width() const { return half_width_; }
  int margin() const { return margin_; }

  double min_spacing() const {
    double h = spacings_[0];
    for (double s : spacings_) h = std::min(h, s);
    return h;
  }

  double cell_volume() const {
    double v = 1.0;
    for (double s : spacings_) v *= s;
    return v;
  }

  /// Torus: product of periods. Patch: the full box (2R)^m.
  double volume() const {
    double v = 1.0;
    for (double l : lengths_) v *= l;
    return v;
  }

  std::size_t index(std::size_t node, int axis) const {
    return (node / strides_[axis]) % sizes_[axis];
  }

  double coord(std::size_t node, int axis) const {
    const double k = static_cast<double>(index(node, axis));
    return periodic() ? k * spacings_[axis] : -half_width_ + k * spacings_[axis];
  }

  /// Neighbour `step` nodes along `axis`. On a patch the caller guarantees
  /// the neighbour exists (node at sufficient depth).
  std::size_t neighbor(std::size_t node, int axis, int step) const {
    if (!periodic()) {
      return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) +
                                      step * static_cast<std::ptrdiff_t>(strides_[axis]));
    }
    const auto n = static_cast<std::ptrdiff_t>(sizes_[axis]);
    const auto k = static_cast<std::ptrdiff_t>(index(node, axis));
    std::ptrdiff_t kk = (k + step) % n;
    if (kk < 0) kk += n;
    return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(node) +
                                    (kk - k) * static_cast<std::ptrdiff_t>(strides_[axis]));
  }

  /// True when every index of `node` lies at least `depth` layers inside the
  /// patch. Always true on a torus.
  bool inside(std::size_t node, int depth) const {
    if (periodic() || depth <= 0) return true;
    for (int a = 0; a < dim(); ++a) {
      const std::size_t k = index(node, a);
      if (k < static_cast<std::size_t>(depth) || k + depth >= sizes_[a]) return false;
    }
    return true;
  }

  /// Patch centre node (the origin). Torus: node 0.
  std::size_t origin_node() const {
    if (periodic()) return 0;
    std::size_t node = 0;
    for (int a = 0; a < dim(); ++a) node += (sizes_[a] / 2) * strides_[a];
    return node;
  }

  /// Number of nodes at least `depth` layers inside (all nodes on a torus).
  std::size_t inside_count(int depth) const {
    if (periodic() || depth <= 0) return count_;
    std::size_t c = 1;
    for (std::size_t n : sizes_) {
      if (n <= static_cast<std::size_t>(2 * depth)) return 0;
      c *= n - 2 * depth;
    }
    return c;
  }

  bool operator==(const Grid& o) const {
    return kind_ == o.kind_ && sizes_ == o.sizes_ && lengths_ == o.lengths_ &&
           half_width_ == o.half_width_ && margin_ == o.margin_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  Grid() = default;

  void finish() {
    strides_.assign(sizes_.size(), 1);
    for (int a = dim() - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * sizes_[a + 1];
    count_ = 1;
    for (std::size_t n : sizes_) count_ *= n;
  }

  DomainKind kind_ = DomainKind::Torus;
  std::vector<std::size_t> sizes_;
  std::vector<std::size_t> strides_;
  std::vector<double> lengths_;
  std::vector<double> spacings_;
  double half_width_ = 0.0;
  int margin_ = 0;
  std::size_t count_ = 0;
};

/// Visits every node at least `depth` layers inside the grid, in storage order.
template <class Fn>
void for_each_node(const Grid& grid, int depth, Fn&& fn) {
  const std::size_t count = grid.node_count();
  if (grid.periodic() || depth <= 0) {
    for (std::size_t node = 0; node < count; ++node) fn(node);
    return;
  }
  for (std::size_t node = 0; node < count; ++node) {
    if (grid.inside(node, depth)) fn(node);
  }
}

}  // namespace sesqui
