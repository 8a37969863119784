#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sesqui/error.hpp"
#include "sesqui/grid.hpp"

namespace sesqui {

struct ScalarTag {};
struct AmbientTag {};

/// Node-sampled field with a fixed number of components per node.
///
/// `depth` counts the boundary layers of a patch on which the values are not
/// meaningful (each stencil application adds its radius). Always 0 on a torus.
template <class Tag>
class GridField {
 public:
  GridField(Grid grid, int components, std::vector<double> values, int depth = 0)
      : grid_(std::move(grid)), components_(components), depth_(depth), values_(std::move(values)) {
    require(components_ >= 1, ErrorCode::InvalidArgument, "field needs at least one component");
    require(values_.size() == grid_.node_count() * static_cast<std::size_t>(components_),
            ErrorCode::InvalidArgument, "value count does not match grid");
    for (double v : values_) {
      require(std::isfinite(v), ErrorCode::NonFinite, "field contains NaN or Inf");
    }
    if (grid_.periodic()) depth_ = 0;
  }

  static GridField zeros(const Grid& grid, int components = 1, int depth = 0) {
    return GridField(grid, components, depth);
  }

  const Grid& grid() const { return grid_; }
  int components() const { return components_; }
  int depth() const { return depth_; }
  std::size_t node_count() const { return grid_.node_count(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  std::span<const double> at(std::size_t node) const {
    return {values_.data() + node * components_, static_cast<std::size_t>(components_)};
  }
  std::span<double> at(std::size_t node) {
    return {values_.data() + node * components_, static_cast<std::size_t>(components_)};
  }

  /// First component at a node; the natural accessor for scalar fields.
  double operator[](std::size_t node) const { return values_[node * components_]; }
  double& operator[](std::size_t node) { return values_[node * components_]; }

 private:
  GridField(const Grid& grid, int components, int depth)
      : grid_(grid),
        components_(components),
        depth_(grid.periodic() ? 0 : depth),
        values_(grid.node_count() * static_cast<std::size_t>(components), 0.0) {}

  Grid grid_;
  int components_;
  int depth_;
  std::vector<double> values_;
};

using ScalarField = GridField<ScalarTag>;
using AmbientField = GridField<AmbientTag>;

/// Map into S^n stored extrinsically as unit vectors in R^{n+1}.
class SphereField {
 public:
  static constexpr double kNormTolerance = 1e-12;

  SphereField(const Grid& grid, int target_dim, std::vector<double> values)
      : SphereField(AmbientField(grid, target_dim + 1, std::move(values))) {}

  explicit SphereField(AmbientField values) : values_(std::move(values)) {
    require(values_.components() >= 2, ErrorCode::InvalidArgument, "target sphere needs n >= 1");
    require(values_.depth() == 0, ErrorCode::InvalidArgument,
            "sphere fields must be defined on every node");
    for (std::size_t node = 0; node < values_.node_count(); ++node) {
      double norm2 = 0.0;
      for (double v : values_.at(node)) norm2 += v * v;
      require(std::abs(std::sqrt(norm2) - 1.0) <= kNormTolerance, ErrorCode::NotUnitNorm,
              "node " + std::to_string(node) + " is not a unit vector");
    }
  }

  const Grid& grid() const { return values_.grid(); }
  int target_dim() const { return values_.components() - 1; }
  int components() const { return values_.components(); }
  std::size_t node_count() const { return values_.node_count(); }
  std::span<const double> at(std::size_t node) const { return values_.at(node); }
  std::span<const double> values() const { return values_.values(); }
  const AmbientField& ambient() const { return values_; }

 private:
  AmbientField values_;
};

inline void require_same_grid(const Grid& a, const Grid& b) {
  require(a == b, ErrorCode::DomainMismatch, "fields live on different grids");
}

}  // namespace sesqui
