#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace ssde {

using Vec3 = std::array<double, 3>;

/// Uniform cell-centred grid on the box [-L, L]^3 with m nodes per axis.
///
/// Node i sits at -L + (i + 1/2) h with h = 2L/m, so for even m the origin
/// lies between nodes and never coincides with one. Values outside the box
/// are treated as zero (homogeneous Dirichlet truncation); the nearest ghost
/// node sits at +-(L + h/2).
class Grid {
 public:
  Grid() = default;
  Grid(int nodes_per_axis, double half_width);

  /// Grid with spacing no larger than `max_spacing` covering [-L, L]^3 and
  /// with an even node count.
  static Grid with_max_spacing(double half_width, double max_spacing);

  int nodes_per_axis() const noexcept { return m_; }
  double half_width() const noexcept { return half_width_; }
  double spacing() const noexcept { return h_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(m_) * m_ * m_; }
  double cell_volume() const noexcept { return h_ * h_ * h_; }

  /// True when no node coincides with the origin (even m).
  bool staggered() const noexcept { return m_ % 2 == 0; }

  double coordinate(int i) const noexcept { return -half_width_ + (i + 0.5) * h_; }

  std::size_t index(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * m_ + j) * m_ + k;
  }

  std::array<int, 3> unflatten(std::size_t idx) const noexcept {
    const int k = static_cast<int>(idx % m_);
    const int j = static_cast<int>((idx / m_) % m_);
    const int i = static_cast<int>(idx / (static_cast<std::size_t>(m_) * m_));
    return {i, j, k};
  }

  Vec3 point(std::size_t idx) const noexcept {
    const auto [i, j, k] = unflatten(idx);
    return {coordinate(i), coordinate(j), coordinate(k)};
  }

  bool inside(int i, int j, int k) const noexcept {
    return i >= 0 && j >= 0 && k >= 0 && i < m_ && j < m_ && k < m_;
  }

  /// Same lattice extended by `extra` nodes on each side.
  Grid padded(int extra) const;

  bool same_as(const Grid& other) const noexcept;

 private:
  int m_ = 0;
  double half_width_ = 0.0;
  double h_ = 0.0;
};

using GridFunction = std::vector<double>;

/// Node-sampled data with `components` values per node, stored node-major.
struct GridField {
  Grid grid;
  int components = 1;
  std::vector<double> values;

  GridField() = default;
  GridField(const Grid& g, int comps) : grid(g), components(comps), values(g.size() * comps, 0.0) {}

  std::span<double> node(std::size_t idx) { return {values.data() + idx * components, static_cast<std::size_t>(components)}; }
  std::span<const double> node(std::size_t idx) const {
    return {values.data() + idx * components, static_cast<std::size_t>(components)};
  }

  /// Trilinear interpolation at x; outside the node hull the boundary
  /// values are extended constantly.
  void interpolate(std::span<const double> x, std::span<double> out) const;

  /// Component `c` as a scalar grid function.
  GridFunction component(int c) const;
};

/// Sample a scalar grid function at x with the same interpolation rule.
double interpolate(const Grid& grid, const GridFunction& f, std::span<const double> x);

/// Binary grid format: text header terminated by a line "end", then
/// little-endian float64 payload in node-major order.
void write_grid_field(const std::filesystem::path& path, const GridField& field);
GridField read_grid_field(const std::filesystem::path& path);

}  // namespace ssde
