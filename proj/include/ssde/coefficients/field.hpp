#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssde/grid.hpp"

namespace ssde::coefficients {

using Point = std::vector<double>;

/// Symbolic drift field b : R^d -> R^d.
///
/// Immutable after construction; copies share grid payloads. Evaluation at
/// (or within tolerance of) a singular point throws SingularPoint instead of
/// returning a placeholder value.
class FieldSpec {
 public:
  /// b(x) = sign * kappa * x / |x|^2.
  struct Hardy {
    double kappa = 0.0;
    int sign = +1;
  };
  /// b(x) = M * direction on the cube |x|_inf <= half_width, zero outside.
  /// An infinite half-width gives a constant field.
  struct BoundedBox {
    double M = 0.0;
    std::vector<double> direction;
    double half_width = std::numeric_limits<double>::infinity();
  };
  struct GridSampled {
    std::shared_ptr<const GridField> data;
    std::string source;  // file the samples came from, empty if computed
  };
  struct Sum {
    std::vector<FieldSpec> children;
  };
  /// Output of heat-kernel regularisation, sampled on a grid.
  struct Mollified {
    std::shared_ptr<const FieldSpec> base;
    int n = 0;
    double eps = 0.0;
    std::shared_ptr<const GridField> data;
  };
  /// Closed-form field produced by a derivation (divergence of a matrix,
  /// Stratonovich correction, rescaling).
  struct Derived {
    std::string name;
    std::function<void(std::span<const double>, std::span<double>)> fn;
  };
  using Kind = std::variant<Hardy, BoundedBox, GridSampled, Sum, Mollified, Derived>;

  static FieldSpec hardy(int d, double kappa, int sign = +1);
  static FieldSpec bounded_box(int d, double M, std::vector<double> direction = {},
                               double half_width = std::numeric_limits<double>::infinity());
  static FieldSpec constant(std::vector<double> value);
  static FieldSpec zero(int d);
  static FieldSpec grid_sampled(std::shared_ptr<const GridField> data, std::string source = {});
  static FieldSpec sum(std::vector<FieldSpec> children);
  static FieldSpec mollified(FieldSpec base, int n, double eps, std::shared_ptr<const GridField> data);
  static FieldSpec derived(int d, std::string name, std::function<void(std::span<const double>, std::span<double>)> fn,
                           std::vector<Point> singular_points = {});

  int dimension() const noexcept { return d_; }
  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const;
  const std::vector<Point>& singular_points() const noexcept { return singular_; }

  /// Writes b(x) into out (size d).
  void eval(std::span<const double> x, std::span<double> out) const;
  std::vector<double> eval(std::span<const double> x) const;

  /// Field s * b.
  FieldSpec scaled(double s) const;

  /// True for the zero field of either explicit form (bounded_box with M=0,
  /// hardy with kappa=0).
  bool is_zero() const;

  /// The node-sampled payload for grid_sampled and mollified kinds.
  std::shared_ptr<const GridField> grid_data() const;

 private:
  FieldSpec(int d, Kind kind, std::vector<Point> singular);

  int d_ = 3;
  Kind kind_;
  std::vector<Point> singular_;
};

/// Distance below which a point counts as hitting a singular point.
inline constexpr double kSingularTolerance = 1e-12;

/// Evaluates `field` at each point; throws SingularPoint / DimensionMismatch.
std::vector<std::vector<double>> eval_coefficients(const FieldSpec& field, std::span<const Point> points);

/// |b| sampled on every node of `grid`; SingularOnGrid when a node hits a
/// singular point.
GridFunction sample_magnitude(const FieldSpec& field, const Grid& grid);

/// b sampled on every node (3 components per node).
GridField sample_field(const FieldSpec& field, const Grid& grid);

}  // namespace ssde::coefficients
