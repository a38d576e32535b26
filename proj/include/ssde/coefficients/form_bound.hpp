#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "ssde/coefficients/field.hpp"
#include "ssde/grid.hpp"

namespace ssde::coefficients {

enum class ClassKind { F_delta, kato, weak_F_half };
enum class BoundMethod { analytic, grid_eigen, closed_bound };

std::string_view to_string(ClassKind k);
std::string_view to_string(BoundMethod m);
ClassKind parse_class_kind(std::string_view s);

struct GridMeta {
  double extent = 0.0;  // half-width L
  double spacing = 0.0;
  int nodes_per_axis = 0;
};

/// Relative bound delta paired with the lambda it was computed for.
struct FormBoundEstimate {
  double delta = 0.0;
  double lambda = 1.0;
  ClassKind class_kind = ClassKind::F_delta;
  BoundMethod method = BoundMethod::analytic;
  std::optional<GridMeta> grid;
  double residual = 0.0;
  int iterations = 0;
  /// The operator norm behind delta: sqrt(delta) for F_delta, delta for
  /// kato, sqrt(delta) for weak_F_half.
  double operator_norm = 0.0;
};

struct EigenOptions {
  double rel_tol = 1e-6;
  int max_iter = 10000;
};

/// Hardy's inequality bound for kappa x/|x|^2: delta = (2 kappa/(d-2))^2.
FormBoundEstimate analytic_hardy_delta(double kappa, int d, double lambda = 1.0);

/// Grid estimate of the relative bound of `field` in the requested class.
///
/// F_delta: top eigenvalue of |b| (lambda - Delta_h)^{-1} |b|.
/// kato: max column sum of |b| (lambda - Delta)^{-1/2}, continuous Bessel kernel
///   restricted to the nodes, self-cell integrated over the equal-volume ball.
/// weak_F_half: top eigenvalue of |b|^{1/2} (lambda - Delta_h)^{-1/2} |b|^{1/2}.
FormBoundEstimate estimate_form_bound(const FieldSpec& field, ClassKind kind, double lambda, const Grid& grid,
                                      const EigenOptions& opts = {});

/// Same estimate from node values of |b|.
FormBoundEstimate estimate_form_bound_sampled(std::span<const double> magnitude, ClassKind kind, double lambda,
                                              const Grid& grid, const EigenOptions& opts = {});

/// F_delta bound of a sum: sqrt(delta) = sum_i sqrt(delta_i).
FormBoundEstimate combine_fields(std::span<const FormBoundEstimate> estimates);

/// Kernel of (lambda - Delta)^{-1/2} on R^3 at radius r > 0.
double bessel_potential_kernel(double lambda, double r);

/// Integral of that kernel over the ball of radius R about the origin.
double bessel_potential_ball_mass(double lambda, double R);

}  // namespace ssde::coefficients
