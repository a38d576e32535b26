#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ssde/grid.hpp"

namespace ssde {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct PowerIterationResult {
  double eigenvalue = 0.0;
  double residual = 0.0;  // ||A v - theta v|| / theta at exit
  int iterations = 0;
  bool converged = false;
};

/// Largest eigenvalue of a symmetric positive semidefinite map by power
/// iteration with Rayleigh quotients. Stops once the relative change of
/// the quotient drops below rel_tol.
PowerIterationResult power_iteration(std::size_t n, const LinearMap& apply, std::vector<double> start,
                                     double rel_tol, int max_iter);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Discrete L^q norm with quadrature weight h^3; q = kInf gives the sup norm.
double lq_norm(const Grid& grid, std::span<const double> f, double q);

/// L^q norm of a node-major vector field with `components` entries per
/// node, pointwise Euclidean magnitude.
double lq_norm_vector(const Grid& grid, std::span<const double> v, int components, double q);

/// Forward differences (u(x + h e_i) - u(x))/h with zero outside the box;
/// output is node-major with 3 components.
void forward_gradient(const Grid& grid, std::span<const double> u, std::span<double> grad);

/// Transpose of forward_gradient (a negative backward divergence).
void forward_gradient_transpose(const Grid& grid, std::span<const double> v, std::span<double> out);

double dot(std::span<const double> a, std::span<const double> b);
double l2(std::span<const double> a);
double max_abs(std::span<const double> a);

}  // namespace ssde
