#include "ssde/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "ssde/error.hpp"

namespace ssde {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

PowerIterationResult power_iteration(std::size_t n, const LinearMap& apply, std::vector<double> start,
                                     double rel_tol, int max_iter) {
  PowerIterationResult result;
  if (start.size() != n) throw Error(ErrorKind::DimensionMismatch, "power iteration start vector");
  double norm = l2(start);
  if (norm == 0.0) {
    start.assign(n, 1.0);
    norm = l2(start);
  }
  for (double& x : start) x /= norm;
  std::vector<double> v = std::move(start), w(n);
  double theta_prev = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    apply(v, w);
    const double theta = dot(v, w);
    result.iterations = it;
    result.eigenvalue = theta;
    const double wn = l2(w);
    if (wn == 0.0) {
      result.eigenvalue = 0.0;
      result.residual = 0.0;
      result.converged = true;
      return result;
    }
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = w[i] - theta * v[i];
      r2 += d * d;
    }
    result.residual = theta > 0.0 ? std::sqrt(r2) / theta : 0.0;
    if (it > 1 && std::abs(theta - theta_prev) <= rel_tol * std::abs(theta)) {
      result.converged = true;
      return result;
    }
    theta_prev = theta;
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / wn;
  }
  return result;
}

double lq_norm(const Grid& grid, std::span<const double> f, double q) {
  if (std::isinf(q)) return max_abs(f);
  double s = 0.0;
  for (double x : f) s += std::pow(std::abs(x), q);
  return std::pow(s * grid.cell_volume(), 1.0 / q);
}

double lq_norm_vector(const Grid& grid, std::span<const double> v, int components, double q) {
  const std::size_t n = v.size() / components;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m2 = 0.0;
    for (int c = 0; c < components; ++c) m2 += v[i * components + c] * v[i * components + c];
    const double mag = std::sqrt(m2);
    if (std::isinf(q)) {
      s = std::max(s, mag);
    } else {
      s += std::pow(mag, q);
    }
  }
  if (std::isinf(q)) return s;
  return std::pow(s * grid.cell_volume(), 1.0 / q);
}

void forward_gradient(const Grid& grid, std::span<const double> u, std::span<double> grad) {
  const int m = grid.nodes_per_axis();
  const double inv_h = 1.0 / grid.spacing();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const std::size_t p = grid.index(i, j, k);
        const double u0 = u[p];
        grad[3 * p + 0] = ((i + 1 < m ? u[grid.index(i + 1, j, k)] : 0.0) - u0) * inv_h;
        grad[3 * p + 1] = ((j + 1 < m ? u[grid.index(i, j + 1, k)] : 0.0) - u0) * inv_h;
        grad[3 * p + 2] = ((k + 1 < m ? u[grid.index(i, j, k + 1)] : 0.0) - u0) * inv_h;
      }
}

void forward_gradient_transpose(const Grid& grid, std::span<const double> v, std::span<double> out) {
  const int m = grid.nodes_per_axis();
  const double inv_h = 1.0 / grid.spacing();
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const std::size_t p = grid.index(i, j, k);
        const double vx = v[3 * p] * inv_h, vy = v[3 * p + 1] * inv_h, vz = v[3 * p + 2] * inv_h;
        out[p] -= vx + vy + vz;
        if (i + 1 < m) out[grid.index(i + 1, j, k)] += vx;
        if (j + 1 < m) out[grid.index(i, j + 1, k)] += vy;
        if (k + 1 < m) out[grid.index(i, j, k + 1)] += vz;
      }
}

}  // namespace ssde
