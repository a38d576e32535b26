#include "ssde/coefficients/form_bound.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "ssde/error.hpp"
#include "ssde/numerics.hpp"
#include "ssde/spectral.hpp"

namespace ssde::coefficients {

std::string_view to_string(ClassKind k) {
  switch (k) {
    case ClassKind::F_delta: return "F_delta";
    case ClassKind::kato: return "kato";
    case ClassKind::weak_F_half: return "weak_F_half";
  }
  return "?";
}

std::string_view to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::analytic: return "analytic";
    case BoundMethod::grid_eigen: return "grid_eigen";
    case BoundMethod::closed_bound: return "closed_bound";
  }
  return "?";
}

ClassKind parse_class_kind(std::string_view s) {
  if (s == "F_delta") return ClassKind::F_delta;
  if (s == "kato") return ClassKind::kato;
  if (s == "weak_F_half") return ClassKind::weak_F_half;
  throw Error(ErrorKind::InvalidArgument, "unknown class kind '" + std::string(s) + "'");
}

FormBoundEstimate analytic_hardy_delta(double kappa, int d, double lambda) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "Hardy bound needs d >= 3");
  if (!(kappa >= 0.0)) throw Error(ErrorKind::InvalidArgument, "kappa must be >= 0");
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be > 0");
  FormBoundEstimate e;
  const double s = 2.0 * kappa / (d - 2);
  e.delta = s * s;
  e.lambda = lambda;
  e.method = BoundMethod::analytic;
  e.operator_norm = s;
  return e;
}

double bessel_potential_kernel(double lambda, double r) {
  const double k = std::sqrt(lambda);
  return k * std::cyl_bessel_k(1.0, k * r) / (2.0 * std::numbers::pi * std::numbers::pi * r);
}

double bessel_potential_ball_mass(double lambda, double R) {
  // 4 pi r^2 G(r) = (2/pi) k r K_1(k r); substitute t = k r.
  static constexpr double nodes[] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                     0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                     0.9445750230732326, 0.9894009349916499};
  static constexpr double weights[] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                       0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                       0.0622535239386479, 0.0271524594117541};
  const double k = std::sqrt(lambda);
  const double T = k * R;
  // composite 16-point Gauss-Legendre over 32 panels
  const int panels = 32;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = T * p / panels, b = T * (p + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < 8; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double t = mid + sgn * half * nodes[i];
        acc += weights[i] * half * t * std::cyl_bessel_k(1.0, t);
      }
    }
  }
  return 2.0 / (std::numbers::pi * k) * acc;
}

namespace {

FormBoundEstimate eigen_estimate(std::span<const double> weight, const Grid& grid, const LinearMap& inner,
                                 const EigenOptions& opts) {
  const std::size_t n = grid.size();
  std::vector<double> tmp(n);
  LinearMap op = [&](std::span<const double> v, std::span<double> w) {
    for (std::size_t i = 0; i < n; ++i) tmp[i] = weight[i] * v[i];
    inner(tmp, w);
    for (std::size_t i = 0; i < n; ++i) w[i] *= weight[i];
  };
  std::vector<double> start(weight.begin(), weight.end());
  const auto res = power_iteration(n, op, std::move(start), opts.rel_tol, opts.max_iter);
  if (!res.converged) {
    throw Error(ErrorKind::NoConvergence, "power iteration did not reach tolerance in " +
                                              std::to_string(res.iterations) + " iterations");
  }
  FormBoundEstimate e;
  e.delta = std::max(0.0, res.eigenvalue);
  e.residual = res.residual;
  e.iterations = res.iterations;
  return e;
}

}  // namespace

FormBoundEstimate estimate_form_bound_sampled(std::span<const double> magnitude, ClassKind kind, double lambda,
                                              const Grid& grid, const EigenOptions& opts) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::InvalidArgument, "lambda must be > 0");
  if (magnitude.size() != grid.size()) throw Error(ErrorKind::DimensionMismatch, "magnitude size");
  FormBoundEstimate e;
  switch (kind) {
    case ClassKind::F_delta: {
      DirichletSpectrum spec(grid);
      e = eigen_estimate(magnitude, grid,
                         [&](std::span<const double> v, std::span<double> w) { spec.solve_shifted(lambda, v, w); },
                         opts);
      e.operator_norm = std::sqrt(e.delta);
      break;
    }
    case ClassKind::weak_F_half: {
      DirichletSpectrum spec(grid);
      std::vector<double> root(magnitude.size());
      for (std::size_t i = 0; i < root.size(); ++i) root[i] = std::sqrt(magnitude[i]);
      e = eigen_estimate(
          root, grid,
          [&](std::span<const double> v, std::span<double> w) { spec.apply_shifted_power(lambda, 0.5, v, w); }, opts);
      e.operator_norm = std::sqrt(e.delta);
      break;
    }
    case ClassKind::kato: {
      const double h = grid.spacing();
      const double vol = grid.cell_volume();
      const double self = bessel_potential_ball_mass(lambda, std::cbrt(3.0 / (4.0 * std::numbers::pi)) * h);
      std::vector<double> col(grid.size());
      convolve_aperiodic(
          grid, magnitude,
          [&](int i, int j, int k) {
            if (i == 0 && j == 0 && k == 0) return self;
            return bessel_potential_kernel(lambda, h * std::sqrt(double(i * i + j * j + k * k))) * vol;
          },
          col);
      e.delta = std::max(0.0, *std::max_element(col.begin(), col.end()));
      e.operator_norm = e.delta;
      break;
    }
  }
  e.lambda = lambda;
  e.class_kind = kind;
  e.method = BoundMethod::grid_eigen;
  e.grid = GridMeta{grid.half_width(), grid.spacing(), grid.nodes_per_axis()};
  return e;
}

FormBoundEstimate estimate_form_bound(const FieldSpec& field, ClassKind kind, double lambda, const Grid& grid,
                                      const EigenOptions& opts) {
  const auto mag = sample_magnitude(field, grid);
  return estimate_form_bound_sampled(mag, kind, lambda, grid, opts);
}

FormBoundEstimate combine_fields(std::span<const FormBoundEstimate> estimates) {
  if (estimates.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to combine");
  double root = 0.0;
  for (const auto& e : estimates) {
    if (e.class_kind != ClassKind::F_delta) throw Error(ErrorKind::MixedClasses, "combine needs F_delta inputs");
    if (e.lambda != estimates.front().lambda) throw Error(ErrorKind::MixedLambda, "combine needs a common lambda");
    if (e.delta < 0.0) throw Error(ErrorKind::NegativeBound, "negative delta");
    root += std::sqrt(e.delta);
  }
  FormBoundEstimate out;
  out.delta = root * root;
  out.lambda = estimates.front().lambda;
  out.class_kind = ClassKind::F_delta;
  out.method = BoundMethod::closed_bound;
  out.operator_norm = root;
  return out;
}

}  // namespace ssde::coefficients
