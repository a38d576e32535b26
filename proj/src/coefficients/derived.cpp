#include "ssde/coefficients/derived.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "ssde/error.hpp"
#include "ssde/parallel.hpp"

namespace ssde::coefficients {

DerivMode parse_deriv_mode(std::string_view s) {
  if (s == "analytic") return DerivMode::analytic;
  if (s == "finite_difference") return DerivMode::finite_difference;
  throw Error(ErrorKind::InvalidArgument, "unknown derivative mode '" + std::string(s) + "'");
}

std::string_view to_string(DerivMode m) {
  return m == DerivMode::analytic ? "analytic" : "finite_difference";
}

namespace {

int sign_of(double v) { return v < 0 ? -1 : 1; }

// Divergence of the raw (unnormalized) matrix, scaled by `scale`.
FieldSpec raw_divergence(const DispersionSpec& disp, double scale) {
  const int d = disp.dimension();
  if (std::holds_alternative<DispersionSpec::Identity>(disp.kind())) return FieldSpec::zero(d);
  if (const auto* r = std::get_if<DispersionSpec::RadialProjection>(&disp.kind())) {
    if (r->c == 0.0) return FieldSpec::zero(d);
    return FieldSpec::hardy(d, std::abs(r->c) * (d - 1) * scale, sign_of(r->c));
  }
  if (const auto* s = std::get_if<DispersionSpec::SineLog>(&disp.kind())) {
    if (s->c == 0.0) return FieldSpec::zero(d);
    const double c = s->c * scale;
    const auto e = s->e;
    return FieldSpec::derived(
        d, "div_sine_log",
        [c, e, d](std::span<const double> x, std::span<double> out) {
          double r2 = 0.0, ex = 0.0;
          for (int i = 0; i < d; ++i) {
            r2 += x[i] * x[i];
            ex += e[i] * x[i];
          }
          const double f = c * std::sin(std::log(r2)) * ex / r2;
          for (int i = 0; i < d; ++i) out[i] = f * e[i];
        },
        disp.singular_points());
  }
  if (const auto* s = std::get_if<DispersionSpec::Sum>(&disp.kind())) {
    std::vector<FieldSpec> parts;
    for (const auto& c : s->children) parts.push_back(raw_divergence(c, scale));
    return FieldSpec::sum(std::move(parts));
  }
  throw Error(ErrorKind::UnsupportedAnalytic, "no closed-form divergence for " + disp.kind_name());
}

template <class NodeFn>
FieldSpec sample_on_grid(const DispersionSpec& disp, const Grid* grid, const std::string& name, NodeFn fn) {
  if (!grid) throw Error(ErrorKind::InvalidArgument, "finite_difference mode needs a grid");
  if (disp.dimension() != 3) throw Error(ErrorKind::DimensionMismatch, "grid differencing is 3-D only");
  auto out = std::make_shared<GridField>(*grid, 3);
  parallel_for(0, grid->size(), [&](std::size_t p) {
    try {
      fn(grid->point(p), out->node(p));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SingularPoint) {
        throw Error(ErrorKind::SingularOnGrid, name + ": stencil touches a singular point");
      }
      throw;
    }
  });
  return FieldSpec::grid_sampled(out, name);
}

}  // namespace

FieldSpec divergence_of_a(const DispersionSpec& disp, DerivMode mode, const Grid* grid) {
  if (mode == DerivMode::analytic) return raw_divergence(disp, 1.0 / disp.normalization());
  const double h = grid ? grid->spacing() : 0.0;
  return sample_on_grid(disp, grid, "div_a_fd", [&](const Vec3& x, std::span<double> out) {
    std::array<double, 9> ap, am;
    out[0] = out[1] = out[2] = 0.0;
    for (int i = 0; i < 3; ++i) {
      Vec3 xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      disp.a(xp, ap);
      disp.a(xm, am);
      for (int k = 0; k < 3; ++k) out[k] += (ap[i * 3 + k] - am[i * 3 + k]) / (2.0 * h);
    }
  });
}

FieldSpec stratonovich_correction_field(const DispersionSpec& disp, DerivMode mode, const Grid* grid) {
  const int d = disp.dimension();
  const double inv_nu = 1.0 / disp.normalization();
  if (mode == DerivMode::analytic) {
    if (std::holds_alternative<DispersionSpec::Identity>(disp.kind())) return FieldSpec::zero(d);
    if (const auto* r = std::get_if<DispersionSpec::RadialProjection>(&disp.kind())) {
      // only the d_j sigma_ij term survives: x_r d_r (x_i x_j/|x|^2) = 0
      const double s = std::sqrt(1.0 + r->c) - 1.0;
      if (s == 0.0) return FieldSpec::zero(d);
      return FieldSpec::hardy(d, std::abs(s) * (d - 1) * inv_nu / std::numbers::sqrt2, sign_of(s));
    }
    if (const auto* sl = std::get_if<DispersionSpec::SineLog>(&disp.kind())) {
      if (sl->c == 0.0) return FieldSpec::zero(d);
      // (1+g) grad g = (c/2) sin(2 log r) x/r^2 with sigma = I + g e e^T
      const double c = 0.5 * sl->c * inv_nu / std::numbers::sqrt2;
      const auto e = sl->e;
      return FieldSpec::derived(
          d, "strat_sine_log",
          [c, e, d](std::span<const double> x, std::span<double> out) {
            double r2 = 0.0, ex = 0.0;
            for (int i = 0; i < d; ++i) {
              r2 += x[i] * x[i];
              ex += e[i] * x[i];
            }
            const double f = c * std::sin(std::log(r2)) * ex / r2;
            for (int i = 0; i < d; ++i) out[i] = f * e[i];
          },
          disp.singular_points());
    }
    throw Error(ErrorKind::UnsupportedAnalytic, "no closed-form correction for " + disp.kind_name());
  }
  const double h = grid ? grid->spacing() : 0.0;
  return sample_on_grid(disp, grid, "strat_fd", [&](const Vec3& x, std::span<double> out) {
    std::array<double, 9> s0, sp, sm;
    disp.sigma(x, s0);
    out[0] = out[1] = out[2] = 0.0;
    for (int r = 0; r < 3; ++r) {
      Vec3 xp = x, xm = x;
      xp[r] += h;
      xm[r] -= h;
      disp.sigma(xp, sp);
      disp.sigma(xm, sm);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i] += (sp[i * 3 + j] - sm[i * 3 + j]) / (2.0 * h) * s0[r * 3 + j];
    }
    for (int i = 0; i < 3; ++i) out[i] /= std::numbers::sqrt2;
  });
}

namespace {

// sup |d_r (u u_l)| * |x| with u = x/|x|: 1 off the diagonal, 5/4 on it.
double projection_gradient_sup(int r, int l) { return r == l ? 1.25 : 1.0; }

GradientMajorants raw_majorants(const DispersionSpec& disp) {
  const int d = disp.dimension();
  GradientMajorants m;
  m.a_grad.assign(d * d, 0.0);
  if (std::holds_alternative<DispersionSpec::Identity>(disp.kind())) {
    m.sigma_grad = Matrix(d * d, 0.0);
    return m;
  }
  if (const auto* r = std::get_if<DispersionSpec::RadialProjection>(&disp.kind())) {
    const double s = std::sqrt(1.0 + r->c) - 1.0;
    Matrix sg(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        m.a_grad[i * d + j] = std::abs(r->c) * projection_gradient_sup(i, j);
        sg[i * d + j] = std::abs(s) * projection_gradient_sup(i, j);
      }
    m.sigma_grad = sg;
    return m;
  }
  if (const auto* s = std::get_if<DispersionSpec::SineLog>(&disp.kind())) {
    const double wmin = std::sqrt(std::min(1.0, 1.0 + s->c));
    Matrix sg(d * d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        m.a_grad[i * d + j] = std::abs(s->c) * std::abs(s->e[j]);
        sg[i * d + j] = std::abs(s->c) * std::abs(s->e[j]) / (2.0 * wmin);
      }
    m.sigma_grad = sg;
    return m;
  }
  if (const auto* s = std::get_if<DispersionSpec::Sum>(&disp.kind())) {
    for (const auto& c : s->children) {
      const auto cm = raw_majorants(c);
      for (int i = 0; i < d * d; ++i) m.a_grad[i] += cm.a_grad[i];
    }
    return m;
  }
  throw Error(ErrorKind::UnsupportedAnalytic, "no gradient majorants for " + disp.kind_name());
}

}  // namespace

GradientMajorants gradient_majorants(const DispersionSpec& disp) {
  auto m = raw_majorants(disp);
  const double nu = disp.normalization();
  for (double& v : m.a_grad) v /= nu;
  if (m.sigma_grad)
    for (double& v : *m.sigma_grad) v /= std::sqrt(nu);
  return m;
}

Matrix hardy_bounds_from_majorants(const Matrix& c, int d) {
  Matrix out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double s = 2.0 * c[i] / (d - 2);
    out[i] = s * s;
  }
  return out;
}

}  // namespace ssde::coefficients
