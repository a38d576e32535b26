#include "ssde/regularization/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "ssde/error.hpp"
#include "ssde/parallel.hpp"

namespace ssde::regularization {

using coefficients::DispersionSpec;
using coefficients::FieldSpec;

std::string_view to_string(EpsRule r) { return r == EpsRule::inverse_square ? "inverse_square" : "inverse_cube"; }

EpsRule parse_eps_rule(std::string_view s) {
  if (s == "inverse_square" || s == "n^-2") return EpsRule::inverse_square;
  if (s == "inverse_cube" || s == "n^-3") return EpsRule::inverse_cube;
  throw Error(ErrorKind::InvalidArgument, "unknown eps rule '" + std::string(s) + "'");
}

double MollificationSchedule::kernel_std() const { return std::sqrt(2.0 * eps); }
double MollificationSchedule::kernel_radius() const { return 6.0 * kernel_std(); }

MollificationSchedule make_schedule(int n, EpsRule rule) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "schedule index must be >= 1");
  MollificationSchedule s;
  s.n = n;
  s.rule = rule;
  s.eps = rule == EpsRule::inverse_square ? 1.0 / (double(n) * n) : 1.0 / (double(n) * n * n);
  return s;
}

double cutoff_eta(int n, double r) {
  if (r < n) return 1.0;
  if (r <= n + 1.0) return n + 1.0 - r;
  return 0.0;
}

std::vector<double> cutoff_eta(int n, std::span<const coefficients::Point> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& p : points) {
    double r2 = 0.0;
    for (double v : p) r2 += v * v;
    out.push_back(cutoff_eta(n, std::sqrt(r2)));
  }
  return out;
}

std::vector<double> gaussian_smooth_cropped(const Grid& padded, std::span<const double> values, int components,
                                            double std_dev, int pad) {
  const int P = padded.nodes_per_axis();
  const int m = P - 2 * pad;
  if (m <= 0) throw Error(ErrorKind::InvalidArgument, "padding exceeds the grid");
  const double h = padded.spacing();
  std::vector<double> w(2 * pad + 1);
  double total = 0.0;
  for (int k = -pad; k <= pad; ++k) {
    const double x = k * h / std_dev;
    w[k + pad] = std::exp(-0.5 * x * x);
    total += w[k + pad];
  }
  for (double& v : w) v /= total;

  const int C = components;
  // pass along axis 0: [P][P][P] -> [m][P][P]
  std::vector<double> s1(static_cast<std::size_t>(m) * P * P * C, 0.0);
  parallel_for(0, m, [&](std::size_t io) {
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k) {
        double* out = &s1[((io * P + j) * P + k) * C];
        for (int t = 0; t <= 2 * pad; ++t) {
          const std::size_t src = ((static_cast<std::size_t>(io + t) * P + j) * P + k) * C;
          for (int c = 0; c < C; ++c) out[c] += w[t] * values[src + c];
        }
      }
  });
  // axis 1: [m][P][P] -> [m][m][P]
  std::vector<double> s2(static_cast<std::size_t>(m) * m * P * C, 0.0);
  parallel_for(0, m, [&](std::size_t i) {
    for (int jo = 0; jo < m; ++jo)
      for (int k = 0; k < P; ++k) {
        double* out = &s2[((i * m + jo) * P + k) * C];
        for (int t = 0; t <= 2 * pad; ++t) {
          const std::size_t src = ((i * P + jo + t) * P + k) * C;
          for (int c = 0; c < C; ++c) out[c] += w[t] * s1[src + c];
        }
      }
  });
  // axis 2: [m][m][P] -> [m][m][m]
  std::vector<double> s3(static_cast<std::size_t>(m) * m * m * C, 0.0);
  parallel_for(0, m, [&](std::size_t i) {
    for (int j = 0; j < m; ++j)
      for (int ko = 0; ko < m; ++ko) {
        double* out = &s3[((i * m + j) * m + ko) * C];
        for (int t = 0; t <= 2 * pad; ++t) {
          const std::size_t src = ((i * m + j) * P + ko + t) * C;
          for (int c = 0; c < C; ++c) out[c] += w[t] * s2[src + c];
        }
      }
  });
  return s3;
}

namespace {

int kernel_nodes(const MollificationSchedule& s, const Grid& grid) {
  const double h = grid.spacing();
  if (h * h > s.eps * (1.0 + 1e-12)) {
    throw Error(ErrorKind::UnderResolved, "grid spacing h=" + std::to_string(h) + " does not resolve eps=" +
                                              std::to_string(s.eps) + " (need h^2 <= eps)");
  }
  return static_cast<int>(std::ceil(s.kernel_radius() / h));
}

void check_base_extent(const std::shared_ptr<const GridField>& data, const Grid& padded, int n) {
  if (!data) return;
  // the indicator vanishes beyond |x| = n, so the samples must reach min(n, padded box)
  const double needed = std::min(padded.half_width(), static_cast<double>(n));
  if (data->grid.half_width() + 1e-12 < needed) {
    throw Error(ErrorKind::ExtentTooSmall, "grid-sampled base covers [-" + std::to_string(data->grid.half_width()) +
                                               ", ...] but mollification needs " + std::to_string(needed));
  }
}

}  // namespace

FieldSpec mollify_field(const FieldSpec& base, const MollificationSchedule& schedule, const Grid& grid) {
  if (base.dimension() != 3) throw Error(ErrorKind::DimensionMismatch, "mollification is 3-D only");
  const int pad = kernel_nodes(schedule, grid);
  const Grid padded = grid.padded(pad);
  check_base_extent(base.grid_data(), padded, schedule.n);
  const double n = schedule.n;
  std::vector<double> truncated(padded.size() * 3, 0.0);
  parallel_for(0, padded.size(), [&](std::size_t p) {
    const Vec3 x = padded.point(p);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (r > n) return;
    std::array<double, 3> v;
    try {
      base.eval(x, v);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SingularPoint) return;
      throw;
    }
    if (std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) > n) return;
    std::copy(v.begin(), v.end(), truncated.begin() + 3 * p);
  });
  auto data = std::make_shared<GridField>(grid, 3);
  data->values = gaussian_smooth_cropped(padded, truncated, 3, schedule.kernel_std(), pad);
  return FieldSpec::mollified(base, schedule.n, schedule.eps, std::move(data));
}

DispersionSpec mollify_dispersion(const DispersionSpec& base, const MollificationSchedule& schedule, const Grid& grid,
                                  MatrixTarget target) {
  if (base.dimension() != 3) throw Error(ErrorKind::DimensionMismatch, "mollification is 3-D only");
  const int pad = kernel_nodes(schedule, grid);
  const Grid padded = grid.padded(pad);
  if (const auto* g = std::get_if<DispersionSpec::GridSampled>(&base.kind())) {
    check_base_extent(g->a, padded, schedule.n + 1);
  }
  std::vector<double> dev(padded.size() * 9, 0.0);
  parallel_for(0, padded.size(), [&](std::size_t p) {
    const Vec3 x = padded.point(p);
    const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double eta = cutoff_eta(schedule.n, r);
    if (eta == 0.0) return;
    std::array<double, 9> M;
    try {
      if (target == MatrixTarget::a) {
        base.a(x, M);
      } else {
        base.sigma(x, M);
      }
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SingularPoint) throw Error(ErrorKind::SingularOnGrid, "matrix singular on a node");
      throw;
    }
    for (int i = 0; i < 3; ++i) M[i * 3 + i] -= 1.0;
    for (int c = 0; c < 9; ++c) dev[9 * p + c] = eta * M[c];
  });
  GridField out(grid, 9);
  out.values = gaussian_smooth_cropped(padded, dev, 9, schedule.kernel_std(), pad);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    auto M = out.node(p);
    for (int i = 0; i < 3; ++i) M[i * 3 + i] += 1.0;
    // restore exact symmetry lost to rounding
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        const double s = 0.5 * (M[i * 3 + j] + M[j * 3 + i]);
        M[i * 3 + j] = M[j * 3 + i] = s;
      }
  }
  const std::string source = "mollified n=" + std::to_string(schedule.n);
  return target == MatrixTarget::a ? DispersionSpec::grid_sampled_a(std::move(out), source)
                                   : DispersionSpec::grid_sampled_sigma(std::move(out), source);
}

PreservationTable verify_bound_preservation(const FieldSpec& base, std::span<const int> n_list, double lambda,
                                            const Grid& grid, EpsRule rule) {
  PreservationTable t;
  t.lambda = lambda;
  t.delta_base = coefficients::estimate_form_bound(base, coefficients::ClassKind::F_delta, lambda, grid).delta;
  for (int n : n_list) {
    const auto sched = make_schedule(n, rule);
    const auto bn = mollify_field(base, sched, grid);
    const auto e = coefficients::estimate_form_bound(bn, coefficients::ClassKind::F_delta, lambda, grid);
    PreservationRow row;
    row.n = n;
    row.eps = sched.eps;
    row.delta_n = e.delta;
    row.residual = e.residual;
    row.ratio = t.delta_base > 0.0 ? e.delta / t.delta_base : 0.0;
    t.rows.push_back(row);
  }
  return t;
}

nlohmann::json to_json(const PreservationTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"n", r.n}, {"eps", r.eps}, {"delta_n", r.delta_n}, {"ratio", r.ratio}, {"residual", r.residual}});
  }
  return {{"delta_base", t.delta_base}, {"lambda", t.lambda}, {"rows", rows}};
}

nlohmann::json to_json(const MollificationSchedule& s) {
  return {{"n", s.n}, {"eps", s.eps}, {"eps_rule", std::string(to_string(s.rule))}};
}

}  // namespace ssde::regularization
