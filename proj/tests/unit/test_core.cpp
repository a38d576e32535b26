#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "ssde/grid.hpp"
#include "ssde/numerics.hpp"
#include "ssde/parallel.hpp"
#include "ssde/spectral.hpp"
#include "test_util.hpp"

namespace ssde {
namespace {

TEST(Grid, CellCentredAndStaggered) {
  const Grid g(8, 1.0);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.25);
  EXPECT_DOUBLE_EQ(g.coordinate(0), -0.875);
  EXPECT_DOUBLE_EQ(g.coordinate(7), 0.875);
  EXPECT_TRUE(g.staggered());
  EXPECT_DOUBLE_EQ(g.nodes_per_axis() * g.spacing(), 2.0 * g.half_width());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto [i, j, k] = g.unflatten(p);
    EXPECT_EQ(g.index(i, j, k), p);
    const Vec3 x = g.point(p);
    EXPECT_GT(x[0] * x[0] + x[1] * x[1] + x[2] * x[2], 0.0);
  }
}

TEST(Grid, WithMaxSpacing) {
  const Grid g = Grid::with_max_spacing(2.5, 0.1);
  EXPECT_LE(g.spacing(), 0.1);
  EXPECT_EQ(g.nodes_per_axis() % 2, 0);
  EXPECT_DOUBLE_EQ(g.half_width(), 2.5);
}

TEST(Grid, InterpolationReproducesLinearFunctions) {
  const Grid g(10, 1.0);
  GridFunction f(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.point(p);
    f[p] = 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2];
  }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.85, 0.85);
  for (int t = 0; t < 50; ++t) {
    const Vec3 x{u(rng), u(rng), u(rng)};
    EXPECT_NEAR(interpolate(g, f, x), 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2], 1e-12);
  }
}

TEST(Grid, BinaryRoundTrip) {
  const Grid g(6, 1.5);
  GridField field(g, 3);
  for (std::size_t i = 0; i < field.values.size(); ++i) field.values[i] = std::sin(0.1 * i) * 1e3;
  const auto path = std::filesystem::temp_directory_path() / "ssde_grid_roundtrip.grid";
  write_grid_field(path, field);
  const GridField back = read_grid_field(path);
  EXPECT_TRUE(back.grid.same_as(g));
  EXPECT_EQ(back.components, 3);
  EXPECT_EQ(back.values, field.values);
  std::filesystem::remove(path);
}

TEST(Grid, ReadRejectsMissingFile) {
  EXPECT_ERROR(read_grid_field("/nonexistent/ssde.grid"), IoError);
}

// Sine-mode eigenvector of -Delta_h on the Dirichlet box.
GridFunction sine_mode(const Grid& g, int a, int b, int c, double& eigenvalue) {
  const int m = g.nodes_per_axis();
  const double h = g.spacing();
  auto lam = [&](int k) { return (2.0 - 2.0 * std::cos(std::numbers::pi * k / (m + 1))) / (h * h); };
  eigenvalue = lam(a) + lam(b) + lam(c);
  GridFunction f(g.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        f[g.index(i, j, k)] = std::sin(std::numbers::pi * a * (i + 1) / (m + 1)) *
                              std::sin(std::numbers::pi * b * (j + 1) / (m + 1)) *
                              std::sin(std::numbers::pi * c * (k + 1) / (m + 1));
  return f;
}

TEST(Spectral, SineModesAreEigenvectors) {
  const Grid g(12, 1.0);
  double lam = 0.0;
  const auto f = sine_mode(g, 2, 3, 1, lam);
  GridFunction y(g.size());
  apply_negative_laplacian(g, f, y);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(y[p], lam * f[p], 1e-9 * lam);
}

TEST(Spectral, ShiftedPowerMatchesEigenvalue) {
  const Grid g(12, 1.0);
  DirichletSpectrum spec(g);
  double lam = 0.0;
  const auto f = sine_mode(g, 1, 4, 2, lam);
  GridFunction u(g.size());
  spec.apply_shifted_power(3.0, 0.5, f, u);
  const double factor = std::pow(3.0 + lam, -0.5);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(u[p], factor * f[p], 1e-12);
}

TEST(Spectral, SolveShiftedInvertsLaplacian) {
  const Grid g(10, 2.0);
  DirichletSpectrum spec(g);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n01;
  GridFunction f(g.size()), u(g.size()), y(g.size());
  for (double& v : f) v = n01(rng);
  spec.solve_shifted(2.0, f, u);
  apply_negative_laplacian(g, u, y);
  for (std::size_t p = 0; p < g.size(); ++p) EXPECT_NEAR(2.0 * u[p] + y[p], f[p], 1e-10);
}

TEST(Spectral, AperiodicConvolutionMatchesDirectSum) {
  const Grid g(6, 1.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n01;
  GridFunction f(g.size()), out(g.size());
  for (double& v : f) v = n01(rng);
  auto kernel = [](int a, int b, int c) { return 1.0 / (1.0 + a * a + 2 * b * b + 3 * c * c); };
  convolve_aperiodic(g, f, kernel, out);
  const int m = g.nodes_per_axis();
  for (std::size_t p = 0; p < g.size(); p += 7) {
    const auto [i, j, k] = g.unflatten(p);
    double s = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        for (int c = 0; c < m; ++c) s += kernel(i - a, j - b, k - c) * f[g.index(a, b, c)];
    EXPECT_NEAR(out[p], s, 1e-10);
  }
}

TEST(Numerics, PowerIterationDiagonal) {
  const std::vector<double> d{1.0, 5.0, 2.0, 4.9};
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < d.size(); ++i) y[i] = d[i] * x[i];
  };
  const auto r = power_iteration(d.size(), apply, std::vector<double>(d.size(), 1.0), 1e-12, 100000);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.eigenvalue, 5.0, 1e-6);
}

TEST(Numerics, Norms) {
  const Grid g(4, 1.0);  // h = 0.5, h^3 = 0.125
  GridFunction f(g.size(), 2.0);
  EXPECT_NEAR(lq_norm(g, f, 2.0), std::sqrt(64 * 4.0 * 0.125), 1e-12);
  EXPECT_NEAR(lq_norm(g, f, kInf), 2.0, 0.0);
  std::vector<double> v(3 * g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    v[3 * p] = 3.0;
    v[3 * p + 1] = 4.0;
  }
  EXPECT_NEAR(lq_norm_vector(g, v, 3, 1.0), 5.0 * 64 * 0.125, 1e-12);
}

TEST(Numerics, GradientTransposeIsAdjoint) {
  const Grid g(7, 1.0);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  GridFunction u(g.size()), out(g.size());
  std::vector<double> v(3 * g.size()), grad(3 * g.size());
  for (double& x : u) x = n01(rng);
  for (double& x : v) x = n01(rng);
  forward_gradient(g, u, grad);
  forward_gradient_transpose(g, v, out);
  EXPECT_NEAR(dot(grad, v), dot(u, out), 1e-9 * l2(grad) * l2(v));
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(0, hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_GE(worker_count(), 1);
}

}  // namespace
}  // namespace ssde
