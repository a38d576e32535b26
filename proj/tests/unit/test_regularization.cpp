#include <cmath>

#include <Eigen/Eigenvalues>

#include "ssde/coefficients/form_bound.hpp"
#include "ssde/numerics.hpp"
#include "ssde/regularization/regularization.hpp"
#include "test_util.hpp"

namespace ssde::regularization {
namespace {

using coefficients::DispersionSpec;
using coefficients::FieldSpec;

double norm3(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

TEST(Cutoff, Examples) {
  EXPECT_EQ(cutoff_eta(5, 3.0), 1.0);
  EXPECT_DOUBLE_EQ(cutoff_eta(5, 5.5), 0.5);
  EXPECT_EQ(cutoff_eta(5, 7.0), 0.0);
  EXPECT_EQ(cutoff_eta(5, 5.0), 1.0);
  EXPECT_EQ(cutoff_eta(5, 6.0), 0.0);
  const std::vector<coefficients::Point> pts{{3.0, 0.0, 0.0}, {0.0, 4.4, 3.3}, {7.0, 0.0, 0.0}};
  const auto v = cutoff_eta(5, pts);
  EXPECT_EQ(v[0], 1.0);
  EXPECT_NEAR(v[1], 0.5, 1e-12);
  EXPECT_EQ(v[2], 0.0);
}

TEST(Schedule, EpsDecreasing) {
  double prev = kInf;
  for (int n = 1; n <= 64; ++n) {
    const auto s = make_schedule(n);
    EXPECT_LT(s.eps, prev);
    EXPECT_DOUBLE_EQ(s.eps, 1.0 / (n * n));
    EXPECT_DOUBLE_EQ(s.kernel_std(), std::sqrt(2.0 * s.eps));
    EXPECT_DOUBLE_EQ(s.kernel_radius(), 6.0 * s.kernel_std());
    prev = s.eps;
  }
  EXPECT_DOUBLE_EQ(make_schedule(4, EpsRule::inverse_cube).eps, 1.0 / 64.0);
}

TEST(Mollify, ConstantFieldReproducedInside) {
  const auto s = make_schedule(4);
  const Grid g(16, 2.0);
  const auto bn = mollify_field(FieldSpec::constant({0.5, -1.0, 2.0}), s, g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.point(p);
    if (norm3(x) > s.n - s.kernel_radius()) continue;
    const auto v = bn.eval(x);
    EXPECT_NEAR(v[0], 0.5, 1e-8);
    EXPECT_NEAR(v[1], -1.0, 1e-8);
    EXPECT_NEAR(v[2], 2.0, 1e-8);
  }
}

TEST(Mollify, IdentityMatrixUnchanged) {
  const Grid g(8, 1.0);
  const auto an = mollify_dispersion(DispersionSpec::identity(3), make_schedule(4), g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto a = an.a(g.point(p));
    for (int i = 0; i < 9; ++i) EXPECT_EQ(a[i], i % 4 == 0 ? 1.0 : 0.0);
  }
}

TEST(Mollify, DriftCapPreserved) {
  for (int n : {4, 8}) {
    const auto s = make_schedule(n);
    const Grid g = Grid::with_max_spacing(1.0, std::sqrt(s.eps));
    const auto bn = mollify_field(FieldSpec::hardy(3, 1.0), s, g);
    const auto mag = coefficients::sample_magnitude(bn, g);
    for (double v : mag) EXPECT_LE(v, n + 1e-8);
  }
}

TEST(Mollify, MatrixFloor) {
  const Grid g(24, 1.0);
  for (auto target : {MatrixTarget::a, MatrixTarget::sigma}) {
    const auto an = mollify_dispersion(DispersionSpec::radial_projection(3, 0.3), make_schedule(8), g, target);
    for (std::size_t p = 0; p < g.size(); ++p) {
      EXPECT_GE(coefficients::min_eigenvalue(an.a(g.point(p)), 3), 1.0 - 1e-12);
    }
  }
}

TEST(Mollify, UnderResolvedGrid) {
  EXPECT_ERROR(mollify_field(FieldSpec::hardy(3, 0.25), make_schedule(16), Grid(8, 1.0)), UnderResolved);
}

TEST(Mollify, ConvergesAwayFromSingularity) {
  const Grid g(64, 1.0);
  const auto b = FieldSpec::hardy(3, 0.25);
  double prev = kInf;
  for (int n : {4, 8, 16}) {
    const auto bn = mollify_field(b, make_schedule(n), g);
    double err = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Vec3 x = g.point(p);
      if (norm3(x) < 0.5) continue;
      const auto u = bn.eval(x), v = b.eval(x);
      for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(u[i] - v[i]));
    }
    EXPECT_LT(err, prev) << "n=" << n;
    prev = err;
  }
}

TEST(Mollify, SecondDifferencesBoundedByHeatScale) {
  // |D^2 b_n| <= C |b_n|_inf / eps_n for the heat kernel; C = 1 is generous
  for (int n : {4, 8}) {
    const auto s = make_schedule(n);
    const Grid g(32, 1.0);
    const auto bn = mollify_field(FieldSpec::hardy(3, 0.25), s, g);
    const auto data = bn.grid_data();
    const double h = g.spacing();
    double cap = 0.0, d2 = 0.0;
    for (double v : data->values) cap = std::max(cap, std::abs(v));
    const int m = g.nodes_per_axis();
    for (int i = 1; i + 1 < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int c = 0; c < 3; ++c) {
            auto at = [&](int ii) { return data->values[g.index(ii, j, k) * 3 + c]; };
            d2 = std::max(d2, std::abs(at(i + 1) - 2 * at(i) + at(i - 1)) / (h * h));
          }
    EXPECT_LE(d2, cap / s.eps) << "n=" << n;
  }
}

TEST(GaussianSmooth, PreservesConstantsAwayFromEdges) {
  const Grid g(20, 1.0);
  const int pad = 4;
  const Grid padded = g.padded(pad);
  std::vector<double> v(padded.size(), 3.0);
  const auto out = gaussian_smooth_cropped(padded, v, 1, 1.3 * g.spacing(), pad);
  ASSERT_EQ(out.size(), g.size());
  for (double x : out) EXPECT_NEAR(x, 3.0, 1e-12);
}

TEST(Preservation, ZeroField) {
  const std::vector<int> ns{4, 8};
  const auto t = verify_bound_preservation(FieldSpec::zero(3), ns, 1.0, Grid(16, 1.0));
  EXPECT_EQ(t.delta_base, 0.0);
  for (const auto& r : t.rows) {
    EXPECT_EQ(r.delta_n, 0.0);
    EXPECT_EQ(r.ratio, 0.0);
  }
}

TEST(Preservation, BoundedFieldBelowCap) {
  const double M = 0.8, lambda = 1.0;
  const std::vector<int> ns{4, 8};
  const auto t =
      verify_bound_preservation(FieldSpec::bounded_box(3, M, {1.0, 1.0, 0.0}, 0.5), ns, lambda, Grid(32, 1.0));
  for (const auto& r : t.rows) EXPECT_LE(r.delta_n, M * M / lambda + 1e-9);
}

}  // namespace
}  // namespace ssde::regularization
