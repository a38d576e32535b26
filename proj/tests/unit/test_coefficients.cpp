#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "ssde/coefficients/derived.hpp"
#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"
#include "ssde/coefficients/form_bound.hpp"
#include "ssde/coefficients/serialize.hpp"
#include "ssde/numerics.hpp"
#include "test_util.hpp"

namespace ssde::coefficients {
namespace {

std::vector<double> eigenvalues(const Matrix& a) {
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i * 3 + j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  return {es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
}

TEST(Field, HardyValue) {
  const auto b = FieldSpec::hardy(3, 0.25);
  const auto v = b.eval(Point{1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(v[0], 0.25);
  EXPECT_DOUBLE_EQ(v[1], 0.0);
  EXPECT_DOUBLE_EQ(v[2], 0.0);
  const auto w = b.eval(Point{0.0, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(w[1], 0.125);
  const auto s = FieldSpec::hardy(3, 0.25, -1).eval(Point{1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(s[0], -0.25);
}

TEST(Field, SingularPointIsReported) {
  const auto b = FieldSpec::hardy(3, 0.25);
  EXPECT_ERROR(b.eval(Point{0.0, 0.0, 0.0}), SingularPoint);
  const auto sum = FieldSpec::sum({b, FieldSpec::constant({1.0, 0.0, 0.0})});
  EXPECT_EQ(sum.singular_points().size(), 1u);
  EXPECT_ERROR(sum.eval(Point{0.0, 0.0, 0.0}), SingularPoint);
}

TEST(Field, Validation) {
  EXPECT_ERROR(FieldSpec::hardy(2, 0.1), InvalidDimension);
  EXPECT_ERROR(FieldSpec::hardy(3, -0.1), InvalidArgument);
  EXPECT_ERROR(FieldSpec::hardy(3, 0.1).eval(Point{1.0, 0.0}), DimensionMismatch);
  const std::vector<Point> pts{{1.0, 1.0, 1.0}, {0.0, 0.0, 0.0}};
  EXPECT_ERROR(eval_coefficients(FieldSpec::hardy(3, 0.1), pts), SingularPoint);
}

TEST(Field, BoundedBoxAndSum) {
  const auto box = FieldSpec::bounded_box(3, 2.0, {0.0, 3.0, 4.0}, 1.0);
  const auto in = box.eval(Point{0.5, 0.5, 0.5});
  EXPECT_NEAR(in[1], 1.2, 1e-15);
  EXPECT_NEAR(in[2], 1.6, 1e-15);
  const auto out = box.eval(Point{1.5, 0.0, 0.0});
  EXPECT_EQ(out[1], 0.0);
  const auto sum = FieldSpec::sum({FieldSpec::hardy(3, 1.0), FieldSpec::constant({1.0, 2.0, 3.0})});
  const auto v = sum.eval(Point{2.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(v[0], 1.5);
  EXPECT_DOUBLE_EQ(v[2], 3.0);
  EXPECT_TRUE(FieldSpec::hardy(3, 0.0).is_zero());
  EXPECT_TRUE(FieldSpec::zero(3).is_zero());
}

TEST(Dispersion, IdentityAndRadialSpectrum) {
  const auto id = DispersionSpec::identity(3);
  const auto a0 = id.a(Point{0.3, -0.2, 0.7});
  const auto s0 = id.sigma(Point{0.3, -0.2, 0.7});
  for (int i = 0; i < 9; ++i) {
    EXPECT_EQ(a0[i], i % 4 == 0 ? 1.0 : 0.0);
    EXPECT_EQ(s0[i], i % 4 == 0 ? 1.0 : 0.0);
  }
  const auto rp = DispersionSpec::radial_projection(3, 1.0);
  const auto a = rp.a(Point{1.0, 0.0, 0.0});
  EXPECT_NEAR(a[0], 2.0, 1e-15);
  const auto ev = eigenvalues(a);
  EXPECT_NEAR(ev[0], 1.0, 1e-12);
  EXPECT_NEAR(ev[1], 1.0, 1e-12);
  EXPECT_NEAR(ev[2], 2.0, 1e-12);
  // sigma sigma^T reproduces a
  const auto s = rp.sigma(Point{0.3, 0.4, -1.2});
  const auto a2 = rp.a(Point{0.3, 0.4, -1.2});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double v = 0.0;
      for (int k = 0; k < 3; ++k) v += s[i * 3 + k] * s[j * 3 + k];
      EXPECT_NEAR(v, a2[i * 3 + j], 1e-12);
    }
}

TEST(Dispersion, Validation) {
  EXPECT_ERROR(DispersionSpec::radial_projection(3, -1.0), InvalidArgument);
  EXPECT_ERROR(DispersionSpec::sine_log(3, 0.1, {1.0, 1.0, 0.0}), InvalidArgument);
  EXPECT_ERROR(DispersionSpec::identity(2), InvalidDimension);
  EXPECT_ERROR(DispersionSpec::radial_projection(3, 0.1).a(Point{0.0, 0.0, 0.0}), SingularPoint);
}

TEST(Dispersion, NormalizationToUnitFloor) {
  const auto rp = DispersionSpec::radial_projection(3, -0.5);
  EXPECT_NEAR(rp.normalization(), 0.5, 1e-12);
  const auto ev = eigenvalues(rp.a(Point{0.0, 1.0, 1.0}));
  EXPECT_NEAR(ev[0], 1.0, 1e-12);
  EXPECT_NEAR(ev[2], 2.0, 1e-12);
}

TEST(Dispersion, PsdFloorOnRandomPoints) {
  const std::vector<DispersionSpec> specs{
      DispersionSpec::identity(3), DispersionSpec::radial_projection(3, 0.3),
      DispersionSpec::radial_projection(3, -0.7), DispersionSpec::sine_log(3, 0.4, {0.0, 0.6, 0.8}),
      DispersionSpec::sine_log(3, -0.3, {1.0, 0.0, 0.0}),
      DispersionSpec::sum({DispersionSpec::radial_projection(3, 0.2), DispersionSpec::sine_log(3, 0.1, {0, 0, 1})})};
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n01;
  for (const auto& s : specs)
    for (int t = 0; t < 200; ++t) {
      const Point x{n01(rng) * 3, n01(rng) * 3, n01(rng) * 3};
      const auto ev = eigenvalues(s.a(x));
      EXPECT_GE(ev[0], 1.0 - 1e-12) << s.kind_name();
      EXPECT_NEAR(s.a(x)[1], s.a(x)[3], 1e-14);
    }
}

TEST(Dispersion, Deviation) {
  EXPECT_NEAR(DispersionSpec::radial_projection(3, 0.3).a_deviation(), 0.3, 1e-12);
  EXPECT_NEAR(DispersionSpec::identity(3).a_deviation(), 0.0, 0.0);
}

TEST(FormBound, AnalyticHardy) {
  EXPECT_DOUBLE_EQ(analytic_hardy_delta(0.25, 3).delta, 0.25);
  EXPECT_DOUBLE_EQ(analytic_hardy_delta(0.0, 5).delta, 0.0);
  EXPECT_DOUBLE_EQ(analytic_hardy_delta(0.5, 4).delta, 0.25);
  const auto e = analytic_hardy_delta(0.25, 3, 7.0);
  EXPECT_EQ(e.method, BoundMethod::analytic);
  EXPECT_EQ(e.lambda, 7.0);
  EXPECT_EQ(e.residual, 0.0);
  EXPECT_ERROR(analytic_hardy_delta(0.25, 2), InvalidDimension);
}

TEST(FormBound, ZeroFieldGivesZeroInEveryClass) {
  const Grid g(12, 1.0);
  for (auto k : {ClassKind::F_delta, ClassKind::kato, ClassKind::weak_F_half}) {
    EXPECT_EQ(estimate_form_bound(FieldSpec::zero(3), k, 1.0, g).delta, 0.0);
  }
}

TEST(FormBound, BoundedFieldBelowCapOverLambda) {
  const Grid g(16, 1.0);
  const double M = 1.5, lambda = 2.0;
  const auto b = FieldSpec::bounded_box(3, M, {1.0, 0.0, 0.0}, 0.6);
  const auto e = estimate_form_bound(b, ClassKind::F_delta, lambda, g);
  EXPECT_LE(e.delta, M * M / lambda + 1e-9);
  EXPECT_GT(e.delta, 0.0);
  EXPECT_EQ(e.method, BoundMethod::grid_eigen);
  ASSERT_TRUE(e.grid.has_value());
  EXPECT_EQ(e.grid->nodes_per_axis, 16);
  // the Kato norm of a bounded field is at most M |(lambda - Delta)^{-1/2}|_{1->1} = M/sqrt(lambda)
  const auto k = estimate_form_bound(b, ClassKind::kato, lambda, g);
  EXPECT_LE(k.delta, M / std::sqrt(lambda) * 1.05);
}

TEST(FormBound, ScalingIsQuadratic) {
  const Grid g(16, 2.0);
  const auto b = FieldSpec::hardy(3, 0.25);
  const double d1 = estimate_form_bound(b, ClassKind::F_delta, 1.0, g).delta;
  const double d3 = estimate_form_bound(b.scaled(3.0), ClassKind::F_delta, 1.0, g).delta;
  EXPECT_NEAR(d3, 9.0 * d1, 1e-6 * d3);
}

TEST(FormBound, SumSubadditivity) {
  const Grid g(16, 2.0);
  const auto b1 = FieldSpec::hardy(3, 0.25);
  const auto b2 = FieldSpec::bounded_box(3, 0.7, {0.0, 1.0, 0.0}, 1.0);
  const double d1 = estimate_form_bound(b1, ClassKind::F_delta, 1.0, g).delta;
  const double d2 = estimate_form_bound(b2, ClassKind::F_delta, 1.0, g).delta;
  const double ds = estimate_form_bound(FieldSpec::sum({b1, b2}), ClassKind::F_delta, 1.0, g).delta;
  EXPECT_LE(ds, std::pow(std::sqrt(d1) + std::sqrt(d2), 2) + 1e-6);
}

TEST(FormBound, HardyEstimateApproachesAnalyticUnderRefinement) {
  const auto b = FieldSpec::hardy(3, 0.25);
  double prev = kInf;
  for (int m : {12, 24, 48}) {
    const double err = std::abs(estimate_form_bound(b, ClassKind::F_delta, 1.0, Grid(m, 2.0)).delta - 0.25);
    EXPECT_LT(err, prev) << "m=" << m;
    prev = err;
  }
}

TEST(FormBound, CombineFields) {
  auto est = [](double d) {
    FormBoundEstimate e;
    e.delta = d;
    return e;
  };
  const std::vector<FormBoundEstimate> a{est(0.25), est(0.25)};
  EXPECT_NEAR(combine_fields(a).delta, 1.0, 1e-15);
  EXPECT_EQ(combine_fields(a).method, BoundMethod::closed_bound);
  const std::vector<FormBoundEstimate> b{est(0.0), est(0.37)};
  EXPECT_NEAR(combine_fields(b).delta, 0.37, 1e-15);
  const std::vector<FormBoundEstimate> c{est(0.04), est(0.09)};
  EXPECT_NEAR(combine_fields(c).delta, 0.25, 1e-15);
  auto kato = est(0.1);
  kato.class_kind = ClassKind::kato;
  EXPECT_ERROR(combine_fields(std::vector<FormBoundEstimate>{est(0.1), kato}), MixedClasses);
  auto other = est(0.1);
  other.lambda = 2.0;
  EXPECT_ERROR(combine_fields(std::vector<FormBoundEstimate>{est(0.1), other}), MixedLambda);
}

TEST(FormBound, BesselPotentialKernel) {
  for (double lambda : {0.5, 1.0, 4.0})
    for (double r : {0.1, 0.7, 2.0}) {
      const double s = std::sqrt(lambda);
      const double expect = s / (2.0 * std::numbers::pi * std::numbers::pi * r) * std::cyl_bessel_k(1.0, s * r);
      EXPECT_NEAR(bessel_potential_kernel(lambda, r), expect, 1e-10 * expect);
    }
  EXPECT_NEAR(bessel_potential_ball_mass(1.0, 60.0), 1.0, 1e-6);
  EXPECT_NEAR(bessel_potential_ball_mass(4.0, 60.0), 0.5, 1e-6);
}

TEST(Divergence, AnalyticExamples) {
  const auto z = divergence_of_a(DispersionSpec::identity(3), DerivMode::analytic);
  const auto v0 = z.eval(Point{0.3, 0.1, 0.2});
  for (double v : v0) EXPECT_EQ(v, 0.0);

  const auto rp = divergence_of_a(DispersionSpec::radial_projection(3, 0.1), DerivMode::analytic);
  const Point x{0.3, -0.4, 1.2};
  const double r2 = 0.09 + 0.16 + 1.44;
  const auto v = rp.eval(x);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(v[i], 0.2 * x[i] / r2, 1e-15);

  const auto sl = divergence_of_a(DispersionSpec::sine_log(3, 0.1, {1.0, 0.0, 0.0}), DerivMode::analytic);
  const auto w = sl.eval(Point{std::exp(std::numbers::pi / 4), 0.0, 0.0});
  EXPECT_NEAR(w[0], 0.1 * std::exp(-std::numbers::pi / 4), 1e-14);
  EXPECT_NEAR(w[1], 0.0, 1e-15);
}

TEST(Divergence, RadialProjectionBoundMatchesHardy) {
  // div a = 0.2 x/|x|^2 is the Hardy field with kappa 0.2, so delta_a = 0.16
  EXPECT_NEAR(analytic_hardy_delta(0.2, 3).delta, 0.16, 1e-15);
  const auto rp = divergence_of_a(DispersionSpec::radial_projection(3, 0.1), DerivMode::analytic);
  const auto h = FieldSpec::hardy(3, 0.2);
  const Point x{-0.7, 0.2, 0.5};
  EXPECT_NEAR(rp.eval(x)[0], h.eval(x)[0], 1e-15);
}

// Largest nodal difference between analytic and finite-difference div a at
// distance >= 1 (at least 10h on both grids), so both grids see the same region.
double divergence_error(const DispersionSpec& d, const Grid& g) {
  const auto an = divergence_of_a(d, DerivMode::analytic);
  const auto fd = divergence_of_a(d, DerivMode::finite_difference, &g);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.point(p);
    if (std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) < 1.0) continue;
    const auto a = an.eval(x), f = fd.eval(x);
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(a[i] - f[i]));
  }
  return err;
}

TEST(Divergence, FiniteDifferenceIsSecondOrder) {
  for (const auto& d : {DispersionSpec::radial_projection(3, 0.4), DispersionSpec::sine_log(3, 0.3, {0.0, 0.6, 0.8})}) {
    const double e1 = divergence_error(d, Grid(40, 2.0));
    const double e2 = divergence_error(d, Grid(80, 2.0));
    EXPECT_LT(e2, e1 / 3.0) << d.kind_name();
  }
}

TEST(Divergence, Unsupported) {
  GridField sigma(Grid(4, 1.0), 9);
  for (std::size_t p = 0; p < sigma.grid.size(); ++p)
    for (int i = 0; i < 3; ++i) sigma.values[p * 9 + i * 4] = 1.0;
  const auto gs = DispersionSpec::grid_sampled_sigma(sigma);
  EXPECT_ERROR(divergence_of_a(gs, DerivMode::analytic), UnsupportedAnalytic);
}

TEST(Serialize, RoundTrip) {
  const std::vector<nlohmann::json> fields{
      {{"kind", "hardy"}, {"d", 3}, {"kappa", 0.25}, {"sign", -1}},
      {{"kind", "bounded_box"}, {"d", 3}, {"M", 1.0}, {"direction", {0, 1, 0}}, {"half_width", 2.0}},
      {{"kind", "sum"}, {"children", {{{"kind", "hardy"}, {"d", 3}, {"kappa", 0.1}}, {{"kind", "zero"}, {"d", 3}}}}}};
  for (const auto& j : fields) {
    const auto f = field_from_json(j);
    const auto g = field_from_json(to_json(f));
    const Point x{0.3, 0.5, -0.2};
    EXPECT_EQ(f.eval(x), g.eval(x)) << j.dump();
    EXPECT_EQ(to_json(f), to_json(g));
  }
  const std::vector<nlohmann::json> disps{{{"kind", "identity"}, {"d", 3}},
                                          {{"kind", "radial_projection"}, {"d", 3}, {"c", 0.1}},
                                          {{"kind", "sine_log"}, {"d", 3}, {"c", 0.2}, {"e", {0, 0, 1}}}};
  for (const auto& j : disps) {
    const auto d = dispersion_from_json(j);
    const auto e = dispersion_from_json(to_json(d));
    const Point x{0.3, 0.5, -0.2};
    EXPECT_EQ(d.a(x), e.a(x)) << j.dump();
  }
  EXPECT_ERROR(field_from_json({{"kind", "nope"}}), ConfigInvalid);
  EXPECT_ERROR(dispersion_from_json({{"kind", "radial_projection"}, {"d", 3}}), ConfigInvalid);
}

}  // namespace
}  // namespace ssde::coefficients
