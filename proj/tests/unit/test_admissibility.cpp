#include <cmath>
#include <random>

#include "ssde/admissibility/admissibility.hpp"
#include "ssde/coefficients/derived.hpp"
#include "ssde/coefficients/form_bound.hpp"
#include "test_util.hpp"

namespace ssde::admissibility {
namespace {

using coefficients::DerivMode;
using coefficients::DispersionSpec;

TEST(Cond0, WorkedExample) {
  const auto r = check_cond0(3, 3.0, 0.04, 0.01, 0.01, 0.5);
  EXPECT_NEAR(r.margin1, 0.85, 1e-12);
  EXPECT_NEAR(r.margin2, 1.115, 1e-12);
  EXPECT_TRUE(r.feasible);
}

TEST(Cond0, FreeLaplacian) {
  const auto r = check_cond0(3, 3.0, 0.0, 0.0, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(r.margin1, 1.0);
  EXPECT_DOUBLE_EQ(r.margin2, 2.0);
  EXPECT_TRUE(r.feasible);
}

TEST(Cond0, ExponentBelowFloorIsInfeasible) {
  EXPECT_FALSE(check_cond0(3, 2.0, 0.0, 0.0, 0.0, 0.0).feasible);
  EXPECT_FALSE(check_cond0(5, 3.0, 0.0, 0.0, 0.0, 0.0).feasible);
  EXPECT_TRUE(check_cond0(5, 3.05, 0.0, 0.0, 0.0, 0.0).feasible);
}

TEST(Cond0, NegativeInputsRejected) {
  EXPECT_ERROR(check_cond0(3, 3.0, -0.1, 0.0, 0.0, 0.0), NegativeBound);
  EXPECT_ERROR(check_cond0(3, 3.0, 0.1, -1e-3, 0.0, 0.0), NegativeBound);
  EXPECT_ERROR(check_cond0(3, 3.0, 0.1, 0.0, -1.0, 0.0), NegativeBound);
  EXPECT_ERROR(check_cond0(3, 3.0, 0.1, 0.0, 0.0, -1.0), NegativeBound);
}

TEST(Cond0, MarginsMonotoneInEveryBound) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 0.5), uq(2.1, 8.0);
  for (int t = 0; t < 500; ++t) {
    const double q = uq(rng);
    double v[4] = {u(rng), u(rng), u(rng), u(rng)};
    const auto base = check_cond0(3, q, v[0], v[1], v[2], v[3]);
    for (int k = 0; k < 4; ++k) {
      double w[4] = {v[0], v[1], v[2], v[3]};
      w[k] += 0.05;
      const auto r = check_cond0(3, q, w[0], w[1], w[2], w[3]);
      EXPECT_LE(r.margin1, base.margin1 + 1e-14);
      EXPECT_LE(r.margin2, base.margin2 + 1e-14);
    }
  }
}

TEST(Cond0, ReportInvariant) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.0, 1.0), uq(1.5, 6.0);
  for (int t = 0; t < 300; ++t) {
    const int d = 3 + t % 3;
    const double q = uq(rng);
    const auto r = check_cond0(d, q, u(rng), 0.2 * u(rng), 0.2 * u(rng), 0.3 * u(rng));
    EXPECT_EQ(r.feasible, r.margin1 > 0.0 && r.margin2 > 0.0 && q > std::max(2.0, d - 2.0));
  }
}

TEST(SearchQ, ReductionIdentity) {
  for (int d : {3, 4, 5}) {
    const auto grid = make_q_grid(d);
    const double threshold = std::min(1.0, std::pow(2.0 / (d - 2), 2));
    for (int k = 1; k <= 25; ++k) {
      const double delta = k / 20.0;
      const auto r = search_q(d, delta, 0.0, 0.0, 0.0, grid);
      EXPECT_EQ(r.feasible, delta < threshold) << "d=" << d << " delta=" << delta;
      EXPECT_EQ(r.q_star.has_value(), r.feasible);
    }
  }
}

TEST(SearchQ, Examples) {
  const auto grid = make_q_grid(3);
  EXPECT_TRUE(search_q(3, 0.5, 0.0, 0.0, 0.0, grid).q_star.has_value());
  EXPECT_FALSE(search_q(3, 1.2, 0.0, 0.0, 0.0, grid).feasible);
  const auto free = search_q(3, 0.0, 0.0, 0.0, 0.0, grid);
  ASSERT_TRUE(free.q_star.has_value());
  EXPECT_NEAR(*free.q_star, 2.05, 1e-12);
  EXPECT_NEAR(grid.front(), 2.05, 1e-12);
  EXPECT_ERROR(search_q(3, 0.5, 0.0, 0.0, 0.0, std::vector<double>{}), EmptyGrid);
}

TEST(SearchQ, FeasibleSetReported) {
  const auto r = search_q(3, 0.5, 0.0, 0.0, 0.0, make_q_grid(3));
  ASSERT_FALSE(r.feasible_q.empty());
  EXPECT_EQ(r.feasible_q.front(), *r.q_star);
  EXPECT_TRUE(r.feasible_contiguous);
}

TEST(Variant, EffectiveDelta) {
  EXPECT_DOUBLE_EQ(effective_delta(Variant::raw, 0.1, 0.2, 0.3), 0.1);
  EXPECT_DOUBLE_EQ(effective_delta(Variant::ito, 0.1, 0.2, 0.3), 0.1 + 0.2);
  EXPECT_DOUBLE_EQ(effective_delta(Variant::stratonovich, 0.1, 0.2, 0.3), 0.1 + 0.2 + 0.3);
}

TEST(BoundDeltaC, Examples) {
  EXPECT_EQ(bound_delta_c(std::vector<double>(9, 0.0), 3.0), 0.0);
  EXPECT_NEAR(bound_delta_c(std::vector<double>(9, 0.01), 2.0), 0.18, 1e-15);
  std::vector<double> single(9, 0.0);
  single[0] = 0.04;
  EXPECT_NEAR(bound_delta_c(single, 1.0), 0.02, 1e-15);
  EXPECT_ERROR(bound_delta_c(std::vector<double>{-0.1}, 1.0), NegativeBound);
}

TEST(BoundGamma, Examples) {
  const std::vector<double> ones(3, 1.0);
  const auto z = bound_gamma_from_sigma(std::vector<double>(9, 0.0), ones, 1.0);
  EXPECT_EQ(z.gamma, 0.0);
  const auto u = bound_gamma_from_sigma(std::vector<double>(9, 0.01), ones, 1.0);
  const double g = std::pow(std::sqrt(0.03) + 0.1, 2);
  for (double v : u.gamma_rl) EXPECT_NEAR(v, g, 1e-14);
  EXPECT_NEAR(u.gamma, 9 * g, 1e-13);
  EXPECT_NEAR(g, 0.0746, 1e-4);
  std::vector<double> single(9, 0.0);
  single[0] = 0.04;
  const auto s = bound_gamma_from_sigma(single, ones, 1.0);
  EXPECT_NEAR(s.gamma_rl[0], 0.16, 1e-15);
  EXPECT_NEAR(s.gamma_rl[1], 0.04, 1e-15);
  EXPECT_NEAR(s.gamma_rl[2], 0.04, 1e-15);
  for (int k = 3; k < 9; ++k) EXPECT_EQ(s.gamma_rl[k], 0.0);
  EXPECT_ERROR(bound_gamma_from_sigma(single, std::vector<double>{1.0, -1.0, 1.0}, 1.0), NegativeBound);
}

TEST(Regime, Examples) {
  EXPECT_EQ(classify_hardy_regime(0.25, 3).regime, Regime::subcritical);
  EXPECT_EQ(classify_hardy_regime(49.0, 3).regime, Regime::no_solution);
  EXPECT_EQ(classify_hardy_regime(4.0, 3).regime, Regime::indeterminate);
  const auto l = classify_hardy_regime(0.0, 5);
  EXPECT_NEAR(l.lower_threshold, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(l.upper_threshold, 10.0 / 3.0, 1e-15);
  EXPECT_ERROR(classify_hardy_regime(0.1, 2), InvalidDimension);
}

TEST(Regime, BoundaryIsExact) {
  for (int d : {3, 4, 5, 6}) {
    const double lo = std::min(1.0, 2.0 / (d - 2)), hi = 2.0 * d / (d - 2);
    EXPECT_EQ(classify_hardy_regime(std::pow(lo - 1e-12, 2), d).regime, Regime::subcritical) << d;
    EXPECT_EQ(classify_hardy_regime(std::pow(lo + 1e-12, 2), d).regime, Regime::indeterminate) << d;
    EXPECT_EQ(classify_hardy_regime(std::pow(hi - 1e-12, 2), d).regime, Regime::indeterminate) << d;
    EXPECT_EQ(classify_hardy_regime(std::pow(hi + 1e-12, 2), d).regime, Regime::no_solution) << d;
  }
}

TEST(Correction, ConstantSigmaGivesZero) {
  const auto c = stratonovich_correction(DispersionSpec::identity(3), DerivMode::analytic);
  EXPECT_TRUE(c.is_zero());
  const Grid g(8, 1.0);
  const auto fd = stratonovich_correction(DispersionSpec::identity(3), DerivMode::finite_difference, &g);
  for (std::size_t p = 0; p < g.size(); ++p)
    for (double v : fd.eval(g.point(p))) EXPECT_NEAR(v, 0.0, 1e-14);
}

// sigma = diag(s(x1), 1, 1) sampled on a grid, with s = 1.2 + 0.2 sin(2 x1).
double diagonal_sigma_error(int m) {
  const Grid g(m, 1.0);
  GridField sigma(g, 9);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.point(p);
    sigma.values[p * 9 + 0] = 1.2 + 0.2 * std::sin(2.0 * x[0]);
    sigma.values[p * 9 + 4] = 1.0;
    sigma.values[p * 9 + 8] = 1.0;
  }
  const auto disp = DispersionSpec::grid_sampled_sigma(sigma);
  const auto c = stratonovich_correction(disp, DerivMode::finite_difference, &g);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.point(p);
    if (std::abs(x[0]) > 0.8 || std::abs(x[1]) > 0.8 || std::abs(x[2]) > 0.8) continue;
    const double s = 1.2 + 0.2 * std::sin(2.0 * x[0]), ds = 0.4 * std::cos(2.0 * x[0]);
    const auto v = c.eval(x);
    err = std::max({err, std::abs(v[0] - ds * s / std::sqrt(2.0)), std::abs(v[1]), std::abs(v[2])});
  }
  return err;
}

TEST(Correction, DiagonalSigmaOracle) {
  const double e1 = diagonal_sigma_error(20), e2 = diagonal_sigma_error(40);
  EXPECT_LT(e1, 5e-3);
  EXPECT_LT(e2, e1 / 3.0);
}

double sine_log_error(int m) {
  const auto disp = DispersionSpec::sine_log(3, 0.3, {0.0, 0.6, 0.8});
  const Grid g(m, 2.0);
  const auto an = stratonovich_correction(disp, DerivMode::analytic);
  const auto fd = stratonovich_correction(disp, DerivMode::finite_difference, &g);
  double err = 0.0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.point(p);
    if (std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) < 1.0) continue;
    const auto a = an.eval(x), f = fd.eval(x);
    for (int i = 0; i < 3; ++i) err = std::max(err, std::abs(a[i] - f[i]));
  }
  return err;
}

TEST(Correction, SineLogFiniteDifferenceSecondOrder) {
  const double e1 = sine_log_error(40), e2 = sine_log_error(80);
  EXPECT_LT(e2, e1 / 3.0);
}

TEST(Correction, EstimateBelowDeltaCBound) {
  for (const auto& disp : {DispersionSpec::sine_log(3, 0.3, {1.0, 0.0, 0.0}), DispersionSpec::radial_projection(3, 0.3)}) {
    const auto maj = coefficients::gradient_majorants(disp);
    ASSERT_TRUE(maj.sigma_grad.has_value());
    const auto drj = coefficients::hardy_bounds_from_majorants(*maj.sigma_grad, 3);
    const double bound = bound_delta_c(drj, disp.sigma_sup());
    const auto c = stratonovich_correction(disp, DerivMode::analytic);
    const double est = coefficients::estimate_form_bound(c, coefficients::ClassKind::F_delta, 1.0, Grid(24, 2.0)).delta;
    EXPECT_LE(est, bound + 1e-6) << disp.kind_name();
  }
}

}  // namespace
}  // namespace ssde::admissibility
