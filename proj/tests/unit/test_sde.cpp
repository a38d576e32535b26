#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ssde/numerics.hpp"
#include "ssde/regularization/regularization.hpp"
#include "ssde/sde/simulate.hpp"
#include "ssde/sde/statistics.hpp"
#include "ssde/sde/test_function.hpp"
#include "ssde/semigroup/operator.hpp"
#include "test_util.hpp"

namespace ssde::sde {
namespace {

using coefficients::DispersionSpec;
using coefficients::FieldSpec;

EnsembleOptions brownian_options(std::size_t paths, double dt, double horizon, std::uint64_t seed) {
  EnsembleOptions o;
  o.x = {0.5, -0.25, 0.0};
  o.paths = paths;
  o.dt = dt;
  o.horizon = horizon;
  o.seed = seed;
  return o;
}

PathEnsemble brownian(std::size_t paths, double dt, double horizon, std::uint64_t seed,
                      std::vector<double> records = {}) {
  auto o = brownian_options(paths, dt, horizon, seed);
  o.record_times = std::move(records);
  return simulate_ensemble(FieldSpec::zero(3), DispersionSpec::identity(3), nullptr, o);
}

// E f(x + sqrt(2t) Z) by tensor trapezoid quadrature over +-6 standard deviations
double heat_expectation(const TestFunction& f, const Vec3& x, double t, int nodes = 81) {
  const double s = std::sqrt(2.0 * t);
  const double h = 12.0 / (nodes - 1);
  double acc = 0.0;
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j)
      for (int k = 0; k < nodes; ++k) {
        const double z[3] = {-6.0 + i * h, -6.0 + j * h, -6.0 + k * h};
        const double w = std::exp(-0.5 * (z[0] * z[0] + z[1] * z[1] + z[2] * z[2]));
        const Vec3 y{x[0] + s * z[0], x[1] + s * z[1], x[2] + s * z[2]};
        acc += w * f.value(y);
      }
  return acc * h * h * h / std::pow(2.0 * std::numbers::pi, 1.5);
}

TEST(Simulate, DriftlessMoments) {
  const auto ens = brownian(20000, 1e-2, 1.0, 5, {0.5});
  for (const auto& row : coordinate_moments(ens)) {
    EXPECT_LT(std::abs(row.displacement.mean) / row.displacement.se, 4.0);
    EXPECT_LT(std::abs(row.square.mean - 2.0 * row.t) / row.square.se, 4.0);
  }
}

TEST(Simulate, DeterministicGivenSeed) {
  const auto a = brownian(50, 1e-2, 0.3, 9);
  const auto b = brownian(50, 1e-2, 0.3, 9);
  const auto c = brownian(50, 1e-2, 0.3, 10);
  EXPECT_EQ(a.states, b.states);
  EXPECT_NE(a.states, c.states);
}

TEST(Simulate, StratonovichWithConstantSigmaMatchesIto) {
  const auto o = brownian_options(64, 1e-2, 0.5, 3);
  const auto b = FieldSpec::constant({0.2, 0.0, -0.1});
  const auto zero = FieldSpec::zero(3);
  const auto ito = simulate_ensemble(b, DispersionSpec::identity(3), nullptr, o);
  const auto st = simulate_ensemble(b, DispersionSpec::identity(3), &zero, o, Scheme::stratonovich_converted);
  EXPECT_EQ(ito.states, st.states);
}

TEST(Simulate, BadStep) {
  auto o = brownian_options(4, 0.0, 1.0, 1);
  EXPECT_ERROR(simulate_ensemble(FieldSpec::zero(3), DispersionSpec::identity(3), nullptr, o), BadStep);
  o.dt = 0.02;
  EXPECT_ERROR(simulate_ensemble(FieldSpec::zero(3), DispersionSpec::identity(3), nullptr, o), BadStep);
  o.dt = 5e-3;
  o.eps = 1e-3;
  EXPECT_ERROR(simulate_ensemble(FieldSpec::zero(3), DispersionSpec::identity(3), nullptr, o), BadStep);
}

TEST(Simulate, RawHardyAtOriginIsNonFinite) {
  auto o = brownian_options(4, 1e-3, 0.01, 1);
  o.x = {0.0, 0.0, 0.0};
  EXPECT_ERROR(simulate_ensemble(FieldSpec::hardy(3, 0.25), DispersionSpec::identity(3), nullptr, o),
               NonFiniteState);
}

TEST(Simulate, ExitFreezesPath) {
  auto o = brownian_options(200, 1e-2, 2.0, 17);
  o.exit_radius = 0.8;
  const auto ens = simulate_ensemble(FieldSpec::constant({-3.0, 0.0, 0.0}), DispersionSpec::identity(3), nullptr, o);
  std::size_t exited = 0;
  for (std::size_t p = 0; p < ens.paths(); ++p) {
    if (ens.exit_step[p] < 0) continue;
    ++exited;
    const Vec3 last = ens.state(p, ens.records() - 1);
    EXPECT_GT(std::max({std::abs(last[0]), std::abs(last[1]), std::abs(last[2])}), 0.8);
  }
  EXPECT_GT(exited, ens.paths() / 2);
}

TEST(Simulate, ReplayMatchesRecords) {
  const auto ens = brownian(8, 1e-2, 0.5, 21, {0.1, 0.3});
  for (std::size_t p = 0; p < ens.paths(); ++p) {
    std::size_t r = 0;
    int visited = 0;
    replay_path(ens, p, [&](int step, const Vec3& x) {
      ++visited;
      if (r < ens.records() && step == ens.record_steps[r]) {
        const Vec3 rec = ens.state(p, r);
        EXPECT_EQ(std::memcmp(rec.data(), x.data(), sizeof(Vec3)), 0);
        ++r;
      }
    });
    EXPECT_EQ(r, ens.records());
    EXPECT_EQ(visited, ens.steps + 1);
  }
}

TEST(Simulate, RecordIndex) {
  const auto ens = brownian(2, 1e-2, 1.0, 1, {0.25});
  EXPECT_EQ(ens.record_index(0.25), 0u);
  EXPECT_EQ(ens.record_index(1.0), ens.records() - 1);
  EXPECT_ERROR(ens.record_index(0.33), InvalidArgument);
}

TEST(Simulate, PathDumpHeader) {
  const auto ens = brownian(3, 1e-2, 0.2, 2);
  const auto file = std::filesystem::temp_directory_path() / "ssde_dump_test.bin";
  write_path_dump(file, ens);
  std::ifstream in(file, std::ios::binary);
  std::string line, header;
  while (std::getline(in, line) && line != "end") header += line + "\n";
  EXPECT_NE(header.find("paths 3"), std::string::npos);
  EXPECT_NE(header.find("d 3"), std::string::npos);
  std::vector<double> payload(ens.states.size());
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size() * sizeof(double)));
  EXPECT_EQ(payload, ens.states);
  std::filesystem::remove(file);
}

TEST(TestFunctions, ParseTags) {
  EXPECT_EQ(TestFunction::parse("y1").tag(), "y1");
  EXPECT_EQ(TestFunction::parse("y1y2").tag(), "y1y2");
  EXPECT_EQ(TestFunction::parse("bump").kind(), TestFunction::Kind::bump);
  EXPECT_ERROR(TestFunction::parse("y4"), InvalidArgument);
  EXPECT_ERROR(TestFunction::parse("cos"), InvalidArgument);
}

TEST(TestFunctions, BumpDerivativesMatchDifferences) {
  const auto f = TestFunction::bump({0.3, -0.2, 0.1}, 0.9);
  const Vec3 y{0.5, 0.1, -0.2};
  std::array<double, 3> g{};
  std::array<double, 9> H{};
  f.eval(y, g, H);
  const double h = 1e-4;
  for (int i = 0; i < 3; ++i) {
    Vec3 p = y, m = y;
    p[i] += h;
    m[i] -= h;
    EXPECT_NEAR(g[i], (f.value(p) - f.value(m)) / (2 * h), 1e-7);
    std::array<double, 3> gp{}, gm{};
    std::array<double, 9> Hp{}, Hm{};
    f.eval(p, gp, Hp);
    f.eval(m, gm, Hm);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(H[3 * i + j], (gp[j] - gm[j]) / (2 * h), 1e-6);
  }
  EXPECT_EQ(f.value(Vec3{2.0, 0.0, 0.0}), 0.0);
}

TEST(Statistics, MeanSeAndZ) {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const auto m = mean_se(v);
  EXPECT_DOUBLE_EQ(m.mean, 2.5);
  EXPECT_NEAR(m.se, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
  EXPECT_EQ(mean_se(std::vector<double>{7.0}).se, 0.0);
  EXPECT_EQ(z_score(0.0, 0.0), 0.0);
  EXPECT_TRUE(std::isinf(z_score(1.0, 0.0)));
  EXPECT_DOUBLE_EQ(z_score(1.0, 0.5), 2.0);
}

TEST(Martingale, DriftlessCoordinateAndProduct) {
  const std::vector<double> times{0.25, 0.5};
  const auto ens = brownian(4000, 1e-2, 0.5, 11, times);
  const std::vector<TestFunction> fs{TestFunction::coordinate(0), TestFunction::product(0, 1)};
  const auto reps =
      martingale_reports(ens, FieldSpec::zero(3), DispersionSpec::identity(3), Scheme::ito, fs, times);
  ASSERT_EQ(reps.size(), 2u);
  for (const auto& r : reps) {
    EXPECT_TRUE(r.pass) << r.f_tag;
    for (double z : r.z) EXPECT_LT(std::abs(z), 4.0);
  }
}

TEST(Martingale, CompensatorCancelsConstantDrift) {
  // with b = -e1 the path drifts by +t, the compensator subtracts it
  auto o = brownian_options(4000, 1e-2, 0.5, 12);
  o.record_times = {0.5};
  const auto b = FieldSpec::constant({-1.0, 0.0, 0.0});
  const auto ens = simulate_ensemble(b, DispersionSpec::identity(3), nullptr, o);
  const std::vector<double> times{0.5};
  const auto right = martingale_report(ens, b, DispersionSpec::identity(3), Scheme::ito, TestFunction::coordinate(0), times);
  const auto wrong = martingale_report(ens, FieldSpec::zero(3), DispersionSpec::identity(3), Scheme::ito,
                                       TestFunction::coordinate(0), times);
  EXPECT_TRUE(right.pass);
  EXPECT_FALSE(wrong.pass);
}

TEST(Martingale, MismatchedVariant) {
  const std::vector<double> times{0.1};
  const auto ens = brownian(10, 1e-2, 0.1, 1, times);
  EXPECT_ERROR(martingale_report(ens, FieldSpec::zero(3), DispersionSpec::identity(3), Scheme::stratonovich_converted,
                                 TestFunction::coordinate(0), times),
               MismatchedVariant);
}

TEST(Statistics, DriftIntegrabilityBoundedField) {
  const auto b = FieldSpec::constant({0.6, 0.8, 0.0});  // |b| = 1
  auto o = brownian_options(200, 1e-2, 0.5, 4);
  const auto ens = simulate_ensemble(b, DispersionSpec::identity(3), nullptr, o);
  const std::vector<double> clips{0.5, 2.0, 10.0};
  const auto d = drift_integrability(ens, b, clips);
  ASSERT_EQ(d.rows.size(), 3u);
  for (const auto& row : d.rows) EXPECT_LE(row.integral.mean, 1.0 * 0.5 + 1e-12);
  EXPECT_NEAR(d.rows[0].integral.mean, 0.25, 1e-12);
  EXPECT_NEAR(d.rows[2].integral.mean, 0.5, 1e-12);
  EXPECT_NEAR(d.rows[0].clip_fraction, 1.0, 1e-12);
  ASSERT_EQ(d.rel_changes.size(), 2u);
  EXPECT_NEAR(d.rel_changes[0], 0.5, 1e-12);
  EXPECT_EQ(d.rel_changes[1], 0.0);
  EXPECT_FALSE(d.saturated);
  const std::vector<double> high{2.0, 10.0};
  EXPECT_TRUE(drift_integrability(ens, b, high).saturated);
}

TEST(Statistics, HittingSmallBallIsRare) {
  auto o = brownian_options(2000, 1e-2, 1.0, 8);
  o.x = {1.0, 0.0, 0.0};
  o.schedule_n = 4;
  const auto ens = simulate_ensemble(FieldSpec::zero(3), DispersionSpec::identity(3), nullptr, o);
  const PathEnsemble* fam[] = {&ens};
  const std::vector<double> r_in{0.01, 0.5};
  const auto t = hitting_statistics(fam, r_in);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.rows[0].n, 4);
  EXPECT_LT(t.rows[0].inner_fraction[0], 1e-2);
  EXPECT_GT(t.rows[0].inner_fraction[1], t.rows[0].inner_fraction[0]);
  EXPECT_EQ(t.rows[0].outer_fraction, 0.0);
  EXPECT_GT(t.rows[0].median_terminal_distance, 1.0);
}

TEST(Crosscheck, SemigroupValueMatchesHeatKernel) {
  const Grid g(40, 2.5);
  const auto op = semigroup::assemble_operator(DispersionSpec::identity(3), FieldSpec::zero(3), g);
  const auto f = TestFunction::bump({0.5, 0.0, 0.0}, 0.8);
  const Vec3 x{0.5, 0.0, 0.0};
  const double t = 0.1;
  const double oracle = heat_expectation(f, x, t);
  const double pde = semigroup_value(op, f, t, 40, x);
  EXPECT_NEAR(pde, oracle, 0.03 * oracle);
  EXPECT_NEAR(semigroup_value(op, f, 0.0, 1, x), f.value(x), 1e-15);
}

TEST(Crosscheck, MonteCarloAgreesForBrownianMotion) {
  const Grid g(40, 2.5);
  const auto op = semigroup::assemble_operator(DispersionSpec::identity(3), FieldSpec::zero(3), g);
  const auto f = TestFunction::bump({0.5, 0.0, 0.0}, 0.8);
  auto o = brownian_options(20000, 1e-2, 0.1, 31);
  o.x = {0.5, 0.0, 0.0};
  o.exit_radius = 2.5;
  const auto ens = simulate_ensemble(FieldSpec::zero(3), DispersionSpec::identity(3), nullptr, o);
  const auto r = mc_vs_pde_crosscheck(ens, op, f, 0.1, 40, 1.0);
  EXPECT_TRUE(r.pass) << r.diff << " vs " << r.allowance;
  EXPECT_NEAR(r.allowance, discretization_scale(1e-2, 0.1 / 40, g.spacing()), 1e-15);
}

TEST(Crosscheck, BoxMismatch) {
  const Grid g(12, 1.0);
  const auto op = semigroup::assemble_operator(DispersionSpec::identity(3), FieldSpec::zero(3), g);
  const auto ens = brownian(4, 1e-2, 0.1, 1);
  EXPECT_ERROR(mc_vs_pde_crosscheck(ens, op, TestFunction::coordinate(0), 0.1, 4, 1.0), BoxMismatch);
}

TEST(Crosscheck, DiscretizationConstant) {
  EXPECT_DOUBLE_EQ(discretization_scale(0.01, 0.02, 0.1), 0.04);
  EXPECT_DOUBLE_EQ(fit_discretization_constant(1.0, 0.1, 1.5, 0.2), 5.0);
  EXPECT_DOUBLE_EQ(fit_discretization_constant(1.0, 0.1, 1.0, 0.2), 1e-3);
}

TEST(Law, SameSeedIdenticalDifferentSeedConsistent) {
  const std::vector<double> times{0.5};
  const auto a = brownian(2000, 1e-2, 0.5, 1, times);
  const auto b = brownian(2000, 1e-2, 0.5, 2, times);
  const std::vector<TestFunction> fs{TestFunction::coordinate(0), TestFunction::product(0, 0)};
  const auto same = law_consistency(a, a, fs, times);
  for (const auto& row : same.rows) EXPECT_EQ(row.z, 0.0);
  EXPECT_TRUE(law_consistency(a, b, fs, times).pass);
}

TEST(Continuity, IncrementsBelowCeiling) {
  const auto ens = brownian(500, 1e-2, 0.5, 6);
  const auto c = continuity_check(ens, 1.0);
  EXPECT_TRUE(c.pass);
  EXPECT_NEAR(c.ceiling, 10.0 * std::sqrt(2.0 * 1e-2 * std::log(500.0)), 1e-12);
}

TEST(Scheme, ParseAndPrint) {
  EXPECT_EQ(parse_scheme("ito"), Scheme::ito);
  EXPECT_EQ(parse_scheme("stratonovich"), Scheme::stratonovich_converted);
  EXPECT_EQ(parse_scheme(to_string(Scheme::stratonovich_converted)), Scheme::stratonovich_converted);
  EXPECT_ERROR(parse_scheme("milstein"), InvalidArgument);
}

}  // namespace
}  // namespace ssde::sde
