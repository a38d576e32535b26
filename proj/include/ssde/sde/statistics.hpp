#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"
#include "ssde/sde/simulate.hpp"
#include "ssde/sde/test_function.hpp"
#include "ssde/semigroup/operator.hpp"

namespace ssde::sde {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

/// Sample mean and standard error (n - 1 variance); se = 0 for one sample.
MeanSe mean_se(std::span<const double> v);
/// mean / se; 0 when both vanish, +-inf when only se does.
double z_score(double mean, double se);

struct ConditionalTest {
  double s = 0.0;
  double t = 0.0;
  std::string functional;  // "sign_x1" or "clipped_radius"
  double cov = 0.0;
  double se = 0.0;
  double z = 0.0;
};

struct MartingaleReport {
  std::string f_tag;
  Scheme variant = Scheme::ito;
  std::size_t paths = 0;
  std::vector<double> times;
  std::vector<double> mean;
  std::vector<double> se;
  std::vector<double> z;
  std::vector<ConditionalTest> conditional;
  double z_max = 4.0;
  bool pass = false;
};

/// M^f(t) = f(X_t) - f(x) + int_0^t (-a:grad^2 f + drift . grad f)(X_s) ds by
/// trapezoidal quadrature on replayed paths, stopped at exit. drift_full is
/// b for Ito ensembles and b - c for Stratonovich ones. Conditional tests use
/// the increments between consecutive times against sign(X_1(s)) and
/// min(|X(s)|, 2). MismatchedVariant when variant differs from the ensemble's.
std::vector<MartingaleReport> martingale_reports(const PathEnsemble& ens, const coefficients::FieldSpec& drift_full,
                                                 const coefficients::DispersionSpec& a, Scheme variant,
                                                 std::span<const TestFunction> fs, std::span<const double> times,
                                                 double z_max = 4.0);

MartingaleReport martingale_report(const PathEnsemble& ens, const coefficients::FieldSpec& drift_full,
                                   const coefficients::DispersionSpec& a, Scheme variant, const TestFunction& f,
                                   std::span<const double> times, double z_max = 4.0);

struct MomentRow {
  double t = 0.0;
  int axis = 0;
  MeanSe displacement;  // X_i(t) - x_i
  MeanSe square;        // (X_i(t) - x_i)^2
};

/// First and second moments of the coordinate displacements at every record.
std::vector<MomentRow> coordinate_moments(const PathEnsemble& ens);

struct ClipRow {
  double clip = 0.0;
  MeanSe integral;             // E int_0^T min(|b(X_s)|, clip) ds
  double clip_fraction = 0.0;  // share of quadrature nodes where the clip was active
};

struct DriftIntegrability {
  double horizon = 0.0;
  std::vector<ClipRow> rows;
  std::vector<double> rel_changes;  // between consecutive clip levels
  bool saturated = false;           // every relative change below the tolerance
};

/// Clipped estimates of E int_0^T |b(X_s)| ds; singular evaluations count as clipped.
DriftIntegrability drift_integrability(const PathEnsemble& ens, const coefficients::FieldSpec& b_true,
                                       std::span<const double> clip_levels, double saturation_tol = 0.05);

struct HittingRow {
  int n = 0;
  std::size_t paths = 0;
  std::vector<double> inner_fraction;  // per r_in
  double outer_fraction = 0.0;
  double median_terminal_distance = 0.0;
  double median_se = 0.0;  // half the spread of the order statistics N/2 +- sqrt(N)/2
};

struct HittingTable {
  std::vector<double> r_in;
  std::vector<HittingRow> rows;
};

HittingTable hitting_statistics(std::span<const PathEnsemble* const> family, std::span<const double> r_in);

struct CrosscheckReport {
  std::string f_tag;
  double t = 0.0;
  Vec3 x{};
  MeanSe mc;
  double pde_value = 0.0;
  double c_disc = 0.0;
  double allowance = 0.0;  // c_disc (dt + tau + h^2)
  double diff = 0.0;
  bool pass = false;
};

/// dt + tau + h^2, the scale multiplying c_disc.
double discretization_scale(double dt, double tau, double h);

/// |v_a - v_b| / |s_a - s_b| from one refinement pair, floored at `floor`.
double fit_discretization_constant(double value_a, double scale_a, double value_b, double scale_b,
                                   double floor = 1e-3);

/// Compares the ensemble mean of f(X_t) against implicit-Euler T^t f on the
/// operator's grid, interpolated at x. BoxMismatch unless the support of f,
/// x and the exit radius lie inside the grid box.
CrosscheckReport mc_vs_pde_crosscheck(const PathEnsemble& ens, const semigroup::DiscreteOperator& op,
                                      const TestFunction& f, double t, int pde_steps, double c_disc);

/// T^t f(x) from the operator alone (t = 0 returns f(x)).
double semigroup_value(const semigroup::DiscreteOperator& op, const TestFunction& f, double t, int pde_steps,
                       const Vec3& x);

struct LawRow {
  std::string f_tag;
  double t = 0.0;
  MeanSe a;
  MeanSe b;
  double z = 0.0;
  bool pass = false;
};

struct LawConsistency {
  std::vector<LawRow> rows;
  double z_max = 4.0;
  bool pass = false;
};

/// Two-sample z-tests of E f(X_t) between ensembles built from different schedules.
LawConsistency law_consistency(const PathEnsemble& a, const PathEnsemble& b, std::span<const TestFunction> fs,
                               std::span<const double> times, double z_max = 4.0);

struct ContinuityCheck {
  double max_increment = 0.0;
  double ceiling = 0.0;  // 10 sqrt(2 |a|_inf dt log N)
  bool pass = false;
};

ContinuityCheck continuity_check(const PathEnsemble& ens, double a_sup);

nlohmann::json to_json(const MeanSe& m);
nlohmann::json to_json(const MartingaleReport& r);
nlohmann::json to_json(const std::vector<MomentRow>& rows);
nlohmann::json to_json(const DriftIntegrability& d);
nlohmann::json to_json(const HittingTable& h);
nlohmann::json to_json(const CrosscheckReport& c);
nlohmann::json to_json(const LawConsistency& l);
nlohmann::json to_json(const ContinuityCheck& c);
/// Summary without raw states.
nlohmann::json summary_json(const PathEnsemble& ens);

}  // namespace ssde::sde
