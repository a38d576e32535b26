#include "ssde/harness/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "ssde/admissibility/admissibility.hpp"
#include "ssde/coefficients/form_bound.hpp"
#include "ssde/error.hpp"
#include "ssde/harness/experiment.hpp"
#include "ssde/numerics.hpp"
#include "ssde/regularization/regularization.hpp"
#include "ssde/sde/statistics.hpp"
#include "ssde/semigroup/estimates.hpp"
#include "ssde/semigroup/neumann.hpp"
#include "ssde/semigroup/resolvent.hpp"

namespace ssde::harness {

using coefficients::DispersionSpec;
using coefficients::FieldSpec;
using nlohmann::json;

namespace {

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

CriterionResult named(int id, std::string name) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  return r;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Mollified Hardy drift and radial-projection matrix at schedule index n.
struct Regularized {
  FieldSpec b;
  DispersionSpec a;
};

Regularized regularized(double kappa, double c, int n, const Grid& g) {
  const auto s = regularization::make_schedule(n);
  return {regularization::mollify_field(FieldSpec::hardy(3, kappa), s, g),
          c == 0.0 ? DispersionSpec::identity(3)
                   : regularization::mollify_dispersion(DispersionSpec::radial_projection(3, c), s, g)};
}

GridFunction gaussian(const Grid& g, double scale, Vec3 c = {0.0, 0.0, 0.0}) {
  GridFunction f(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 x = g.point(p);
    double r2 = 0.0;
    for (int i = 0; i < 3; ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    f[p] = std::exp(-scale * r2);
  }
  return f;
}

GridFunction sampled(const Grid& g, const sde::TestFunction& tf) {
  GridFunction f(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) f[p] = tf.value(g.point(p));
  return f;
}

// Subcritical Ito configuration of criteria 3 and 4.
constexpr double kKappa34 = 0.1;
constexpr double kC34 = 0.1;
constexpr int kN34 = 8;
const std::vector<double> kMu34{10.0, 30.0, 100.0, 300.0, 1000.0};

CriterionResult ac1() {
  auto r = named(1, "Hardy form-bound recovery");
  const auto t0 = std::chrono::steady_clock::now();
  const auto est = coefficients::estimate_form_bound(FieldSpec::hardy(3, 0.25), coefficients::ClassKind::F_delta, 1.0,
                                                     Grid(48, 2.0));
  const double secs = seconds_since(t0);
  r.pass = est.delta >= 0.2125 && est.delta <= 0.2875 && secs < 120.0;
  r.summary = fmt("delta_est=%.4f target [0.2125, 0.2875], %.1f s", est.delta, secs);
  r.data = {{"delta", est.delta}, {"iterations", est.iterations}, {"residual", est.residual}, {"seconds", secs}};
  return r;
}

CriterionResult ac2() {
  auto r = named(2, "cond0 reduction");
  const auto t0 = std::chrono::steady_clock::now();
  const auto qg = admissibility::make_q_grid(3);
  r.pass = true;
  json rows = json::array();
  for (double delta : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.1, 1.2}) {
    const auto rep = admissibility::search_q(3, delta, 0.0, 0.0, 0.0, qg);
    const bool expect = delta < 1.0;
    if (rep.feasible != expect) r.pass = false;
    rows.push_back({{"delta", delta}, {"feasible", rep.feasible}, {"q_star", rep.q_star ? json(*rep.q_star) : json()}});
  }
  const double secs = seconds_since(t0);
  if (secs >= 1.0) r.pass = false;
  r.summary = fmt("feasibility matches delta < 1 on 11 values: %s, %.3f s", r.pass ? "yes" : "no", secs);
  r.data = {{"rows", rows}, {"seconds", secs}};
  return r;
}

CriterionResult ac3() {
  auto r = named(3, "resolvent positivity/contraction");
  const Grid g(48, 1.0);
  const auto reg = regularized(kKappa34, kC34, kN34, g);
  const auto op = semigroup::assemble_operator(reg.a, reg.b, g);
  const auto fit = semigroup::fit_mu0(op, kMu34);
  const std::vector<std::pair<std::string, GridFunction>> inputs{
      {"gaussian", gaussian(g, 4.0)},
      {"one", GridFunction(g.size(), 1.0)},
      {"bump", sampled(g, sde::TestFunction::bump({0.3, 0.0, 0.0}, 0.5))}};
  double worst_min = kInf, worst_ratio = 0.0;
  json rows = json::array();
  for (const auto& [name, f] : inputs)
    for (double mu : kMu34) {
      const auto s = semigroup::solve_resolvent(op, mu, f);
      double umin = kInf;
      for (double v : s.u) umin = std::min(umin, v);
      const double ratio = s.norm_u_sup * (mu - fit.mu0) / max_abs(f);
      worst_min = std::min(worst_min, umin);
      worst_ratio = std::max(worst_ratio, ratio);
      rows.push_back({{"f", name}, {"mu", mu}, {"min_u", umin}, {"contraction", ratio}, {"residual", s.residual}});
    }
  r.pass = worst_min >= -1e-10 && worst_ratio <= 1.0 + 1e-6;
  r.summary = fmt("min u=%.3e (>= -1e-10), max |u|(mu-mu0)/|f|=%.8f (<= 1+1e-6), mu0=%.4g, violating rows=%zu",
                  worst_min, worst_ratio, fit.mu0, op.audit().violating_rows);
  r.data = {{"mu0", fit.mu0}, {"audit", semigroup::to_json(op.audit())}, {"rows", rows}};
  return r;
}

CriterionResult ac4() {
  auto r = named(4, "gradient resolvent scaling");
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(48, 1.0);
  const auto reg = regularized(kKappa34, kC34, kN34, g);
  const auto op = semigroup::assemble_operator(reg.a, reg.b, g);
  const double q = 3.0;
  const auto star = semigroup::estimate_star_exponents(op, kMu34, gaussian(g, 4.0), q);
  const double secs = seconds_since(t0);
  const double e1 = *star.first.exponent, e2 = *star.second.exponent;
  const double target2 = 1.0 / q - 0.5;
  r.pass = e1 >= -0.65 && e1 <= -0.35 && std::abs(e2 - target2) <= 0.15 && secs < 600.0;
  r.summary = fmt("exponents %.3f (target [-0.65, -0.35]) and %.3f (target %.3f +- 0.15), mu0=%.3g, %.0f s", e1, e2,
                  target2, star.mu0_fit.mu0, secs);
  json table = json::array();
  for (const auto& row : star.table)
    table.push_back({{"mu", row.mu}, {"grad_norm_q", row.grad_norm_q}, {"grad_norm_qj", row.grad_norm_qj}});
  r.data = {{"first", semigroup::to_json(star.first)}, {"second", semigroup::to_json(star.second)}, {"table", table},
            {"seconds", secs}};
  return r;
}

CriterionResult ac5() {
  auto r = named(5, "weighted estimates");
  const Grid g(48, 1.0);
  const std::vector<int> ns{4, 8, 16};
  std::vector<semigroup::DiscreteOperator> ops;
  for (int n : ns) {
    const auto reg = regularized(kKappa34, kC34, n, g);
    ops.push_back(semigroup::assemble_operator(reg.a, reg.b, g));
  }
  semigroup::WeightedInputs in;
  for (const auto& op : ops) in.ops.push_back(&op);
  in.n_list = ns;
  in.weight = semigroup::WeightSpec{0.01, 2.0, 3.0};
  in.h = sampled(g, sde::TestFunction::bump({0.0, 0.0, 0.0}, 0.5));
  const auto b16 = regularization::mollify_field(FieldSpec::hardy(3, kKappa34), regularization::make_schedule(16), g);
  const auto b4 = regularization::mollify_field(FieldSpec::hardy(3, kKappa34), regularization::make_schedule(4), g);
  in.b_m = coefficients::sample_magnitude(b16, g);
  const auto f16 = coefficients::sample_field(b16, g), f4 = coefficients::sample_field(b4, g);
  GridFunction diff(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) s += std::pow(f16.values[p * 3 + c] - f4.values[p * 3 + c], 2);
    diff[p] = std::sqrt(s);
  }
  in.b_diff = diff;
  in.mu_list = {10.0, 100.0, 1000.0};
  const auto reports = semigroup::check_weighted_estimates(in);
  const auto w_local = semigroup::weight_derivative_check(in.weight, g);
  const auto w_wide = semigroup::weight_derivative_check(in.weight, Grid(64, 20.0));
  bool e_pass = true;
  json reps = json::array();
  std::string notes;
  for (const auto& rep : reports) {
    reps.push_back(semigroup::to_json(rep));
    if (rep.estimate_id == "E1" || rep.estimate_id == "E2") {
      e_pass = e_pass && rep.pass;
      notes += rep.estimate_id + (rep.pass ? " ok" : " FAIL") + " (" + rep.note + "); ";
    }
  }
  r.pass = e_pass && w_local.pass && w_wide.pass;
  r.summary = notes + fmt("weight ratios grad %.15f, laplace %.15f", std::max(w_local.max_grad_ratio, w_wide.max_grad_ratio),
                          std::max(w_local.max_laplace_ratio, w_wide.max_laplace_ratio));
  r.data = {{"reports", reps}, {"weight_check_box", semigroup::to_json(w_local)}, {"weight_check_wide", semigroup::to_json(w_wide)}};
  return r;
}

CriterionResult ac6() {
  auto r = named(6, "Neumann identity");
  const Grid g(48, 1.0);
  const auto reg = regularized(0.15, 0.3, 8, g);
  const auto op = semigroup::assemble_operator(reg.a, reg.b, g);
  const double mu = 100.0;
  const double a_dev = reg.a.a_deviation();
  const double delta_est = coefficients::estimate_form_bound(reg.b, coefficients::ClassKind::F_delta, mu, g).delta;
  const auto f = gaussian(g, 4.0);
  const auto series = semigroup::neumann_resolvent(op, mu, f, a_dev, delta_est);
  const auto pn = semigroup::perturbation_norm(op, mu, a_dev, delta_est);
  r.pass = a_dev + delta_est <= 0.6 && series.rel_sup_diff <= 1e-6 && pn.pass;
  r.summary = fmt("a_dev+delta_est=%.4f (<= 0.6), rel sup diff=%.2e over %d terms, |P|=%.4f <= %.4f", a_dev + delta_est,
                  series.rel_sup_diff, series.terms, pn.norm, pn.bound);
  r.data = {{"mu", mu}, {"series", semigroup::to_json(series)}, {"perturbation", semigroup::to_json(pn)}};
  return r;
}

// Subcritical Ito Hardy setup for the Monte Carlo criteria.
constexpr double kKappaMc = 0.25;
constexpr double kCMc = 0.1;

CriterionResult ac7() {
  auto r = named(7, "martingale suite");
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(64, 4.0);
  const int n = 8;
  const auto reg = regularized(kKappaMc, kCMc, n, g);
  sde::EnsembleOptions o;
  o.x = {1.0, 0.0, 0.0};
  o.paths = 100000;
  o.dt = 1e-3;
  o.horizon = 1.0;
  o.seed = 20240607;
  o.exit_radius = g.half_width();
  o.record_times = {0.25, 0.5, 1.0};
  o.eps = regularization::make_schedule(n).eps;
  o.schedule_n = n;
  const auto ens = sde::simulate_ensemble(reg.b, reg.a, nullptr, o);
  const std::vector<sde::TestFunction> fs{sde::TestFunction::coordinate(0), sde::TestFunction::product(0, 1),
                                          sde::TestFunction::bump({1.0, 0.0, 0.0}, 0.8)};
  const auto reps = sde::martingale_reports(ens, reg.b, reg.a, sde::Scheme::ito, fs, o.record_times);
  double zmax = 0.0;
  bool mart = true;
  json mj = json::array();
  for (const auto& rep : reps) {
    mart = mart && rep.pass;
    for (double z : rep.z) zmax = std::max(zmax, std::abs(z));
    for (const auto& c : rep.conditional) zmax = std::max(zmax, std::abs(c.z));
    mj.push_back(sde::to_json(rep));
  }

  // driftless control
  auto oc = o;
  oc.seed = o.seed + 1;
  oc.exit_radius = kInf;  // freezing at the box would bias the variance low
  const auto ctrl = sde::simulate_ensemble(FieldSpec::zero(3), DispersionSpec::identity(3), nullptr, oc);
  bool var_ok = true;
  double zvar = 0.0;
  for (const auto& row : sde::coordinate_moments(ctrl)) {
    const double z = sde::z_score(row.square.mean - 2.0 * row.t, row.square.se);
    zvar = std::max(zvar, std::abs(z));
    if (!(std::abs(z) <= 4.0)) var_ok = false;
  }
  const double secs = seconds_since(t0);
  r.pass = mart && var_ok && secs < 600.0;
  r.summary = fmt("max |z| martingale=%.2f, driftless variance max |z|=%.2f (<= 4), exits=%.4f, %.0f s", zmax, zvar,
                  sde::summary_json(ens)["exit_fraction"].get<double>(), secs);
  r.data = {{"martingale", mj}, {"control", sde::to_json(sde::coordinate_moments(ctrl))}, {"seconds", secs}};
  return r;
}

CriterionResult ac8() {
  auto r = named(8, "MC/PDE cross-check");
  const int n = 8;
  const double t = 0.5, L = 2.5;
  const auto tf = sde::TestFunction::bump({0.5, 0.0, 0.0}, 0.8);
  const Vec3 x{0.5, 0.0, 0.0};
  // fine grid and a coarse refinement partner for the allowance fit
  const Grid fine(80, L), coarse(64, L);
  const int steps_fine = 50, steps_coarse = 25;
  const auto rf = regularized(kKappaMc, kCMc, n, fine);
  const auto rc = regularized(kKappaMc, kCMc, n, coarse);
  const auto op_f = semigroup::assemble_operator(rf.a, rf.b, fine);
  const auto op_c = semigroup::assemble_operator(rc.a, rc.b, coarse);
  sde::EnsembleOptions o;
  o.x = x;
  o.paths = 100000;
  o.dt = 1e-3;
  o.horizon = t;
  o.seed = 77;
  o.exit_radius = L;
  o.record_times = {t};
  o.eps = regularization::make_schedule(n).eps;
  o.schedule_n = n;
  const auto ens = sde::simulate_ensemble(rf.b, rf.a, nullptr, o);
  const double v_c = sde::semigroup_value(op_c, tf, t, steps_coarse, x);
  const double v_f = sde::semigroup_value(op_f, tf, t, steps_fine, x);
  const double s_c = sde::discretization_scale(o.dt, t / steps_coarse, coarse.spacing());
  const double s_f = sde::discretization_scale(o.dt, t / steps_fine, fine.spacing());
  const double c_disc = sde::fit_discretization_constant(v_c, s_c, v_f, s_f);
  const auto rep = sde::mc_vs_pde_crosscheck(ens, op_f, tf, t, steps_fine, c_disc);
  r.pass = rep.pass;
  r.summary = fmt("MC=%.5f +- %.5f, PDE=%.5f (coarse %.5f), |diff|=%.5f <= 3SE+allowance=%.5f", rep.mc.mean, rep.mc.se,
                  rep.pde_value, v_c, rep.diff, 3.0 * rep.mc.se + rep.allowance);
  r.data = sde::to_json(rep);
  r.data["pde_coarse"] = v_c;
  return r;
}

CriterionResult ac9() {
  auto r = named(9, "dichotomy trend");
  const double L = 4.0;
  const std::vector<int> ns{4, 32};
  auto family = [&](double kappa) {
    std::vector<sde::PathEnsemble> out;
    for (int n : ns) {
      const auto s = regularization::make_schedule(n);
      const Grid g = Grid::with_max_spacing(L, std::sqrt(s.eps));
      const auto b = regularization::mollify_field(FieldSpec::hardy(3, kappa), s, g);
      sde::EnsembleOptions o;
      o.x = {1.0, 0.0, 0.0};
      o.paths = 20000;
      o.dt = 5e-4;
      o.horizon = 1.0;
      o.seed = 4242;
      o.exit_radius = L;
      o.eps = s.eps;
      o.schedule_n = n;
      out.push_back(sde::simulate_ensemble(b, DispersionSpec::identity(3), nullptr, o));
    }
    std::vector<const sde::PathEnsemble*> ptrs;
    for (const auto& e : out) ptrs.push_back(&e);
    return sde::hitting_statistics(ptrs, std::vector<double>{0.01, 0.05});
  };
  // sqrt(delta) = 7 and 0.5 in d = 3: kappa = sqrt(delta)/2
  const auto sup = family(3.5), sub = family(0.25);
  const auto& s4 = sup.rows.front();
  const auto& s32 = sup.rows.back();
  const auto& u4 = sub.rows.front();
  const auto& u32 = sub.rows.back();
  const double factor = s4.median_terminal_distance / s32.median_terminal_distance;
  const double zsub = sde::z_score(u32.median_terminal_distance - u4.median_terminal_distance,
                                   std::hypot(u4.median_se, u32.median_se));
  r.pass = factor >= 2.0 && std::abs(zsub) <= 4.0;
  r.summary = fmt("supercritical median %.4f -> %.4f (factor %.2f >= 2); subcritical %.4f -> %.4f (|z|=%.2f <= 4)",
                  s4.median_terminal_distance, s32.median_terminal_distance, factor, u4.median_terminal_distance,
                  u32.median_terminal_distance, std::abs(zsub));
  r.data = {{"supercritical", sde::to_json(sup)}, {"subcritical", sde::to_json(sub)}};
  return r;
}

CriterionResult ac10() {
  auto r = named(10, "bound preservation and n-convergence");
  const std::vector<int> pres_n{4, 8, 16};
  const auto table = regularization::verify_bound_preservation(FieldSpec::hardy(3, 0.25), pres_n, 1.0, Grid(48, 1.0));
  double worst = 0.0;
  for (const auto& row : table.rows) worst = std::max(worst, row.ratio);

  const Grid g(64, 1.0);
  const std::vector<int> ns{4, 8, 16, 32};
  std::vector<semigroup::DiscreteOperator> ops;
  for (int n : ns) {
    const auto reg = regularized(0.25, 0.0, n, g);
    ops.push_back(semigroup::assemble_operator(reg.a, reg.b, g));
  }
  std::vector<const semigroup::DiscreteOperator*> ptrs;
  for (const auto& op : ops) ptrs.push_back(&op);
  const auto conv = semigroup::resolvent_convergence(ptrs, ns, gaussian(g, 4.0), 10.0);
  r.pass = worst <= 1.1 && conv.strictly_decreasing;
  std::string diffs;
  for (const auto& row : conv.rows) diffs += fmt(" %.3e", row.sup_diff);
  r.summary = fmt("max delta_n/delta=%.4f (<= 1.1); sup diffs", worst) + diffs +
              (conv.strictly_decreasing ? " strictly decreasing" : " NOT strictly decreasing");
  r.data = {{"preservation", regularization::to_json(table)}, {"convergence", semigroup::to_json(conv)}};
  return r;
}

CriterionResult ac11() {
  auto r = named(11, "determinism");
  ExperimentConfig c;
  c.experiment_id = "determinism";
  c.drift = {{"kind", "hardy"}, {"d", 3}, {"kappa", 0.25}};
  c.dispersion = {{"kind", "radial_projection"}, {"d", 3}, {"c", 0.1}};
  c.bounds.grid = {24, 2.0};
  c.schedule.n_list = {4, 8};
  c.grid = {24, 1.0};
  c.resolvent.mu_list = {10.0, 100.0};
  c.resolvent.convergence = true;
  c.ensemble.paths = 2000;
  c.ensemble.horizon = 0.5;
  c.ensemble.record_times = {0.25, 0.5};
  c.ensemble.x = {0.5, 0.0, 0.0};
  c.ensemble.bump_centre = {0.5, 0.0, 0.0};
  c.ensemble.bump_radius = 0.4;
  c.seed = 11;
  const auto a = run_experiment(c).deterministic_json().dump();
  const auto b = run_experiment(c).deterministic_json().dump();
  r.pass = a == b;
  r.summary = fmt("two runs, %zu bytes each, identical modulo timing: %s", a.size(), r.pass ? "yes" : "no");
  r.data = {{"bytes", a.size()}, {"hash", config_hash(json::parse(a))}};
  return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const std::set<int>& only,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  const std::map<int, std::function<CriterionResult()>> all{{1, ac1}, {2, ac2}, {3, ac3},  {4, ac4},
                                                            {5, ac5}, {6, ac6}, {7, ac7},  {8, ac8},
                                                            {9, ac9}, {10, ac10}, {11, ac11}};
  std::vector<CriterionResult> out;
  for (const auto& [id, fn] : all) {
    if (!only.empty() && !only.contains(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.id = id;
      r.pass = false;
      r.summary = std::string("error: ") + e.what();
    }
    r.seconds = seconds_since(t0);
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.pass ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.summary;
  return s.str();
}

}  // namespace ssde::harness
