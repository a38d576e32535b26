#include "ssde/harness/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "ssde/admissibility/admissibility.hpp"
#include "ssde/coefficients/derived.hpp"
#include "ssde/coefficients/form_bound.hpp"
#include "ssde/coefficients/serialize.hpp"
#include "ssde/error.hpp"
#include "ssde/numerics.hpp"
#include "ssde/regularization/regularization.hpp"
#include "ssde/sde/statistics.hpp"
#include "ssde/semigroup/estimates.hpp"
#include "ssde/semigroup/neumann.hpp"
#include "ssde/semigroup/operator.hpp"
#include "ssde/semigroup/resolvent.hpp"

namespace ssde::harness {

using coefficients::DispersionSpec;
using coefficients::FieldSpec;
using nlohmann::json;

std::string to_string(Stage s) {
  switch (s) {
    case Stage::bounds: return "bounds";
    case Stage::admit: return "admit";
    case Stage::regularize: return "regularize";
    case Stage::resolvent: return "resolvent";
    case Stage::simulate: return "simulate";
  }
  return {};
}

bool ReportBundle::has_failures() const {
  for (const auto& s : stages)
    if (s.status == "failed") return true;
  return false;
}

json ReportBundle::deterministic_json() const {
  json st = json::array();
  for (const auto& s : stages) {
    json e{{"id", s.id}, {"status", s.status}};
    if (!s.error_kind.empty()) e["error"] = {{"kind", s.error_kind}, {"message", s.message}};
    st.push_back(e);
  }
  json tags = json::array();
  if (outside_cond0) tags.push_back(kOutsideTag);
  return {{"experiment_id", experiment_id}, {"config", config},     {"config_hash", config_hash},
          {"stages", st},                   {"tags", tags},         {"warnings", warnings},
          {"reports", reports}};
}

json ReportBundle::to_json() const {
  json j = deterministic_json();
  json timing = json::object();
  for (const auto& s : stages) timing[s.id] = s.seconds;
  j["timing"] = timing;
  return j;
}

std::string config_hash(const json& config) {
  const std::string text = config.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::InvalidArgument, "SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

namespace {

struct BoundsResult {
  double delta = 0.0, delta_a = 0.0, gamma = 0.0, delta_c = 0.0, a_dev = 0.0;
};

struct Level {
  int n = 0;
  regularization::MollificationSchedule schedule;
  FieldSpec b_n;
  DispersionSpec a_n;                // sigma-sampled for the Stratonovich variant
  std::optional<FieldSpec> c_n;      // Stratonovich correction of a_n
  FieldSpec drift_full;              // b_n or b_n - c_n
};

struct State {
  explicit State(const ExperimentConfig& c) : cfg(c) {}
  const ExperimentConfig& cfg;
  std::optional<FieldSpec> drift;
  std::optional<DispersionSpec> disp;
  BoundsResult bounds;
  std::vector<Level> levels;
  std::vector<std::unique_ptr<semigroup::DiscreteOperator>> ops;
};

// F_delta-type relative bound of a field: closed form for Hardy fields, grid otherwise.
coefficients::FormBoundEstimate field_bound(const FieldSpec& f, const BoundsConfig& b, bool allow_analytic) {
  if (f.is_zero()) {
    coefficients::FormBoundEstimate e;
    e.delta = 0.0;
    e.lambda = b.lambda;
    e.class_kind = b.class_kind;
    e.method = coefficients::BoundMethod::analytic;
    return e;
  }
  const auto* hardy = std::get_if<FieldSpec::Hardy>(&f.kind());
  const bool analytic_ok = hardy && b.class_kind == coefficients::ClassKind::F_delta;
  if (b.method == "analytic" || (b.method == "auto" && allow_analytic && analytic_ok)) {
    if (!analytic_ok) throw Error(ErrorKind::UnsupportedAnalytic, "closed form exists only for Hardy fields in F_delta");
    return coefficients::analytic_hardy_delta(hardy->kappa, f.dimension(), b.lambda);
  }
  return coefficients::estimate_form_bound(f, b.class_kind, b.lambda, b.grid.make());
}

double sum_of(const coefficients::Matrix& m) {
  double s = 0.0;
  for (double v : m) s += v;
  return s;
}

json run_bounds(State& st) {
  const auto& cfg = st.cfg;
  const auto& bc = cfg.bounds;
  st.drift = coefficients::field_from_json(cfg.drift, cfg.base_dir);
  st.disp = coefficients::dispersion_from_json(cfg.dispersion, cfg.base_dir);
  if (st.drift->dimension() != 3 || st.disp->dimension() != 3) {
    throw Error(ErrorKind::DimensionMismatch, "experiments run in d = 3");
  }
  json rep;
  json overridden = json::array();
  auto& B = st.bounds;

  if (bc.delta) {
    B.delta = *bc.delta;
    overridden.push_back("delta");
  } else {
    const auto est = field_bound(*st.drift, bc, true);
    B.delta = est.delta;
    rep["delta_estimate"] = coefficients::to_json(est);
  }

  if (bc.delta_a) {
    B.delta_a = *bc.delta_a;
    overridden.push_back("delta_a");
  } else {
    FieldSpec div = FieldSpec::zero(3);
    try {
      div = coefficients::divergence_of_a(*st.disp, coefficients::DerivMode::analytic);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::UnsupportedAnalytic) throw;
      const Grid g = bc.grid.make();
      div = coefficients::divergence_of_a(*st.disp, coefficients::DerivMode::finite_difference, &g);
    }
    const auto est = field_bound(div, bc, true);
    B.delta_a = est.delta;
    rep["delta_a_estimate"] = coefficients::to_json(est);
  }

  std::optional<coefficients::GradientMajorants> maj;
  try {
    maj = coefficients::gradient_majorants(*st.disp);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnsupportedAnalytic) throw;
  }
  if (bc.gamma) {
    B.gamma = *bc.gamma;
    overridden.push_back("gamma");
  } else {
    if (!maj) throw Error(ErrorKind::UnsupportedAnalytic, "no closed-form gradient bound for a; set bounds.gamma");
    const auto g_rl = coefficients::hardy_bounds_from_majorants(maj->a_grad, 3);
    B.gamma = sum_of(g_rl);
    rep["gamma_rl"] = g_rl;
  }

  if (cfg.variant == sde::Scheme::stratonovich_converted) {
    if (bc.delta_c) {
      B.delta_c = *bc.delta_c;
      overridden.push_back("delta_c");
    } else {
      if (!maj || !maj->sigma_grad) {
        throw Error(ErrorKind::UnsupportedAnalytic, "no closed-form gradient bound for sigma; set bounds.delta_c");
      }
      const auto d_rj = coefficients::hardy_bounds_from_majorants(*maj->sigma_grad, 3);
      B.delta_c = admissibility::bound_delta_c(d_rj, st.disp->sigma_sup());
      rep["delta_rj"] = d_rj;
    }
  }

  if (bc.a_dev) {
    B.a_dev = *bc.a_dev;
    overridden.push_back("a_dev");
  } else {
    B.a_dev = st.disp->a_deviation();
  }

  rep["delta"] = B.delta;
  rep["delta_a"] = B.delta_a;
  rep["gamma"] = B.gamma;
  rep["delta_c"] = cfg.variant == sde::Scheme::stratonovich_converted ? json(B.delta_c) : json(nullptr);
  rep["a_dev"] = B.a_dev;
  rep["normalization"] = st.disp->normalization();
  rep["overridden"] = overridden;
  rep["regime"] = admissibility::to_json(admissibility::classify_hardy_regime(B.delta, 3));
  rep["drift"] = coefficients::to_json(*st.drift);
  rep["dispersion"] = coefficients::to_json(*st.disp);
  return rep;
}

json run_admit(State& st, ReportBundle& bundle) {
  const auto& cfg = st.cfg;
  const auto& B = st.bounds;
  const auto variant = cfg.variant == sde::Scheme::ito ? admissibility::Variant::ito
                                                       : admissibility::Variant::stratonovich;
  const double dhat = admissibility::effective_delta(variant, B.delta, B.delta_a, B.delta_c);
  admissibility::AdmissibilityReport r;
  if (cfg.admissibility.q) {
    r = admissibility::check_cond0(3, *cfg.admissibility.q, dhat, B.gamma, B.delta_a, B.a_dev);
  } else {
    const auto qg = admissibility::make_q_grid(3, cfg.admissibility.q_min, cfg.admissibility.q_max,
                                               cfg.admissibility.q_step);
    r = admissibility::search_q(3, dhat, B.gamma, B.delta_a, B.a_dev, qg);
  }
  r.variant = variant;
  if (!r.feasible) {
    bundle.outside_cond0 = true;
    bundle.warnings.push_back("admissibility infeasible: downstream reports are tagged '" + std::string(kOutsideTag) +
                              "'");
  }
  return admissibility::to_json(r);
}

json run_regularize(State& st, ReportBundle& bundle) {
  const auto& cfg = st.cfg;
  const Grid grid = cfg.grid.make();
  const bool strat = cfg.variant == sde::Scheme::stratonovich_converted;
  json levels = json::array();
  for (int n : cfg.schedule.n_list) {
    auto sched = regularization::make_schedule(n, cfg.schedule.rule);
    auto b_n = regularization::mollify_field(*st.drift, sched, grid);
    auto a_n = regularization::mollify_dispersion(*st.disp, sched, grid,
                                                  strat ? regularization::MatrixTarget::sigma
                                                        : regularization::MatrixTarget::a);
    std::optional<FieldSpec> c_n;
    FieldSpec full = b_n;
    if (strat) {
      c_n = coefficients::stratonovich_correction_field(a_n, coefficients::DerivMode::finite_difference, &grid);
      full = FieldSpec::sum({b_n, c_n->scaled(-1.0)});
    }
    json l = regularization::to_json(sched);
    l["a_dev"] = a_n.a_deviation();
    l["b_sup"] = max_abs(coefficients::sample_magnitude(b_n, grid));
    levels.push_back(l);
    st.levels.push_back(Level{n, sched, std::move(b_n), std::move(a_n), std::move(c_n), std::move(full)});
  }
  json rep{{"grid", {{"nodes", grid.nodes_per_axis()}, {"half_width", grid.half_width()}, {"spacing", grid.spacing()}}},
           {"target", strat ? "sigma" : "a"},
           {"levels", levels}};
  if (cfg.schedule.preservation) {
    const auto table = regularization::verify_bound_preservation(*st.drift, cfg.schedule.n_list, cfg.bounds.lambda,
                                                                 cfg.bounds.grid.make(), cfg.schedule.rule);
    rep["preservation"] = regularization::to_json(table);
    CsvTable csv{"preservation", {"n", "eps", "delta_n", "ratio", "residual"}, {}};
    for (const auto& r : table.rows) csv.rows.push_back({double(r.n), r.eps, r.delta_n, r.ratio, r.residual});
    bundle.tables.push_back(std::move(csv));
  }
  return rep;
}

GridFunction make_input(const json& spec, const Grid& g) {
  const std::string kind = spec.at("kind").get<std::string>();
  GridFunction f(g.size());
  if (kind == "gaussian") {
    const double s = spec.value("scale", 4.0);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Vec3 x = g.point(p);
      f[p] = std::exp(-s * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
    }
  } else if (kind == "bump") {
    const auto tf = sde::TestFunction::bump(spec.value("centre", Vec3{0.0, 0.0, 0.0}), spec.value("radius", 0.5));
    for (std::size_t p = 0; p < g.size(); ++p) f[p] = tf.value(g.point(p));
  } else if (kind == "one") {
    std::fill(f.begin(), f.end(), 1.0);
  } else if (kind == "zero") {
  } else {
    throw Error(ErrorKind::ConfigInvalid, "resolvent.f: unknown kind '" + kind + "'");
  }
  return f;
}

std::size_t level_index(const State& st, std::optional<int> n) {
  if (!n) return st.levels.size() - 1;
  for (std::size_t i = 0; i < st.levels.size(); ++i)
    if (st.levels[i].n == *n) return i;
  throw Error(ErrorKind::InvalidArgument, "schedule index " + std::to_string(*n) + " not regularized");
}

json run_resolvent(State& st, ReportBundle& bundle) {
  const auto& cfg = st.cfg;
  const auto& rc = cfg.resolvent;
  const Grid grid = cfg.grid.make();
  const GridFunction f = make_input(rc.f, grid);
  const double fsup = max_abs(f);
  json rep{{"q", rc.q}, {"mu_list", rc.mu_list}};
  json per_n = json::array();
  CsvTable table{"resolvent",
                 {"n", "mu", "residual", "iterations", "norm_u_q", "norm_grad_q", "norm_grad_qd", "norm_u_sup", "min_u",
                  "contraction"},
                 {}};
  for (const auto& lv : st.levels) {
    st.ops.push_back(std::make_unique<semigroup::DiscreteOperator>(semigroup::assemble_operator(lv.a_n, lv.drift_full, grid)));
    const auto& op = *st.ops.back();
    const auto fit = semigroup::fit_mu0(op, rc.mu_list);
    json rows = json::array();
    bool positive = true, contraction = true;
    for (double mu : rc.mu_list) {
      const auto s = semigroup::solve_resolvent(op, mu, f, rc.q);
      double umin = kInf;
      for (double v : s.u) umin = std::min(umin, v);
      const double ratio = fsup > 0.0 ? s.norm_u_sup * (mu - fit.mu0) / fsup : 0.0;
      bool f_nonneg = true;
      for (double v : f)
        if (v < 0.0) f_nonneg = false;
      if (f_nonneg && umin < -1e-10) positive = false;
      if (ratio > 1.0 + 1e-6) contraction = false;
      json row = semigroup::to_json(s);
      row["min_u"] = umin;
      row["contraction"] = ratio;
      rows.push_back(row);
      table.rows.push_back({double(lv.n), mu, s.residual, double(s.iterations), s.norm_u_q, s.norm_grad_q,
                            s.norm_grad_qd, s.norm_u_sup, umin, ratio});
    }
    per_n.push_back({{"n", lv.n},
                     {"audit", semigroup::to_json(op.audit())},
                     {"mu0", fit.mu0},
                     {"sup_resolvent_one", fit.sup_u},
                     {"positivity", positive},
                     {"contraction", contraction},
                     {"solves", rows}});
  }
  rep["levels"] = per_n;
  bundle.tables.push_back(std::move(table));

  const std::size_t main = level_index(st, cfg.ensemble.schedule_n);
  if (rc.star) {
    const auto star = semigroup::estimate_star_exponents(*st.ops[main], rc.mu_list, f, rc.q);
    rep["star"] = {{"n", st.levels[main].n},
                   {"first", semigroup::to_json(star.first)},
                   {"second", semigroup::to_json(star.second)},
                   {"mu0", star.mu0_fit.mu0}};
    CsvTable csv{"star", {"mu", "grad_norm_q", "grad_norm_qj", "residual"}, {}};
    for (const auto& r : star.table) csv.rows.push_back({r.mu, r.grad_norm_q, r.grad_norm_qj, r.residual});
    bundle.tables.push_back(std::move(csv));
  }
  if (rc.weighted) {
    semigroup::WeightedInputs in;
    for (const auto& op : st.ops) in.ops.push_back(op.get());
    for (const auto& lv : st.levels) in.n_list.push_back(lv.n);
    in.weight = semigroup::WeightSpec{rc.weight_l, rc.weight_nu, rc.q};
    in.h = f;
    in.b_m = coefficients::sample_magnitude(st.levels.back().b_n, grid);
    if (st.levels.size() > 1) {
      const auto hi = coefficients::sample_field(st.levels.back().b_n, grid);
      const auto lo = coefficients::sample_field(st.levels.front().b_n, grid);
      GridFunction diff(grid.size());
      for (std::size_t p = 0; p < grid.size(); ++p) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += std::pow(hi.values[p * 3 + c] - lo.values[p * 3 + c], 2);
        diff[p] = std::sqrt(s);
      }
      in.b_diff = diff;
    }
    in.mu_list = rc.mu_list;
    json reps = json::array();
    for (const auto& r : semigroup::check_weighted_estimates(in)) reps.push_back(semigroup::to_json(r));
    rep["weighted"] = reps;
    rep["weight_check"] = semigroup::to_json(semigroup::weight_derivative_check(in.weight, grid));
  }
  if (rc.convergence && st.ops.size() >= 2) {
    std::vector<const semigroup::DiscreteOperator*> ops;
    std::vector<int> ns;
    for (std::size_t i = 0; i < st.ops.size(); ++i) {
      ops.push_back(st.ops[i].get());
      ns.push_back(st.levels[i].n);
    }
    const auto t = semigroup::resolvent_convergence(ops, ns, f, rc.mu_list.front(), rc.q);
    rep["convergence"] = semigroup::to_json(t);
    CsvTable csv{"convergence", {"n", "n_prev", "sup_diff", "lq_diff"}, {}};
    for (const auto& r : t.rows) csv.rows.push_back({double(r.n), double(r.n_prev), r.sup_diff, r.lq_diff});
    bundle.tables.push_back(std::move(csv));
  }
  if (rc.neumann) {
    const auto& lv = st.levels[main];
    const double mu = rc.mu_list.back();
    const double a_dev = lv.a_n.a_deviation();
    const double delta_est =
        coefficients::estimate_form_bound(lv.drift_full, coefficients::ClassKind::F_delta, mu, grid).delta;
    json nj{{"n", lv.n}, {"mu", mu}, {"a_dev", a_dev}, {"delta_est", delta_est}};
    try {
      nj["series"] = semigroup::to_json(semigroup::neumann_resolvent(*st.ops[main], mu, f, a_dev, delta_est));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::PreconditionViolated && e.kind() != ErrorKind::SeriesDivergence) throw;
      nj["series"] = {{"refused", std::string(to_string(e.kind()))}, {"message", e.what()}};
    }
    nj["perturbation"] = semigroup::to_json(semigroup::perturbation_norm(*st.ops[main], mu, a_dev, delta_est));
    rep["neumann"] = nj;
  }
  return rep;
}

json run_simulate(State& st, ReportBundle& bundle, const RunOptions& opts) {
  const auto& cfg = st.cfg;
  const auto& ec = cfg.ensemble;
  const Grid grid = cfg.grid.make();
  const std::size_t main = level_index(st, ec.schedule_n);

  auto options_for = [&](const Level& lv) {
    sde::EnsembleOptions o;
    o.x = ec.x;
    o.paths = ec.paths;
    o.dt = ec.dt;
    o.horizon = ec.horizon;
    o.seed = cfg.seed;
    o.exit_radius = ec.exit_radius.value_or(grid.half_width());
    o.record_times = ec.record_times;
    o.eps = lv.schedule.eps;
    o.schedule_n = lv.n;
    return o;
  };
  auto simulate = [&](const Level& lv) {
    return sde::simulate_ensemble(lv.b_n, lv.a_n, lv.c_n ? &*lv.c_n : nullptr, options_for(lv), cfg.variant);
  };

  const Level& lv = st.levels[main];
  const auto ens = simulate(lv);
  if (opts.path_dump) sde::write_path_dump(*opts.path_dump, ens);
  json rep{{"ensemble", sde::summary_json(ens)}, {"moments", sde::to_json(sde::coordinate_moments(ens))}};

  std::vector<sde::TestFunction> fs;
  for (const auto& tag : ec.f_tags) fs.push_back(sde::TestFunction::parse(tag, ec.bump_centre, ec.bump_radius));
  if (!fs.empty()) {
    json mj = json::array();
    for (const auto& r : sde::martingale_reports(ens, lv.drift_full, lv.a_n, cfg.variant, fs, ens.record_times))
      mj.push_back(sde::to_json(r));
    rep["martingale"] = mj;
  }
  if (!ec.clip_levels.empty()) {
    rep["drift_integrability"] = sde::to_json(sde::drift_integrability(ens, *st.drift, ec.clip_levels));
  }
  const double sig = lv.a_n.sigma_sup();
  rep["continuity"] = sde::to_json(sde::continuity_check(ens, sig * sig));

  if (ec.hitting) {
    std::vector<sde::PathEnsemble> family;
    for (const auto& l : st.levels) family.push_back(&l == &lv ? ens : simulate(l));
    std::vector<const sde::PathEnsemble*> ptrs;
    for (const auto& e : family) ptrs.push_back(&e);
    const auto h = sde::hitting_statistics(ptrs, ec.r_in);
    rep["hitting"] = sde::to_json(h);
    CsvTable csv{"hitting", {"n", "outer_fraction", "median_terminal_distance", "median_se"}, {}};
    for (double r : ec.r_in) {
      std::ostringstream name;
      name << "inner_fraction_" << r;
      csv.columns.push_back(name.str());
    }
    for (const auto& row : h.rows) {
      std::vector<double> v{double(row.n), row.outer_fraction, row.median_terminal_distance, row.median_se};
      v.insert(v.end(), row.inner_fraction.begin(), row.inner_fraction.end());
      csv.rows.push_back(std::move(v));
    }
    bundle.tables.push_back(std::move(csv));
  }
  return rep;
}

}  // namespace

ReportBundle run_experiment(const ExperimentConfig& config, const RunOptions& opts) {
  validate(config);
  ReportBundle bundle;
  bundle.experiment_id = config.experiment_id;
  bundle.config = to_json(config);
  bundle.config_hash = config_hash(bundle.config);

  std::set<Stage> want = opts.stages;
  if (want.contains(Stage::resolvent) || want.contains(Stage::simulate)) want.insert(Stage::regularize);
  if (want.contains(Stage::regularize)) want.insert(Stage::admit);
  if (want.contains(Stage::admit)) want.insert(Stage::bounds);
  if (!config.resolvent.enabled) want.erase(Stage::resolvent);
  if (!config.ensemble.enabled) want.erase(Stage::simulate);

  State st(config);
  std::map<Stage, bool> ok;
  const std::map<Stage, Stage> parent{{Stage::admit, Stage::bounds},
                                      {Stage::regularize, Stage::admit},
                                      {Stage::resolvent, Stage::regularize},
                                      {Stage::simulate, Stage::regularize}};
  const std::vector<std::pair<Stage, std::function<json()>>> pipeline{
      {Stage::bounds, [&] { return run_bounds(st); }},
      {Stage::admit, [&] { return run_admit(st, bundle); }},
      {Stage::regularize, [&] { return run_regularize(st, bundle); }},
      {Stage::resolvent, [&] { return run_resolvent(st, bundle); }},
      {Stage::simulate, [&] { return run_simulate(st, bundle, opts); }}};

  for (const auto& [stage, body] : pipeline) {
    if (!want.contains(stage)) continue;
    StageRecord rec;
    rec.id = to_string(stage);
    if (auto it = parent.find(stage); it != parent.end() && !ok[it->second]) {
      rec.status = "skipped";
      rec.message = "upstream stage " + to_string(it->second) + " did not complete";
      ok[stage] = false;
      bundle.stages.push_back(rec);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      json rep = body();
      if (bundle.outside_cond0 && stage != Stage::bounds && stage != Stage::admit) rep["tags"] = {kOutsideTag};
      bundle.reports[rec.id] = std::move(rep);
      rec.status = "ok";
      ok[stage] = true;
    } catch (const Error& e) {
      rec.status = "failed";
      rec.error_kind = std::string(to_string(e.kind()));
      rec.message = e.what();
      ok[stage] = false;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bundle.stages.push_back(rec);
  }
  return bundle;
}

std::string to_csv(const CsvTable& t) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

void write_report(const ReportBundle& bundle, const std::filesystem::path& dir, ReportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + p.string());
  };
  if (format != ReportFormat::csv) write(dir / "bundle.json", bundle.to_json().dump(2) + "\n");
  if (format != ReportFormat::json)
    for (const auto& t : bundle.tables) write(dir / (t.name + ".csv"), to_csv(t));
}

}  // namespace ssde::harness
