#include "ssde/sde/statistics.hpp"

#include <algorithm>
#include <cmath>

#include "ssde/error.hpp"
#include "ssde/parallel.hpp"
#include "ssde/semigroup/resolvent.hpp"

namespace ssde::sde {

using coefficients::DispersionSpec;
using coefficients::FieldSpec;

MeanSe mean_se(std::span<const double> v) {
  MeanSe m;
  if (v.empty()) return m;
  const double n = static_cast<double>(v.size());
  // two-pass for stability
  double s = 0.0;
  for (double x : v) s += x;
  m.mean = s / n;
  if (v.size() < 2) return m;
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.se = std::sqrt(ss / (n - 1.0) / n);
  return m;
}

double z_score(double mean, double se) {
  if (se > 0.0) return mean / se;
  if (mean == 0.0) return 0.0;
  return std::copysign(kInf, mean);
}

namespace {

std::vector<std::size_t> time_indices(const PathEnsemble& ens, std::span<const double> times) {
  std::vector<std::size_t> idx;
  for (double t : times) {
    idx.push_back(ens.record_index(t));
    if (idx.size() > 1 && idx.back() <= idx[idx.size() - 2]) {
      throw Error(ErrorKind::InvalidArgument, "times must be increasing");
    }
  }
  return idx;
}

double norm3(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

}  // namespace

std::vector<MartingaleReport> martingale_reports(const PathEnsemble& ens, const FieldSpec& drift_full,
                                                 const DispersionSpec& a, Scheme variant,
                                                 std::span<const TestFunction> fs, std::span<const double> times,
                                                 double z_max) {
  if (variant != ens.scheme) {
    throw Error(ErrorKind::MismatchedVariant,
                "integrand variant " + to_string(variant) + " against a " + to_string(ens.scheme) + " ensemble");
  }
  const auto tidx = time_indices(ens, times);
  const std::size_t N = ens.paths(), F = fs.size(), T = tidx.size();
  std::vector<double> M(N * F * T, 0.0);
  const double dt = ens.opts.dt;

  parallel_for(0, N, [&](std::size_t p) {
    std::vector<double> integral(F, 0.0), g_prev(F, 0.0), current(F, 0.0), f0(F, 0.0);
    std::array<double, 3> b, grad;
    std::array<double, 9> A, H;
    std::size_t next = 0;
    double* out = M.data() + p * F * T;
    replay_path(ens, p, [&](int step, const Vec3& x) {
      try {
        drift_full.eval(x, b);
        a.a(x, A);
      } catch (const Error& err) {
        throw Error(ErrorKind::NonFiniteState, "path " + std::to_string(p) + " step " + std::to_string(step) + ": " +
                                                   err.what());
      }
      for (std::size_t k = 0; k < F; ++k) {
        const double v = fs[k].eval(x, grad, H);
        double g = 0.0;
        for (int i = 0; i < 3; ++i) {
          g += b[i] * grad[i];
          for (int j = 0; j < 3; ++j) g -= A[i * 3 + j] * H[i * 3 + j];
        }
        if (step == 0) {
          f0[k] = v;
        } else {
          integral[k] += 0.5 * (g_prev[k] + g) * dt;
        }
        g_prev[k] = g;
        current[k] = v - f0[k] + integral[k];
      }
      while (next < T && ens.record_steps[tidx[next]] == step) {
        for (std::size_t k = 0; k < F; ++k) out[k * T + next] = current[k];
        ++next;
      }
    });
    // stopped after exit: later times keep the exit value
    for (; next < T; ++next)
      for (std::size_t k = 0; k < F; ++k) out[k * T + next] = current[k];
  });

  std::vector<MartingaleReport> reports;
  std::vector<double> col(N), prod(N), phi(N);
  for (std::size_t k = 0; k < F; ++k) {
    MartingaleReport r;
    r.f_tag = fs[k].tag();
    r.variant = variant;
    r.paths = N;
    r.z_max = z_max;
    r.pass = true;
    for (std::size_t ti = 0; ti < T; ++ti) {
      for (std::size_t p = 0; p < N; ++p) col[p] = M[p * F * T + k * T + ti];
      const auto ms = mean_se(col);
      r.times.push_back(ens.record_times[tidx[ti]]);
      r.mean.push_back(ms.mean);
      r.se.push_back(ms.se);
      r.z.push_back(z_score(ms.mean, ms.se));
      if (!(std::abs(r.z.back()) <= z_max)) r.pass = false;
    }
    for (std::size_t ti = 0; ti + 1 < T; ++ti) {
      for (const char* name : {"sign_x1", "clipped_radius"}) {
        const bool sign = std::string(name) == "sign_x1";
        for (std::size_t p = 0; p < N; ++p) {
          const Vec3 xs = ens.state(p, tidx[ti]);
          phi[p] = sign ? (xs[0] > 0.0 ? 1.0 : (xs[0] < 0.0 ? -1.0 : 0.0)) : std::min(norm3(xs), 2.0);
        }
        const double phibar = mean_se(phi).mean;
        for (std::size_t p = 0; p < N; ++p) {
          const double dM = M[p * F * T + k * T + ti + 1] - M[p * F * T + k * T + ti];
          prod[p] = dM * (phi[p] - phibar);
        }
        const auto ms = mean_se(prod);
        ConditionalTest c{r.times[ti], r.times[ti + 1], name, ms.mean, ms.se, z_score(ms.mean, ms.se)};
        if (!(std::abs(c.z) <= z_max)) r.pass = false;
        r.conditional.push_back(c);
      }
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

MartingaleReport martingale_report(const PathEnsemble& ens, const FieldSpec& drift_full, const DispersionSpec& a,
                                   Scheme variant, const TestFunction& f, std::span<const double> times,
                                   double z_max) {
  return martingale_reports(ens, drift_full, a, variant, std::span<const TestFunction>(&f, 1), times, z_max).front();
}

std::vector<MomentRow> coordinate_moments(const PathEnsemble& ens) {
  std::vector<MomentRow> rows;
  const std::size_t N = ens.paths();
  std::vector<double> d(N), d2(N);
  for (std::size_t r = 0; r < ens.records(); ++r)
    for (int i = 0; i < 3; ++i) {
      for (std::size_t p = 0; p < N; ++p) {
        d[p] = ens.state(p, r)[i] - ens.opts.x[i];
        d2[p] = d[p] * d[p];
      }
      rows.push_back({ens.record_times[r], i, mean_se(d), mean_se(d2)});
    }
  return rows;
}

DriftIntegrability drift_integrability(const PathEnsemble& ens, const FieldSpec& b_true,
                                       std::span<const double> clip_levels, double saturation_tol) {
  const std::size_t N = ens.paths(), C = clip_levels.size();
  const double dt = ens.opts.dt;
  std::vector<double> integral(N * C, 0.0), clipped(N * C, 0.0), nodes(N, 0.0);
  parallel_for(0, N, [&](std::size_t p) {
    std::vector<double> prev(C, 0.0);
    std::array<double, 3> b;
    replay_path(ens, p, [&](int step, const Vec3& x) {
      double mag = kInf;
      try {
        b_true.eval(x, b);
        mag = std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::SingularPoint) throw;
      }
      nodes[p] += 1.0;
      for (std::size_t c = 0; c < C; ++c) {
        const double v = std::min(mag, clip_levels[c]);
        if (!(mag <= clip_levels[c])) clipped[p * C + c] += 1.0;
        if (step > 0) integral[p * C + c] += 0.5 * (prev[c] + v) * dt;
        prev[c] = v;
      }
    });
  });
  DriftIntegrability out;
  out.horizon = ens.steps * dt;
  double total_nodes = 0.0;
  for (double v : nodes) total_nodes += v;
  std::vector<double> col(N);
  for (std::size_t c = 0; c < C; ++c) {
    double cl = 0.0;
    for (std::size_t p = 0; p < N; ++p) {
      col[p] = integral[p * C + c];
      cl += clipped[p * C + c];
    }
    out.rows.push_back({clip_levels[c], mean_se(col), total_nodes > 0 ? cl / total_nodes : 0.0});
  }
  out.saturated = out.rows.size() >= 2;
  for (std::size_t c = 1; c < out.rows.size(); ++c) {
    const double a = out.rows[c - 1].integral.mean, b = out.rows[c].integral.mean;
    const double rel = b != 0.0 ? std::abs(b - a) / std::abs(b) : 0.0;
    out.rel_changes.push_back(rel);
    if (!(rel < saturation_tol)) out.saturated = false;
  }
  return out;
}

HittingTable hitting_statistics(std::span<const PathEnsemble* const> family, std::span<const double> r_in) {
  HittingTable t;
  t.r_in.assign(r_in.begin(), r_in.end());
  for (const auto* e : family) {
    HittingRow row;
    row.n = e->opts.schedule_n;
    const std::size_t N = e->paths();
    row.paths = N;
    for (double r : r_in) {
      std::size_t hits = 0;
      for (std::size_t p = 0; p < N; ++p)
        if (e->min_radius[p] < r) ++hits;
      row.inner_fraction.push_back(static_cast<double>(hits) / N);
    }
    std::size_t exits = 0;
    for (int s : e->exit_step)
      if (s >= 0) ++exits;
    row.outer_fraction = static_cast<double>(exits) / N;
    std::vector<double> dist(N);
    const std::size_t last = e->records() - 1;
    for (std::size_t p = 0; p < N; ++p) dist[p] = norm3(e->state(p, last));
    std::sort(dist.begin(), dist.end());
    auto at = [&](double pos) {
      const auto i = static_cast<std::ptrdiff_t>(std::clamp(std::llround(pos), 0LL, static_cast<long long>(N - 1)));
      return dist[static_cast<std::size_t>(i)];
    };
    row.median_terminal_distance = N % 2 ? dist[N / 2] : 0.5 * (dist[N / 2 - 1] + dist[N / 2]);
    const double spread = 0.5 * std::sqrt(static_cast<double>(N));
    row.median_se = 0.5 * (at(0.5 * N + spread) - at(0.5 * N - spread));
    t.rows.push_back(std::move(row));
  }
  return t;
}

double discretization_scale(double dt, double tau, double h) { return dt + tau + h * h; }

double fit_discretization_constant(double value_a, double scale_a, double value_b, double scale_b, double floor) {
  const double ds = std::abs(scale_a - scale_b);
  if (!(ds > 0.0)) throw Error(ErrorKind::InvalidArgument, "refinement pair needs distinct scales");
  return std::max(floor, std::abs(value_a - value_b) / ds);
}

double semigroup_value(const semigroup::DiscreteOperator& op, const TestFunction& f, double t, int pde_steps,
                       const Vec3& x) {
  if (t == 0.0) return f.value(x);
  const Grid& g = op.grid();
  GridFunction fg(g.size());
  for (std::size_t p = 0; p < g.size(); ++p) fg[p] = f.value(g.point(p));
  const GridFunction u = semigroup::apply_semigroup(op, t, fg, pde_steps);
  return interpolate(g, u, x);
}

CrosscheckReport mc_vs_pde_crosscheck(const PathEnsemble& ens, const semigroup::DiscreteOperator& op,
                                      const TestFunction& f, double t, int pde_steps, double c_disc) {
  const Grid& g = op.grid();
  const double L = g.half_width();
  const Vec3& x = ens.opts.x;
  if (!(f.support_extent() < L) || std::max({std::abs(x[0]), std::abs(x[1]), std::abs(x[2])}) >= L ||
      ens.opts.exit_radius > L) {
    throw Error(ErrorKind::BoxMismatch, "test function support, start point and exit radius must lie in the grid box");
  }
  if (!(c_disc > 0.0)) throw Error(ErrorKind::InvalidArgument, "c_disc must be positive");
  if (pde_steps < 1) throw Error(ErrorKind::InvalidArgument, "pde_steps must be >= 1");
  CrosscheckReport r;
  r.f_tag = f.tag();
  r.t = t;
  r.x = x;
  const std::size_t rec = ens.record_index(t);
  std::vector<double> v(ens.paths());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = f.value(ens.state(p, rec));
  r.mc = mean_se(v);
  r.pde_value = semigroup_value(op, f, t, pde_steps, x);
  r.c_disc = c_disc;
  r.allowance = c_disc * discretization_scale(ens.opts.dt, t / pde_steps, g.spacing());
  r.diff = std::abs(r.mc.mean - r.pde_value);
  r.pass = r.diff <= 3.0 * r.mc.se + r.allowance;
  return r;
}

LawConsistency law_consistency(const PathEnsemble& a, const PathEnsemble& b, std::span<const TestFunction> fs,
                               std::span<const double> times, double z_max) {
  LawConsistency out;
  out.z_max = z_max;
  out.pass = true;
  std::vector<double> va(a.paths()), vb(b.paths());
  for (const auto& f : fs)
    for (double t : times) {
      const std::size_t ra = a.record_index(t), rb = b.record_index(t);
      for (std::size_t p = 0; p < va.size(); ++p) va[p] = f.value(a.state(p, ra));
      for (std::size_t p = 0; p < vb.size(); ++p) vb[p] = f.value(b.state(p, rb));
      LawRow row{f.tag(), t, mean_se(va), mean_se(vb)};
      row.z = z_score(row.a.mean - row.b.mean, std::hypot(row.a.se, row.b.se));
      row.pass = std::abs(row.z) <= z_max;
      if (!row.pass) out.pass = false;
      out.rows.push_back(row);
    }
  return out;
}

ContinuityCheck continuity_check(const PathEnsemble& ens, double a_sup) {
  ContinuityCheck c;
  for (double v : ens.max_increment) c.max_increment = std::max(c.max_increment, v);
  const double logn = std::log(std::max<std::size_t>(ens.paths(), 2));
  c.ceiling = 10.0 * std::sqrt(2.0 * a_sup * ens.opts.dt * logn);
  c.pass = c.max_increment <= c.ceiling;
  return c;
}

nlohmann::json to_json(const MeanSe& m) { return {{"mean", m.mean}, {"se", m.se}}; }

nlohmann::json to_json(const MartingaleReport& r) {
  nlohmann::json cond = nlohmann::json::array();
  for (const auto& c : r.conditional)
    cond.push_back({{"s", c.s}, {"t", c.t}, {"functional", c.functional}, {"cov", c.cov}, {"se", c.se}, {"z", c.z}});
  return {{"f_tag", r.f_tag}, {"variant", to_string(r.variant)}, {"paths", r.paths}, {"times", r.times},
          {"mean", r.mean},   {"se", r.se},                       {"z", r.z},          {"conditional", cond},
          {"z_max", r.z_max}, {"pass", r.pass}};
}

nlohmann::json to_json(const std::vector<MomentRow>& rows) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rows)
    j.push_back({{"t", r.t}, {"axis", r.axis}, {"displacement", to_json(r.displacement)}, {"square", to_json(r.square)}});
  return j;
}

nlohmann::json to_json(const DriftIntegrability& d) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : d.rows)
    rows.push_back({{"clip", r.clip}, {"mean", r.integral.mean}, {"se", r.integral.se}, {"clip_fraction", r.clip_fraction}});
  return {{"horizon", d.horizon}, {"rows", rows}, {"rel_changes", d.rel_changes}, {"saturated", d.saturated}};
}

nlohmann::json to_json(const HittingTable& h) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : h.rows)
    rows.push_back({{"n", r.n},
                    {"paths", r.paths},
                    {"inner_fraction", r.inner_fraction},
                    {"outer_fraction", r.outer_fraction},
                    {"median_terminal_distance", r.median_terminal_distance},
                    {"median_se", r.median_se}});
  return {{"r_in", h.r_in}, {"rows", rows}};
}

nlohmann::json to_json(const CrosscheckReport& c) {
  return {{"f_tag", c.f_tag},         {"t", c.t},         {"x", c.x},
          {"mc_mean", c.mc.mean},     {"mc_se", c.mc.se}, {"pde_value", c.pde_value},
          {"c_disc", c.c_disc},       {"allowance", c.allowance},
          {"diff", c.diff},           {"pass", c.pass}};
}

nlohmann::json to_json(const LawConsistency& l) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : l.rows)
    rows.push_back({{"f_tag", r.f_tag},
                    {"t", r.t},
                    {"mean_a", r.a.mean},
                    {"se_a", r.a.se},
                    {"mean_b", r.b.mean},
                    {"se_b", r.b.se},
                    {"z", r.z},
                    {"pass", r.pass}});
  return {{"rows", rows}, {"z_max", l.z_max}, {"pass", l.pass}};
}

nlohmann::json to_json(const ContinuityCheck& c) {
  return {{"max_increment", c.max_increment}, {"ceiling", c.ceiling}, {"pass", c.pass}};
}

nlohmann::json summary_json(const PathEnsemble& ens) {
  std::size_t exits = 0;
  for (int s : ens.exit_step)
    if (s >= 0) ++exits;
  double rmin = kInf;
  for (double r : ens.min_radius) rmin = std::min(rmin, r);
  return {{"paths", ens.paths()},
          {"dt", ens.opts.dt},
          {"horizon", ens.opts.horizon},
          {"steps", ens.steps},
          {"x", ens.opts.x},
          {"seed", ens.opts.seed},
          {"exit_radius", std::isfinite(ens.opts.exit_radius) ? nlohmann::json(ens.opts.exit_radius) : nlohmann::json(nullptr)},
          {"scheme", to_string(ens.scheme)},
          {"schedule_n", ens.opts.schedule_n},
          {"record_times", ens.record_times},
          {"exit_fraction", static_cast<double>(exits) / ens.paths()},
          {"min_radius", rmin}};
}

}  // namespace ssde::sde
