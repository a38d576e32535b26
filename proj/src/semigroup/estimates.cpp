#include "ssde/semigroup/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ssde/error.hpp"
#include "ssde/numerics.hpp"
#include "ssde/parallel.hpp"

namespace ssde::semigroup {

namespace {

double unweighted_norm_scalar(std::span<const double> x, double p) {
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

double unweighted_norm_vector(std::span<const double> g, double r) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.size() / 3; ++i) {
    const double m = std::sqrt(g[3 * i] * g[3 * i] + g[3 * i + 1] * g[3 * i + 1] + g[3 * i + 2] * g[3 * i + 2]);
    s += std::pow(m, r);
  }
  return std::pow(s, 1.0 / r);
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace

double gradient_resolvent_norm(const ResolventSolver& solver, double p, double r, std::span<const double> seed,
                               int max_steps, double rel_tol) {
  const Grid& g = solver.op().grid();
  const std::size_t N = g.size();
  std::vector<double> x(seed.begin(), seed.end());
  const double x0 = unweighted_norm_scalar(x, p);
  if (x0 == 0.0) return 0.0;
  for (double& v : x) v /= x0;
  std::vector<double> u(N), grad(3 * N), w(3 * N), z(N), v(N);
  const double ps = p / (p - 1.0);
  double ratio = 0.0;
  for (int step = 0; step < max_steps; ++step) {
    solver.solve(x, u);
    forward_gradient(g, u, grad);
    const double next = unweighted_norm_vector(grad, r);
    const bool done = step > 0 && std::abs(next - ratio) <= rel_tol * next;
    ratio = next;
    if (done || ratio == 0.0) break;
    // dual of grad in l^r, pulled back through A^T, then the l^{p*} duality map
    for (std::size_t i = 0; i < N; ++i) {
      const double m = std::sqrt(grad[3 * i] * grad[3 * i] + grad[3 * i + 1] * grad[3 * i + 1] +
                                 grad[3 * i + 2] * grad[3 * i + 2]);
      const double s = m > 0.0 ? std::pow(m, r - 2.0) : 0.0;
      for (int c = 0; c < 3; ++c) w[3 * i + c] = s * grad[3 * i + c];
    }
    forward_gradient_transpose(g, w, z);
    solver.solve_transpose(z, v);
    for (std::size_t i = 0; i < N; ++i) x[i] = std::copysign(std::pow(std::abs(v[i]), ps - 1.0), v[i]);
    const double xn = unweighted_norm_scalar(x, p);
    if (xn == 0.0) break;
    for (double& t : x) t /= xn;
  }
  return ratio * std::pow(g.cell_volume(), 1.0 / r - 1.0 / p);
}

StarResult estimate_star_exponents(const DiscreteOperator& op, std::span<const double> mu_list,
                                   std::span<const double> f, double q, const StarOptions& opts) {
  constexpr int d = 3;
  StarResult res;
  res.first.estimate_id = "star_1";
  res.second.estimate_id = "star_2";
  res.first.expected_exponent = -0.5;
  res.second.expected_exponent = 1.0 / q - 0.5;
  if (max_abs(f) == 0.0) {
    for (auto* r : {&res.first, &res.second}) {
      r->zero_input = true;
      r->pass = true;
      r->note = "ZeroInput: f = 0, all norms vanish, fit skipped";
    }
    for (double mu : mu_list) res.table.push_back({mu, 0.0, 0.0, 0.0});
    return res;
  }
  res.mu0_fit = fit_mu0(op, mu_list);
  const double mu0 = res.mu0_fit.mu0;
  res.first.mu0 = res.second.mu0 = mu0;
  std::vector<double> above;
  for (double mu : mu_list)
    if (mu > mu0) above.push_back(mu);
  if (above.size() < 3 || std::log10((above.back() - mu0) / (above.front() - mu0)) < opts.min_decades) {
    throw Error(ErrorKind::FitIllConditioned, "mu list must span at least " + std::to_string(opts.min_decades) +
                                                  " decades above mu0 with 3 or more points");
  }
  const double qj = q * d / (d - 2);
  res.table.resize(above.size());
  parallel_for(0, above.size(), [&](std::size_t i) {
    ResolventSolver solver(op, above[i]);
    StarRow row;
    row.mu = above[i];
    row.grad_norm_q = gradient_resolvent_norm(solver, q, q, f, opts.max_power_steps, opts.power_rel_tol);
    row.grad_norm_qj = gradient_resolvent_norm(solver, q, qj, f, opts.max_power_steps, opts.power_rel_tol);
    // residual of one plain solve at this mu
    std::vector<double> u(f.size());
    row.residual = solver.solve(f, u);
    res.table[i] = row;
  });
  std::vector<double> lx, ly1, ly2;
  for (const auto& row : res.table) {
    lx.push_back(std::log(row.mu - mu0));
    ly1.push_back(std::log(row.grad_norm_q));
    ly2.push_back(std::log(row.grad_norm_qj));
    res.first.rows.push_back({0, row.mu, row.grad_norm_q, 1.0, row.grad_norm_q});
    res.second.rows.push_back({0, row.mu, row.grad_norm_qj, 1.0, row.grad_norm_qj});
  }
  const auto f1 = least_squares(lx, ly1), f2 = least_squares(lx, ly2);
  res.first.exponent = f1.slope;
  res.first.constant = std::exp(f1.intercept);
  res.second.exponent = f2.slope;
  res.second.constant = std::exp(f2.intercept);
  res.first.pass = std::abs(f1.slope - *res.first.expected_exponent) <= opts.tolerance;
  res.second.pass = std::abs(f2.slope - *res.second.expected_exponent) <= opts.tolerance;
  return res;
}

std::vector<EstimateReport> check_weighted_estimates(const WeightedInputs& in) {
  in.weight.validate(3);
  if (in.ops.empty() || in.ops.size() != in.n_list.size()) {
    throw Error(ErrorKind::InvalidArgument, "one operator per schedule index required");
  }
  const Grid& g = in.ops.front()->grid();
  for (const auto* op : in.ops)
    if (!op->grid().same_as(g)) throw Error(ErrorKind::GridMismatch, "operators live on different grids");
  const std::size_t N = g.size();
  if (in.h.size() != N || in.b_m.size() != N || (in.b_diff && in.b_diff->size() != N)) {
    throw Error(ErrorKind::DimensionMismatch, "grid function sizes");
  }
  const double q = in.weight.q;
  std::vector<double> rho(N);
  for (std::size_t p = 0; p < N; ++p) rho[p] = in.weight(g.point(p));

  auto lq_of = [&](auto&& fn) {
    std::vector<double> v(N);
    for (std::size_t p = 0; p < N; ++p) v[p] = fn(p);
    return lq_norm(g, v, q);
  };
  const double rhs_e1 = lq_of([&](std::size_t p) { return rho[p] * in.h[p]; });
  const double rhs_e2 = lq_of([&](std::size_t p) { return std::pow(in.b_m[p], 2.0 / q) * rho[p] * in.h[p]; });
  const double rhs_j2 = lq_of([&](std::size_t p) { return std::pow(in.b_m[p], 2.0 / q) * in.h[p]; });
  const double rhs_j3 =
      in.b_diff ? lq_of([&](std::size_t p) { return std::pow((*in.b_diff)[p], 2.0 / q) * in.h[p]; }) : 0.0;

  std::vector<double> bh(N), dh(N);
  for (std::size_t p = 0; p < N; ++p) {
    bh[p] = in.b_m[p] * in.h[p];
    dh[p] = in.b_diff ? (*in.b_diff)[p] * in.h[p] : 0.0;
  }

  const std::size_t nmu = in.mu_list.size();
  const std::size_t jobs = in.ops.size() * nmu;
  struct Cell {
    double e1 = 0, e2 = 0, j2 = 0, j3 = 0;
  };
  std::vector<Cell> cells(jobs);
  parallel_for(0, jobs, [&](std::size_t job) {
    const auto* op = in.ops[job / nmu];
    const double mu = in.mu_list[job % nmu];
    ResolventSolver solver(*op, mu);
    std::vector<double> u(N);
    Cell c;
    solver.solve(in.h, u);
    for (std::size_t p = 0; p < N; ++p) c.e1 = std::max(c.e1, rho[p] * std::abs(u[p]));
    solver.solve(bh, u);
    for (std::size_t p = 0; p < N; ++p) {
      c.e2 = std::max(c.e2, rho[p] * std::abs(u[p]));
      c.j2 = std::max(c.j2, std::abs(u[p]));
    }
    if (in.b_diff) {
      solver.solve(dh, u);
      for (std::size_t p = 0; p < N; ++p) c.j3 = std::max(c.j3, std::abs(u[p]));
    }
    cells[job] = c;
  });

  auto build = [&](const std::string& id, double rhs, double Cell::*field) {
    EstimateReport r;
    r.estimate_id = id;
    r.zero_input = max_abs(in.h) == 0.0;
    for (std::size_t job = 0; job < jobs; ++job) {
      EstimateRow row;
      row.n = in.n_list[job / nmu];
      row.mu = in.mu_list[job % nmu];
      row.lhs = cells[job].*field;
      row.rhs = rhs;
      row.ratio = rhs > 0.0 ? row.lhs / rhs : 0.0;
      r.rows.push_back(row);
    }
    r.pass = true;
    double worst = 0.0;
    for (std::size_t k = 0; k < nmu; ++k) {
      const double base = r.rows[k].ratio;
      for (std::size_t i = 1; i < in.ops.size(); ++i) {
        const double ratio = r.rows[i * nmu + k].ratio;
        if (base > 0.0) {
          worst = std::max(worst, ratio / base);
          if (ratio > in.growth_factor * base) r.pass = false;
        } else if (ratio > 0.0) {
          r.pass = false;
        }
      }
    }
    r.note = "max ratio growth over first n: " + std::to_string(worst);
    return r;
  };
  std::vector<EstimateReport> out;
  out.push_back(build("E1", rhs_e1, &Cell::e1));
  out.push_back(build("E2", rhs_e2, &Cell::e2));
  out.push_back(build("j2", rhs_j2, &Cell::j2));
  if (in.b_diff) out.push_back(build("rem_j3", rhs_j3, &Cell::j3));
  return out;
}

void weight_derivatives(const WeightSpec& w, std::span<const double> y, double& rho, double& grad_norm,
                        double& laplacian) {
  const int d = static_cast<int>(y.size());
  double r2 = 0.0;
  for (double v : y) r2 += v * v;
  const double s = 1.0 + w.l * r2;
  rho = std::pow(s, -w.nu);
  // grad rho = -2 nu l y s^{-nu-1}
  grad_norm = 2.0 * w.nu * w.l * std::sqrt(r2) * std::pow(s, -w.nu - 1.0);
  // Delta rho = -2 nu l s^{-nu-2} (d s - 2 (nu+1) l |y|^2)
  laplacian = -2.0 * w.nu * w.l * std::pow(s, -w.nu - 2.0) * (d * s - 2.0 * (w.nu + 1.0) * w.l * r2);
}

WeightCheckRow weight_derivative_check(const WeightSpec& weight, const Grid& grid, double tol) {
  if (!(weight.l > 0.0)) throw Error(ErrorKind::WeightInvalid, "weight needs l > 0");
  constexpr int d = 3;
  WeightCheckRow row;
  const double gbound = weight.nu * std::sqrt(weight.l);
  const double lbound = 2.0 * weight.nu * (2.0 * weight.nu + d + 2.0) * weight.l;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vec3 y = grid.point(p);
    double rho, gn, lap;
    weight_derivatives(weight, y, rho, gn, lap);
    row.max_grad_ratio = std::max(row.max_grad_ratio, gn / (gbound * rho));
    row.max_laplace_ratio = std::max(row.max_laplace_ratio, std::abs(lap) / (lbound * rho));
  }
  row.pass = row.max_grad_ratio <= 1.0 + tol && row.max_laplace_ratio <= 1.0 + tol;
  return row;
}

ConvergenceTable resolvent_convergence(std::span<const DiscreteOperator* const> ops, std::span<const int> n_list,
                                       std::span<const double> f, double mu, double q) {
  if (ops.size() != n_list.size() || ops.empty()) throw Error(ErrorKind::InvalidArgument, "one operator per n");
  const Grid& g = ops.front()->grid();
  for (const auto* op : ops)
    if (!op->grid().same_as(g)) throw Error(ErrorKind::GridMismatch, "operators live on different grids");
  std::vector<GridFunction> sols(ops.size(), GridFunction(g.size()));
  parallel_for(0, ops.size(), [&](std::size_t i) {
    ResolventSolver solver(*ops[i], mu);
    solver.solve(f, sols[i]);
  });
  ConvergenceTable t;
  t.mu = mu;
  t.q = q;
  std::vector<double> diff(g.size());
  for (std::size_t i = 1; i < ops.size(); ++i) {
    for (std::size_t p = 0; p < diff.size(); ++p) diff[p] = sols[i][p] - sols[i - 1][p];
    t.rows.push_back({n_list[i], n_list[i - 1], max_abs(diff), lq_norm(g, diff, q)});
  }
  t.strictly_decreasing = t.rows.size() >= 2;
  for (std::size_t i = 1; i < t.rows.size(); ++i)
    if (!(t.rows[i].sup_diff < t.rows[i - 1].sup_diff)) t.strictly_decreasing = false;
  return t;
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  std::vector<double> mus;
  std::vector<int> ns;
  for (const auto& row : r.rows) {
    rows.push_back({{"n", row.n}, {"mu", row.mu}, {"lhs", row.lhs}, {"rhs", row.rhs}, {"ratio", row.ratio}});
    if (std::find(mus.begin(), mus.end(), row.mu) == mus.end()) mus.push_back(row.mu);
    if (std::find(ns.begin(), ns.end(), row.n) == ns.end()) ns.push_back(row.n);
  }
  nlohmann::json fitted{{"mu0", r.mu0}};
  fitted["exponent"] = r.exponent ? nlohmann::json(*r.exponent) : nlohmann::json(nullptr);
  fitted["expected_exponent"] = r.expected_exponent ? nlohmann::json(*r.expected_exponent) : nlohmann::json(nullptr);
  fitted["constant"] = r.constant ? nlohmann::json(*r.constant) : nlohmann::json(nullptr);
  return {{"estimate_id", r.estimate_id}, {"mu_list", mus},        {"n_list", ns},       {"rows", rows},
          {"fitted", fitted},             {"pass", r.pass},         {"zero_input", r.zero_input},
          {"note", r.note}};
}

nlohmann::json to_json(const ConvergenceTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"n", r.n}, {"n_prev", r.n_prev}, {"sup_diff", r.sup_diff}, {"lq_diff", r.lq_diff}});
  return {{"mu", t.mu}, {"q", t.q}, {"rows", rows}, {"strictly_decreasing", t.strictly_decreasing}};
}

nlohmann::json to_json(const WeightCheckRow& w) {
  return {{"max_grad_ratio", w.max_grad_ratio}, {"max_laplace_ratio", w.max_laplace_ratio}, {"pass", w.pass}};
}

}  // namespace ssde::semigroup
