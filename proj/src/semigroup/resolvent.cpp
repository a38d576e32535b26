#include "ssde/semigroup/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "ssde/error.hpp"
#include "ssde/numerics.hpp"

namespace ssde::semigroup {

namespace {
using Solver = Eigen::BiCGSTAB<SparseMatrix, Eigen::DiagonalPreconditioner<double>>;
}

struct ResolventSolver::Impl {
  SparseMatrix A;
  Solver solver;
  std::once_flag transpose_once;
  SparseMatrix At;
  Solver solver_t;
};

ResolventSolver::ResolventSolver(const DiscreteOperator& op, double mu, SolverOptions opts)
    : op_(&op), mu_(mu), opts_(opts), impl_(std::make_unique<Impl>()) {
  const auto n = op.matrix().rows();
  SparseMatrix I(n, n);
  I.setIdentity();
  impl_->A = op.matrix() + mu * I;
  impl_->A.makeCompressed();
  impl_->solver.setTolerance(opts.tolerance);
  impl_->solver.setMaxIterations(opts.max_iterations);
  impl_->solver.compute(impl_->A);
}

ResolventSolver::~ResolventSolver() = default;

namespace {

double run(const Solver& solver, const SparseMatrix& A, std::span<const double> f, std::span<double> u,
           double accept, int& iterations) {
  const auto n = static_cast<Eigen::Index>(f.size());
  Eigen::Map<const Eigen::VectorXd> F(f.data(), n);
  Eigen::Map<Eigen::VectorXd> U(u.data(), n);
  const double fn = F.norm();
  if (fn == 0.0) {
    U.setZero();
    iterations = 0;
    return 0.0;
  }
  U = solver.solve(F);
  iterations = static_cast<int>(solver.iterations());
  const double res = (F - A * U).norm() / fn;
  if (!std::isfinite(res) || res > accept) {
    throw Error(ErrorKind::SolverDiverged, "BiCGSTAB stopped at relative residual " + std::to_string(res) + " after " +
                                               std::to_string(iterations) + " iterations");
  }
  return res;
}

}  // namespace

double ResolventSolver::solve(std::span<const double> f, std::span<double> u) const {
  int it = 0;
  const double r = run(impl_->solver, impl_->A, f, u, opts_.accept_residual, it);
  last_iterations_ = it;
  return r;
}

double ResolventSolver::solve_transpose(std::span<const double> f, std::span<double> u) const {
  std::call_once(impl_->transpose_once, [this] {
    impl_->At = impl_->A.transpose();
    impl_->At.makeCompressed();
    impl_->solver_t.setTolerance(opts_.tolerance);
    impl_->solver_t.setMaxIterations(opts_.max_iterations);
    impl_->solver_t.compute(impl_->At);
  });
  int it = 0;
  const double r = run(impl_->solver_t, impl_->At, f, u, opts_.accept_residual, it);
  last_iterations_ = it;
  return r;
}

void WeightSpec::validate(int d) const {
  if (!(l > 0.0)) throw Error(ErrorKind::WeightInvalid, "weight needs l > 0");
  if (!(q > 0.0)) throw Error(ErrorKind::WeightInvalid, "weight needs q > 0");
  if (!(nu > d / (2.0 * q) + 1.0)) {
    throw Error(ErrorKind::WeightInvalid, "weight needs nu > d/(2q) + 1 = " + std::to_string(d / (2.0 * q) + 1.0));
  }
}

double WeightSpec::operator()(std::span<const double> y) const {
  double r2 = 0.0;
  for (double v : y) r2 += v * v;
  return std::pow(1.0 + l * r2, -nu);
}

ResolventSolution solve_resolvent(const DiscreteOperator& op, double mu, std::span<const double> f, double q,
                                  double mu0, const WeightSpec* weight, const SolverOptions& opts) {
  if (!(mu > mu0)) {
    throw Error(ErrorKind::MuTooSmall, "mu=" + std::to_string(mu) + " is not above mu0=" + std::to_string(mu0));
  }
  const Grid& g = op.grid();
  if (f.size() != g.size()) throw Error(ErrorKind::DimensionMismatch, "right-hand side size");
  for (double v : f)
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "right-hand side not finite");
  ResolventSolver solver(op, mu, opts);
  ResolventSolution s;
  s.f.assign(f.begin(), f.end());
  s.u.resize(f.size());
  s.mu = mu;
  s.q = q;
  s.residual = solver.solve(f, s.u);
  s.iterations = solver.last_iterations();
  std::vector<double> grad(3 * g.size());
  forward_gradient(g, s.u, grad);
  constexpr int d = 3;
  s.norm_u_q = lq_norm(g, s.u, q);
  s.norm_grad_q = lq_norm_vector(g, grad, 3, q);
  s.norm_grad_qd = lq_norm_vector(g, grad, 3, q * d / (d - 2));
  s.norm_u_sup = max_abs(s.u);
  if (weight) {
    double w = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      const Vec3 y = g.point(p);
      w = std::max(w, (*weight)(y)*std::abs(s.u[p]));
    }
    s.weighted_sup = w;
  }
  return s;
}

std::vector<GridFunction> semigroup_trajectory(const DiscreteOperator& op, double t, std::span<const double> f,
                                               int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1");
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "t must be > 0");
  const double tau = t / steps;
  // (I + tau L) u = v  <=>  (1/tau + L) u = v / tau
  ResolventSolver solver(op, 1.0 / tau);
  std::vector<GridFunction> out;
  out.emplace_back(f.begin(), f.end());
  GridFunction rhs(f.size());
  for (int k = 0; k < steps; ++k) {
    const auto& prev = out.back();
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = prev[i] / tau;
    GridFunction next(f.size());
    solver.solve(rhs, next);
    out.push_back(std::move(next));
  }
  return out;
}

GridFunction apply_semigroup(const DiscreteOperator& op, double t, std::span<const double> f, int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be >= 1");
  if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "t must be > 0");
  const double tau = t / steps;
  ResolventSolver solver(op, 1.0 / tau);
  GridFunction cur(f.begin(), f.end()), rhs(f.size());
  for (int k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = cur[i] / tau;
    solver.solve(rhs, cur);
  }
  return cur;
}

Mu0Fit fit_mu0(const DiscreteOperator& op, std::span<const double> mu_list) {
  Mu0Fit fit;
  const GridFunction one(op.grid().size(), 1.0);
  for (double mu : mu_list) {
    ResolventSolver solver(op, mu);
    GridFunction u(one.size());
    solver.solve(one, u);
    const double s = max_abs(u);
    fit.mu.push_back(mu);
    fit.sup_u.push_back(s);
    fit.mu0 = std::max(fit.mu0, mu - 1.0 / s);
  }
  return fit;
}

nlohmann::json to_json(const ResolventSolution& s) {
  nlohmann::json j{{"mu", s.mu},
                   {"residual", s.residual},
                   {"iterations", s.iterations},
                   {"q", s.q},
                   {"norm_u_q", s.norm_u_q},
                   {"norm_grad_q", s.norm_grad_q},
                   {"norm_grad_qd", s.norm_grad_qd},
                   {"norm_u_sup", s.norm_u_sup}};
  j["weighted_sup"] = s.weighted_sup ? nlohmann::json(*s.weighted_sup) : nlohmann::json(nullptr);
  return j;
}

}  // namespace ssde::semigroup
