#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "ssde/grid.hpp"
#include "ssde/semigroup/operator.hpp"

namespace ssde::semigroup {

struct SolverOptions {
  double tolerance = 1e-12;       // Krylov target
  double accept_residual = 1e-8;  // true relative residual required on exit
  int max_iterations = 20000;
};

/// Preconditioned BiCGSTAB for (mu + Lambda_h) and, on demand, its transpose.
/// The operator is shared, never modified.
class ResolventSolver {
 public:
  ResolventSolver(const DiscreteOperator& op, double mu, SolverOptions opts = {});
  ~ResolventSolver();
  ResolventSolver(const ResolventSolver&) = delete;
  ResolventSolver& operator=(const ResolventSolver&) = delete;

  double mu() const noexcept { return mu_; }
  const DiscreteOperator& op() const noexcept { return *op_; }

  /// u = (mu + Lambda_h)^{-1} f; returns the true relative residual.
  double solve(std::span<const double> f, std::span<double> u) const;
  /// u = (mu + Lambda_h^T)^{-1} f.
  double solve_transpose(std::span<const double> f, std::span<double> u) const;
  int last_iterations() const noexcept { return last_iterations_; }

 private:
  struct Impl;
  const DiscreteOperator* op_;
  double mu_;
  SolverOptions opts_;
  std::unique_ptr<Impl> impl_;
  mutable int last_iterations_ = 0;
};

/// rho(y) = (1 + l |y|^2)^{-nu}, paired with the exponent q.
struct WeightSpec {
  double l = 0.01;
  double nu = 2.0;
  double q = 3.0;

  /// WeightInvalid unless l > 0 and nu > d/(2q) + 1.
  void validate(int d = 3) const;
  double operator()(std::span<const double> y) const;
};

struct ResolventSolution {
  GridFunction u;
  GridFunction f;
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
  double q = 3.0;
  double norm_u_q = 0.0;
  double norm_grad_q = 0.0;
  double norm_grad_qd = 0.0;  // exponent q d/(d-2)
  double norm_u_sup = 0.0;
  std::optional<double> weighted_sup;
};

/// Solves (mu + Lambda_h) u = f. MuTooSmall when mu <= mu0.
ResolventSolution solve_resolvent(const DiscreteOperator& op, double mu, std::span<const double> f, double q = 3.0,
                                  double mu0 = 0.0, const WeightSpec* weight = nullptr,
                                  const SolverOptions& opts = {});

/// ((I + tau Lambda_h)^{-1})^steps f with tau = t/steps.
GridFunction apply_semigroup(const DiscreteOperator& op, double t, std::span<const double> f, int steps);

/// All implicit-Euler iterates f, u_1, ..., u_steps.
std::vector<GridFunction> semigroup_trajectory(const DiscreteOperator& op, double t, std::span<const double> f,
                                               int steps);

struct Mu0Fit {
  double mu0 = 0.0;
  std::vector<double> mu;
  std::vector<double> sup_u;  // ||(mu + Lambda_h)^{-1} 1||_inf
};

/// Smallest mu0 >= 0 with ||(mu + Lambda_h)^{-1}||_{inf->inf} <= 1/(mu - mu0) on
/// the list. The inf->inf norm of a positive inverse is attained at f = 1.
Mu0Fit fit_mu0(const DiscreteOperator& op, std::span<const double> mu_list);

nlohmann::json to_json(const ResolventSolution& s);

}  // namespace ssde::semigroup
