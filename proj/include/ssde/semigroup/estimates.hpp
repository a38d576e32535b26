#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssde/grid.hpp"
#include "ssde/semigroup/operator.hpp"
#include "ssde/semigroup/resolvent.hpp"

namespace ssde::semigroup {

struct EstimateRow {
  int n = 0;
  double mu = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct EstimateReport {
  std::string estimate_id;
  bool zero_input = false;
  double mu0 = 0.0;
  std::optional<double> exponent;           // fitted
  std::optional<double> expected_exponent;
  std::optional<double> constant;           // fitted prefactor
  std::vector<EstimateRow> rows;
  bool pass = false;
  std::string note;
};

/// One row of the gradient-scaling table.
struct StarRow {
  double mu = 0.0;
  double grad_norm_q = 0.0;   // estimate of |grad (mu + Lambda_h)^{-1}|_{q->q}
  double grad_norm_qj = 0.0;  // estimate of |grad (mu + Lambda_h)^{-1}|_{q->qd/(d-2)}
  double residual = 0.0;      // largest solver residual in the row
};

struct StarResult {
  EstimateReport first;   // exponent of the q->q norm, target -1/2
  EstimateReport second;  // exponent of the q->qd/(d-2) norm, target 1/q - 1/2
  std::vector<StarRow> table;
  Mu0Fit mu0_fit;
};

struct StarOptions {
  double tolerance = 0.15;   // allowed deviation of each exponent
  int max_power_steps = 40;
  double power_rel_tol = 1e-4;
  double min_decades = 1.5;
};

/// Estimates |grad_h (mu + Lambda_h)^{-1}| in q->q and q->qd/(d-2) by Boyd's
/// nonlinear power method seeded with f, then fits log-norm against
/// log(mu - mu0), with mu0 from the sup-norm contraction fit.
/// f = 0 yields a zero_input report without a fit; FitIllConditioned when
/// the mu list spans less than min_decades above mu0.
StarResult estimate_star_exponents(const DiscreteOperator& op, std::span<const double> mu_list,
                                   std::span<const double> f, double q, const StarOptions& opts = {});

/// |A|_{p->r} for A = grad_h (mu + Lambda_h)^{-1}, discrete norms with weight h^3.
double gradient_resolvent_norm(const ResolventSolver& solver, double p, double r, std::span<const double> seed,
                               int max_steps = 40, double rel_tol = 1e-4);

/// Inputs of the weighted and unweighted sup-norm estimates. `ops[i]` is
/// Lambda_h at schedule index n_list[i]; all share one grid.
struct WeightedInputs {
  std::vector<const DiscreteOperator*> ops;
  std::vector<int> n_list;
  WeightSpec weight;
  GridFunction h;                        // compactly supported test function
  GridFunction b_m;                      // |b_m| on the nodes
  std::optional<GridFunction> b_diff;    // |b_m - b_k| on the nodes, enables rem_j3
  std::vector<double> mu_list;
  double growth_factor = 2.0;            // allowed ratio growth over the first n
};

/// E1: |rho u|_inf <= K |rho h|_q;  E2: |rho (mu+Lambda)^{-1} |b_m| h|_inf <= K |b_m|^{2/q} rho h|_q;
/// j2 and rem_j3: the unweighted counterparts. Pass when, at every mu, the
/// ratio at each n stays within growth_factor of the ratio at the first n.
std::vector<EstimateReport> check_weighted_estimates(const WeightedInputs& in);

struct WeightCheckRow {
  double max_grad_ratio = 0.0;     // max |grad rho| / (nu sqrt(l) rho)
  double max_laplace_ratio = 0.0;  // max |Delta rho| / (2 nu (2 nu + d + 2) l rho)
  bool pass = false;
};

/// Closed-form check of |grad rho| <= nu sqrt(l) rho and
/// |Delta rho| <= 2 nu (2 nu + d + 2) l rho on every node.
WeightCheckRow weight_derivative_check(const WeightSpec& weight, const Grid& grid, double tol = 1e-12);

/// Closed-form grad rho and Delta rho at y (d = y.size()).
void weight_derivatives(const WeightSpec& w, std::span<const double> y, double& rho, double& grad_norm,
                        double& laplacian);

struct ConvergenceRow {
  int n = 0;       // the finer index of the pair
  int n_prev = 0;
  double sup_diff = 0.0;
  double lq_diff = 0.0;
};

struct ConvergenceTable {
  double mu = 0.0;
  double q = 3.0;
  std::vector<ConvergenceRow> rows;
  bool strictly_decreasing = false;
};

/// Differences between resolvent solutions at consecutive schedule indices.
ConvergenceTable resolvent_convergence(std::span<const DiscreteOperator* const> ops, std::span<const int> n_list,
                                       std::span<const double> f, double mu, double q = 3.0);

nlohmann::json to_json(const EstimateReport& r);
nlohmann::json to_json(const ConvergenceTable& t);
nlohmann::json to_json(const WeightCheckRow& w);

}  // namespace ssde::semigroup
