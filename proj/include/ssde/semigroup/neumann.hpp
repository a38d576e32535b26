#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "ssde/semigroup/operator.hpp"
#include "ssde/semigroup/resolvent.hpp"

namespace ssde::semigroup {

struct NeumannOptions {
  int max_terms = 500;
  double term_tol = 1e-10;  // stop once |term_k|_2 / |f|_2 drops below this
};

struct NeumannResult {
  ResolventSolution direct;  // sparse solve of the same system
  GridFunction u;            // series evaluation
  double rel_sup_diff = 0.0; // |u - direct.u|_inf / |direct.u|_inf
  int terms = 0;
  std::vector<double> term_norms;  // relative l2 norms of (-P)^k f
  double a_dev = 0.0;
  double delta_est = 0.0;
};

/// Evaluates (mu + Lambda_h)^{-1} f as (mu - Delta_h)^{-1} sum_k (-P)^k f with
/// P = (Lambda_h + Delta_h)(mu - Delta_h)^{-1}, the inverse of the free part
/// applied exactly by sine transform.
/// PreconditionViolated unless a_dev + delta_est < 1; SeriesDivergence when a
/// term is not smaller than its predecessor or max_terms is exhausted.
NeumannResult neumann_resolvent(const DiscreteOperator& op, double mu, std::span<const double> f, double a_dev,
                                double delta_est, const NeumannOptions& opts = {});

struct PerturbationNorm {
  double norm = 0.0;     // |P|_{2->2}
  double bound = 0.0;    // a_dev + delta_est + tolerance
  bool pass = false;
  int iterations = 0;
};

/// |P|_{2->2} by power iteration on P^T P. NoConvergence after 10000 steps.
PerturbationNorm perturbation_norm(const DiscreteOperator& op, double mu, double a_dev, double delta_est,
                                   double tolerance = 0.05);

nlohmann::json to_json(const NeumannResult& r);
nlohmann::json to_json(const PerturbationNorm& p);

}  // namespace ssde::semigroup
