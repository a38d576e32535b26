#include "ssde/semigroup/neumann.hpp"

#include <cmath>
#include <string>

#include "ssde/error.hpp"
#include "ssde/numerics.hpp"
#include "ssde/spectral.hpp"

namespace ssde::semigroup {

NeumannResult neumann_resolvent(const DiscreteOperator& op, double mu, std::span<const double> f, double a_dev,
                                double delta_est, const NeumannOptions& opts) {
  if (!(a_dev + delta_est < 1.0)) {
    throw Error(ErrorKind::PreconditionViolated,
                "series needs |a - I|_inf + delta < 1, got " + std::to_string(a_dev + delta_est));
  }
  if (!(mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "mu must be positive");
  const Grid& g = op.grid();
  const std::size_t N = g.size();
  if (f.size() != N) throw Error(ErrorKind::DimensionMismatch, "right-hand side size");

  NeumannResult res;
  res.a_dev = a_dev;
  res.delta_est = delta_est;
  res.direct = solve_resolvent(op, mu, f);

  DirichletSpectrum spec(g);
  const double f2 = l2(f);
  std::vector<double> term(f.begin(), f.end()), sum(N, 0.0), w(N), Lw(N), Nw(N);
  if (f2 > 0.0) {
    double prev = 1.0;
    res.term_norms.push_back(1.0);
    for (int k = 0;; ++k) {
      for (std::size_t i = 0; i < N; ++i) sum[i] += term[i];
      res.terms = k + 1;
      if (prev < opts.term_tol) break;
      if (res.terms >= opts.max_terms) {
        throw Error(ErrorKind::SeriesDivergence, "no convergence within " + std::to_string(opts.max_terms) + " terms");
      }
      spec.solve_shifted(mu, term, w);
      op.apply(w, Lw);
      apply_negative_laplacian(g, w, Nw);
      // -P w = -(Lambda_h + Delta_h) w
      for (std::size_t i = 0; i < N; ++i) term[i] = Nw[i] - Lw[i];
      const double rel = l2(term) / f2;
      res.term_norms.push_back(rel);
      if (!(rel < prev)) {
        throw Error(ErrorKind::SeriesDivergence, "term " + std::to_string(k + 1) + " did not decrease");
      }
      prev = rel;
    }
  }
  res.u.resize(N);
  spec.solve_shifted(mu, sum, res.u);
  const double denom = max_abs(res.direct.u);
  for (std::size_t i = 0; i < N; ++i) w[i] = res.u[i] - res.direct.u[i];
  res.rel_sup_diff = denom > 0.0 ? max_abs(w) / denom : max_abs(w);
  return res;
}

PerturbationNorm perturbation_norm(const DiscreteOperator& op, double mu, double a_dev, double delta_est,
                                   double tolerance) {
  if (!(mu > 0.0)) throw Error(ErrorKind::InvalidArgument, "mu must be positive");
  const Grid& g = op.grid();
  const std::size_t N = g.size();
  DirichletSpectrum spec(g);
  std::vector<double> w(N), a(N), b(N);
  // P^T P = R (Lambda - N)^T (Lambda - N) R with R = (mu + N)^{-1} symmetric
  auto apply = [&](std::span<const double> x, std::span<double> y) {
    spec.solve_shifted(mu, x, w);
    op.apply(w, a);
    apply_negative_laplacian(g, w, b);
    for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
    op.apply_transpose(a, w);
    apply_negative_laplacian(g, a, b);
    for (std::size_t i = 0; i < N; ++i) w[i] -= b[i];
    spec.solve_shifted(mu, w, y);
  };
  PerturbationNorm out;
  out.bound = a_dev + delta_est + tolerance;
  const auto pi = power_iteration(N, apply, std::vector<double>(N, 1.0), 1e-6, 10000);
  // P = 0 up to rounding leaves the iterate wandering in noise
  if (!pi.converged && std::abs(pi.eigenvalue) > 1e-12) {
    throw Error(ErrorKind::NoConvergence, "power iteration on P^T P did not converge");
  }
  out.norm = std::sqrt(std::max(0.0, pi.eigenvalue));
  out.iterations = pi.iterations;
  out.pass = out.norm <= out.bound;
  return out;
}

nlohmann::json to_json(const NeumannResult& r) {
  return {{"mu", r.direct.mu},          {"terms", r.terms},         {"rel_sup_diff", r.rel_sup_diff},
          {"term_norms", r.term_norms}, {"a_dev", r.a_dev},         {"delta_est", r.delta_est},
          {"direct_residual", r.direct.residual}};
}

nlohmann::json to_json(const PerturbationNorm& p) {
  return {{"norm", p.norm}, {"bound", p.bound}, {"pass", p.pass}, {"iterations", p.iterations}};
}

}  // namespace ssde::semigroup
