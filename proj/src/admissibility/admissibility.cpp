#include "ssde/admissibility/admissibility.hpp"

#include <algorithm>
#include <cmath>

#include "ssde/error.hpp"

namespace ssde::admissibility {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::raw: return "raw";
    case Variant::ito: return "ito";
    case Variant::stratonovich: return "stratonovich";
  }
  return "?";
}

Variant parse_variant(std::string_view s) {
  if (s == "raw") return Variant::raw;
  if (s == "ito") return Variant::ito;
  if (s == "stratonovich") return Variant::stratonovich;
  throw Error(ErrorKind::InvalidArgument, "unknown variant '" + std::string(s) + "'");
}

double effective_delta(Variant v, double delta, double delta_a, double delta_c) {
  switch (v) {
    case Variant::raw: return delta;
    case Variant::ito: return delta + delta_a;
    case Variant::stratonovich: return delta + delta_a + delta_c;
  }
  return delta;
}

AdmissibilityReport check_cond0(int d, double q, double delta_hat, double gamma, double delta_a, double a_dev) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "d must be >= 3");
  if (!(q > 0.0)) throw Error(ErrorKind::InvalidArgument, "q must be > 0");
  if (!(delta_hat >= 0.0 && gamma >= 0.0 && delta_a >= 0.0 && a_dev >= 0.0)) {
    throw Error(ErrorKind::NegativeBound, "relative bounds must be nonnegative");
  }
  AdmissibilityReport r;
  r.d = d;
  r.q = q;
  r.effective_delta = delta_hat;
  r.gamma = gamma;
  r.delta_a = delta_a;
  r.a_dev = a_dev;
  const double sd = std::sqrt(delta_hat), sg = std::sqrt(gamma), sa = std::sqrt(delta_a);
  r.margin1 = 1.0 - (q / 4.0) * (sg + a_dev * sd);
  r.margin2 = (q - 1.0) * (1.0 - q * sg / 2.0) - (sd * sa + delta_hat) * q * q / 4.0 - (q - 2.0) * q * sd / 2.0 -
              a_dev * q * sd / 2.0;
  r.feasible = r.margin1 > 0.0 && r.margin2 > 0.0 && q > std::max(2.0, d - 2.0);
  return r;
}

std::vector<double> make_q_grid(int d, double q_min, double q_max, double q_step) {
  if (!(q_step > 0.0)) throw Error(ErrorKind::InvalidArgument, "q_step must be > 0");
  const double lo = std::max({2.0, d - 2.0, q_min});
  std::vector<double> grid;
  for (int k = 1;; ++k) {
    const double q = lo + k * q_step;
    if (q > q_max + 1e-12) break;
    grid.push_back(q);
  }
  return grid;
}

AdmissibilityReport search_q(int d, double delta_hat, double gamma, double delta_a, double a_dev,
                             std::span<const double> q_grid) {
  if (q_grid.empty()) throw Error(ErrorKind::EmptyGrid, "empty q grid");
  std::optional<AdmissibilityReport> first, best;
  std::vector<double> feasible;
  std::size_t last_index = 0;
  bool contiguous = true;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const double q = q_grid[i];
    auto r = check_cond0(d, q, delta_hat, gamma, delta_a, a_dev);
    if (r.feasible) {
      if (!feasible.empty() && i != last_index + 1) contiguous = false;
      last_index = i;
      feasible.push_back(q);
      if (!first) first = r;
    }
    if (!best || std::min(r.margin1, r.margin2) > std::min(best->margin1, best->margin2)) best = r;
  }
  AdmissibilityReport out = first ? *first : *best;
  if (first) out.q_star = first->q;
  out.feasible_q = std::move(feasible);
  out.feasible_contiguous = contiguous;
  return out;
}

coefficients::FieldSpec stratonovich_correction(const coefficients::DispersionSpec& disp,
                                                coefficients::DerivMode mode, const Grid* grid) {
  return coefficients::stratonovich_correction_field(disp, mode, grid);
}

double bound_delta_c(std::span<const double> delta_rj, double sigma_sup) {
  if (!(sigma_sup >= 0.0)) throw Error(ErrorKind::NegativeBound, "sigma_sup must be >= 0");
  double s = 0.0;
  for (double v : delta_rj) {
    if (!(v >= 0.0)) throw Error(ErrorKind::NegativeBound, "delta_rj must be >= 0");
    s += v;
  }
  return 0.5 * sigma_sup * sigma_sup * s;
}

GammaBound bound_gamma_from_sigma(std::span<const double> delta_rj, std::span<const double> column_sups,
                                  double sigma_sup) {
  const int d = static_cast<int>(column_sups.size());
  if (static_cast<int>(delta_rj.size()) != d * d) throw Error(ErrorKind::DimensionMismatch, "delta_rj must be d x d");
  if (!(sigma_sup >= 0.0)) throw Error(ErrorKind::NegativeBound, "sigma_sup must be >= 0");
  for (double v : delta_rj)
    if (!(v >= 0.0)) throw Error(ErrorKind::NegativeBound, "delta_rj must be >= 0");
  for (double v : column_sups)
    if (!(v >= 0.0)) throw Error(ErrorKind::NegativeBound, "column sups must be >= 0");
  GammaBound g;
  g.gamma_rl.resize(d * d);
  for (int r = 0; r < d; ++r) {
    double row = 0.0;
    for (int j = 0; j < d; ++j) row += delta_rj[r * d + j];
    for (int l = 0; l < d; ++l) {
      const double v = column_sups[l] * std::sqrt(row) + sigma_sup * std::sqrt(delta_rj[r * d + l]);
      g.gamma_rl[r * d + l] = v * v;
      g.gamma += v * v;
    }
  }
  return g;
}

std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::no_solution: return "no_solution";
    case Regime::indeterminate: return "indeterminate";
  }
  return "?";
}

RegimeLabel classify_hardy_regime(double delta, int d) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "d must be >= 3");
  if (!(delta >= 0.0)) throw Error(ErrorKind::NegativeBound, "delta must be >= 0");
  RegimeLabel l;
  l.lower_threshold = std::min(1.0, 2.0 / (d - 2));
  l.upper_threshold = 2.0 * d / (d - 2);
  const double s = std::sqrt(delta);
  if (s < l.lower_threshold) {
    l.regime = Regime::subcritical;
  } else if (s >= l.upper_threshold) {
    l.regime = Regime::no_solution;
  } else {
    l.regime = Regime::indeterminate;
  }
  return l;
}

nlohmann::json to_json(const AdmissibilityReport& r) {
  nlohmann::json j;
  j["d"] = r.d;
  j["q"] = r.q;
  j["variant"] = std::string(to_string(r.variant));
  j["effective_delta"] = r.effective_delta;
  j["gamma"] = r.gamma;
  j["delta_a"] = r.delta_a;
  j["a_dev"] = r.a_dev;
  j["margin1"] = r.margin1;
  j["margin2"] = r.margin2;
  j["feasible"] = r.feasible;
  j["q_star"] = r.q_star ? nlohmann::json(*r.q_star) : nlohmann::json(nullptr);
  if (!r.feasible_q.empty()) {
    j["feasible_q_min"] = r.feasible_q.front();
    j["feasible_q_max"] = r.feasible_q.back();
    j["feasible_q_count"] = r.feasible_q.size();
    j["feasible_q_contiguous"] = r.feasible_contiguous;
  }
  return j;
}

nlohmann::json to_json(const RegimeLabel& r) {
  return {{"regime", std::string(to_string(r.regime))},
          {"lower_threshold", r.lower_threshold},
          {"upper_threshold", r.upper_threshold}};
}

}  // namespace ssde::admissibility
