#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ssde/coefficients/derived.hpp"
#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"

namespace ssde::admissibility {

/// Which relative bound enters the solvability condition:
/// raw uses delta, ito uses delta + delta_a, stratonovich delta + delta_a + delta_c.
enum class Variant { raw, ito, stratonovich };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

double effective_delta(Variant v, double delta, double delta_a, double delta_c);

struct AdmissibilityReport {
  int d = 3;
  double q = 0.0;
  Variant variant = Variant::raw;
  double effective_delta = 0.0;
  double gamma = 0.0;
  double delta_a = 0.0;
  double a_dev = 0.0;
  double margin1 = 0.0;
  double margin2 = 0.0;
  bool feasible = false;
  std::optional<double> q_star;
  std::vector<double> feasible_q;  // every feasible grid point (search_q only)
  bool feasible_contiguous = true;  // false when feasible points are separated by infeasible ones
};

/// Both margins of the solvability condition at exponent q for the given
/// effective delta. Feasible iff both margins are strictly positive and
/// q > max(2, d-2).
AdmissibilityReport check_cond0(int d, double q, double delta_hat, double gamma, double delta_a, double a_dev);

/// Points q_lo + k*step (k >= 1) up to q_max, with q_lo = max(2, d-2, q_min).
std::vector<double> make_q_grid(int d, double q_min = 0.0, double q_max = 200.0, double q_step = 0.05);

/// Report at the smallest feasible q of `q_grid`; when none is feasible the
/// report is taken at the grid point with the largest smaller margin.
AdmissibilityReport search_q(int d, double delta_hat, double gamma, double delta_a, double a_dev,
                             std::span<const double> q_grid);

/// Ito drift c of the Stratonovich equation (see coefficients::stratonovich_correction_field).
coefficients::FieldSpec stratonovich_correction(const coefficients::DispersionSpec& disp,
                                                coefficients::DerivMode mode,
                                                const Grid* grid = nullptr);

/// delta_c <= (1/2) |sigma|_inf^2 sum_{r,j} delta_rj.
double bound_delta_c(std::span<const double> delta_rj, double sigma_sup);

struct GammaBound {
  std::vector<double> gamma_rl;  // d x d row-major
  double gamma = 0.0;
};

/// gamma_rl <= [|sigma_{.l}|_inf (sum_j delta_rj)^{1/2} + |sigma|_inf delta_rl^{1/2}]^2.
GammaBound bound_gamma_from_sigma(std::span<const double> delta_rj, std::span<const double> column_sups,
                                  double sigma_sup);

enum class Regime { subcritical, no_solution, indeterminate };
std::string_view to_string(Regime r);

struct RegimeLabel {
  Regime regime = Regime::indeterminate;
  double lower_threshold = 0.0;  // min(1, 2/(d-2)), compared with sqrt(delta)
  double upper_threshold = 0.0;  // 2d/(d-2)
};

RegimeLabel classify_hardy_regime(double delta, int d);

nlohmann::json to_json(const AdmissibilityReport& r);
nlohmann::json to_json(const RegimeLabel& r);

}  // namespace ssde::admissibility
