#pragma once

#include <optional>
#include <string_view>

#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"
#include "ssde/grid.hpp"

namespace ssde::coefficients {

enum class DerivMode { analytic, finite_difference };

DerivMode parse_deriv_mode(std::string_view s);
std::string_view to_string(DerivMode m);

/// (div a)^k = sum_i d_i a_ik.
///
/// Analytic mode covers identity, radial_projection (returned as a Hardy
/// field), sine_log and sums of those. Finite-difference mode samples a at
/// node +- h e_i and returns a grid_sampled field on `grid`.
FieldSpec divergence_of_a(const DispersionSpec& disp, DerivMode mode, const Grid* grid = nullptr);

/// c_i = (1/sqrt 2) sum_{r,j} (d_r sigma_ij) sigma_rj, the drift that turns
/// the Stratonovich equation into Ito form. Analytic for identity,
/// radial_projection and sine_log.
FieldSpec stratonovich_correction_field(const DispersionSpec& disp, DerivMode mode, const Grid* grid = nullptr);

/// Constants C with |d_r sigma_{.j}(x)| <= C_rj/|x| and |d_r a_{.l}(x)| <= A_rl/|x|.
/// Combined with Hardy's inequality they give delta_rj <= (2 C_rj/(d-2))^2
/// and gamma_rl <= (2 A_rl/(d-2))^2.
struct GradientMajorants {
  Matrix a_grad;                    // d x d, row r, column l
  std::optional<Matrix> sigma_grad;  // absent when sigma has no closed form (sums)
};

/// Throws UnsupportedAnalytic for grid-sampled dispersions.
GradientMajorants gradient_majorants(const DispersionSpec& disp);

/// (2 C/(d-2))^2 entrywise.
Matrix hardy_bounds_from_majorants(const Matrix& c, int d);

}  // namespace ssde::coefficients
