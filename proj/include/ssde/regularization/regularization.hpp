#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"
#include "ssde/coefficients/form_bound.hpp"
#include "ssde/grid.hpp"

namespace ssde::regularization {

/// Heat time as a function of the schedule index.
enum class EpsRule { inverse_square, inverse_cube };

std::string_view to_string(EpsRule r);
EpsRule parse_eps_rule(std::string_view s);

struct MollificationSchedule {
  int n = 1;
  double eps = 1.0;
  EpsRule rule = EpsRule::inverse_square;

  /// Standard deviation sqrt(2 eps) of the heat kernel per axis.
  double kernel_std() const;
  /// Kernel truncation radius: 6 standard deviations.
  double kernel_radius() const;
};

MollificationSchedule make_schedule(int n, EpsRule rule = EpsRule::inverse_square);

/// eta_n(r) = 1 for r < n, n + 1 - r on [n, n+1], 0 beyond.
double cutoff_eta(int n, double r);
std::vector<double> cutoff_eta(int n, std::span<const coefficients::Point> points);

/// Which matrix is smoothed: a for the Ito equation, sigma for Stratonovich.
enum class MatrixTarget { a, sigma };

/// b_n = e^{eps Delta}(1_n b) sampled on `grid`.
///
/// The indicator {|x| <= n, |b(x)| <= n} is evaluated on the nodes of the
/// grid extended by the kernel radius; a node at a singular point counts as
/// outside it. The heat semigroup is a separable, normalized discrete
/// Gaussian truncated at 6 standard deviations.
coefficients::FieldSpec mollify_field(const coefficients::FieldSpec& base, const MollificationSchedule& schedule,
                                      const Grid& grid);

/// a_n = I + e^{eps Delta}(eta_n (a - I)), or the same construction on sigma
/// with a_n = sigma_n sigma_n^T.
coefficients::DispersionSpec mollify_dispersion(const coefficients::DispersionSpec& base,
                                                const MollificationSchedule& schedule, const Grid& grid,
                                                MatrixTarget target = MatrixTarget::a);

/// Separable discrete heat kernel applied to node-major data with
/// `components` values per node, on a grid padded by `pad` nodes; returns
/// the values on the central (unpadded) nodes.
std::vector<double> gaussian_smooth_cropped(const Grid& padded, std::span<const double> values, int components,
                                            double std_dev, int pad);

struct PreservationRow {
  int n = 0;
  double eps = 0.0;
  double delta_n = 0.0;
  double ratio = 0.0;  // delta_n / delta_base, 0 when both vanish
  double residual = 0.0;
};

struct PreservationTable {
  double delta_base = 0.0;
  double lambda = 1.0;
  std::vector<PreservationRow> rows;
};

/// F_delta estimates of b_n on `grid` for each n, against the estimate of b.
PreservationTable verify_bound_preservation(const coefficients::FieldSpec& base, std::span<const int> n_list,
                                            double lambda, const Grid& grid, EpsRule rule = EpsRule::inverse_square);

nlohmann::json to_json(const PreservationTable& t);
nlohmann::json to_json(const MollificationSchedule& s);

}  // namespace ssde::regularization
