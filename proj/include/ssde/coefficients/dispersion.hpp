#pragma once

#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssde/coefficients/field.hpp"
#include "ssde/grid.hpp"

namespace ssde::coefficients {

/// Row-major d x d matrix.
using Matrix = std::vector<double>;

/// Dispersion sigma and diffusion matrix a = sigma sigma^T.
///
/// The paper normalizes a >= I. Every spec computes a lower bound nu for the
/// spectrum of its raw matrix; when nu < 1 the spec evaluates a/nu and
/// sigma/sqrt(nu) and reports nu through normalization(). Specs whose raw
/// matrix is not bounded below by a positive constant are rejected.
class DispersionSpec {
 public:
  struct Identity {};
  /// a = I + c x x^T/|x|^2, c > -1.
  struct RadialProjection {
    double c = 0.0;
  };
  /// a = I + c sin^2(log|x|) e e^T, |e| = 1.
  struct SineLog {
    double c = 0.0;
    std::vector<double> e;
  };
  /// a = I + sum_k (a_k - I) over the raw child matrices; sigma = a^{1/2}.
  struct Sum {
    std::vector<DispersionSpec> children;
  };
  /// Node samples of sigma and a (9 components each, 3-D only).
  struct GridSampled {
    std::shared_ptr<const GridField> sigma;
    std::shared_ptr<const GridField> a;
    std::string source;
  };
  using Kind = std::variant<Identity, RadialProjection, SineLog, Sum, GridSampled>;

  static DispersionSpec identity(int d);
  static DispersionSpec radial_projection(int d, double c);
  static DispersionSpec sine_log(int d, double c, std::vector<double> e);
  static DispersionSpec sum(std::vector<DispersionSpec> children);
  /// From samples of a symmetric sigma; a = sigma sigma^T is formed per node.
  static DispersionSpec grid_sampled_sigma(GridField sigma, std::string source = {});
  /// From samples of a; sigma is the symmetric square root per node.
  static DispersionSpec grid_sampled_a(GridField a, std::string source = {});

  int dimension() const noexcept { return d_; }
  const Kind& kind() const noexcept { return kind_; }
  std::string kind_name() const;
  const std::vector<Point>& singular_points() const noexcept { return singular_; }

  /// Rescaling factor nu (a_reported = a_raw / nu); 1 when no rescale was needed.
  double normalization() const noexcept { return nu_; }

  void sigma(std::span<const double> x, std::span<double> out) const;
  void a(std::span<const double> x, std::span<double> out) const;
  Matrix sigma(std::span<const double> x) const;
  Matrix a(std::span<const double> x) const;

  /// Raw (unnormalized) matrices.
  void raw_a(std::span<const double> x, std::span<double> out) const;
  void raw_sigma(std::span<const double> x, std::span<double> out) const;

  /// sup_x of the operator norm |a(x) - I|; exact for the closed-form
  /// families, an upper bound for sums.
  double a_deviation() const;

  /// sup_x sqrt(a_ll(x)) per column l: the sup of the Euclidean column norm
  /// of the symmetric sigma. Upper bound for sums.
  std::vector<double> sigma_column_sups() const;

  /// sup_x sqrt(tr a(x)): the sup of the Frobenius norm of sigma.
  double sigma_sup() const;

  bool is_identity() const;

 private:
  DispersionSpec(int d, Kind kind, std::vector<Point> singular);
  void check_point(std::span<const double> x) const;
  /// Lower bound of the raw spectrum, used for the normalization.
  double raw_lower_bound() const;
  /// Upper bounds of raw (a - I)_ll and tr(a - I) (positive parts).
  std::vector<double> raw_diag_excess() const;

  int d_ = 3;
  Kind kind_;
  std::vector<Point> singular_;
  double nu_ = 1.0;
};

/// Evaluates a (or sigma when want_sigma) at each point.
std::vector<Matrix> eval_coefficients(const DispersionSpec& disp, std::span<const Point> points,
                                      bool want_sigma = false);

/// Symmetric square root of a symmetric positive semidefinite matrix.
Matrix sqrtm_psd(std::span<const double> a, int d);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(std::span<const double> a, int d);

}  // namespace ssde::coefficients
