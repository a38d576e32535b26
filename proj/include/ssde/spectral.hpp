#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "ssde/grid.hpp"

namespace ssde {

/// Exact spectral calculus for the 7-point Dirichlet Laplacian on a Grid.
///
/// The discrete operator -Delta_h with zero ghost values is diagonalised by
/// the type-I discrete sine transform along each axis, so functions of it
/// (inverses, fractional powers) are applied in O(N log N).
class DirichletSpectrum {
 public:
  explicit DirichletSpectrum(const Grid& grid);
  ~DirichletSpectrum();
  DirichletSpectrum(const DirichletSpectrum&) = delete;
  DirichletSpectrum& operator=(const DirichletSpectrum&) = delete;

  const Grid& grid() const noexcept { return grid_; }

  /// Eigenvalues of the 1-D second difference, (2 - 2 cos(pi k/(m+1)))/h^2.
  std::span<const double> axis_eigenvalues() const noexcept { return axis_; }

  /// out = multiplier(-Delta_h) in. `in` and `out` may alias.
  void apply(std::span<const double> in, std::span<double> out,
             const std::function<double(double)>& multiplier) const;

  /// out = (shift - Delta_h)^(-power) in.
  void apply_shifted_power(double shift, double power, std::span<const double> in, std::span<double> out) const;

  /// out = (shift - Delta_h)^(-1) in.
  void solve_shifted(double shift, std::span<const double> in, std::span<double> out) const {
    apply_shifted_power(shift, 1.0, in, out);
  }

 private:
  struct Plan;
  Grid grid_;
  std::vector<double> axis_;
  std::vector<double> eig_;  // eigenvalue of -Delta_h per spectral index
  std::unique_ptr<Plan> plan_;
};

/// FFTW planning is not thread-safe; every plan creation and destruction in
/// the library takes this lock. Execution with new-array calls does not.
std::mutex& fftw_planner_mutex();

/// out = sum_y kernel(x - y) f(y) over the nodes of `grid`, with the kernel
/// evaluated at lattice offsets (in units of h). Aperiodic: computed by a
/// zero-padded FFT of size 2m per axis.
void convolve_aperiodic(const Grid& grid, std::span<const double> f,
                        const std::function<double(int, int, int)>& kernel, std::span<double> out);

/// y = -Delta_h u with the 7-point stencil and zero values outside the box.
void apply_negative_laplacian(const Grid& grid, std::span<const double> u, std::span<double> y);

}  // namespace ssde
