#include "ssde/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "ssde/error.hpp"

namespace ssde {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : data(static_cast<double*>(fftw_malloc(sizeof(double) * n))) {
    if (!data) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(data); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* data;
};
}  // namespace

struct DirichletSpectrum::Plan {
  fftw_plan plan = nullptr;
  ~Plan() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

DirichletSpectrum::DirichletSpectrum(const Grid& grid) : grid_(grid), plan_(std::make_unique<Plan>()) {
  const int m = grid.nodes_per_axis();
  const double h = grid.spacing();
  axis_.resize(m);
  for (int k = 0; k < m; ++k) {
    axis_[k] = (2.0 - 2.0 * std::cos(std::numbers::pi * (k + 1) / (m + 1))) / (h * h);
  }
  eig_.resize(grid.size());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) eig_[grid.index(i, j, k)] = axis_[i] + axis_[j] + axis_[k];

  FftwBuffer scratch(grid.size());
  std::lock_guard lock(fftw_planner_mutex());
  plan_->plan = fftw_plan_r2r_3d(m, m, m, scratch.data, scratch.data, FFTW_RODFT00, FFTW_RODFT00, FFTW_RODFT00,
                                 FFTW_ESTIMATE);
  if (!plan_->plan) throw Error(ErrorKind::InvalidArgument, "FFTW could not plan the sine transform");
}

DirichletSpectrum::~DirichletSpectrum() = default;

void DirichletSpectrum::apply(std::span<const double> in, std::span<double> out,
                              const std::function<double(double)>& multiplier) const {
  const std::size_t n = grid_.size();
  if (in.size() != n || out.size() != n) throw Error(ErrorKind::DimensionMismatch, "grid function size");
  FftwBuffer buf(n);
  std::copy(in.begin(), in.end(), buf.data);
  fftw_execute_r2r(plan_->plan, buf.data, buf.data);
  // RODFT00 applied twice scales by 2(m+1) per axis.
  const double norm = 1.0 / std::pow(2.0 * (grid_.nodes_per_axis() + 1), 3);
  for (std::size_t i = 0; i < n; ++i) buf.data[i] *= multiplier(eig_[i]) * norm;
  fftw_execute_r2r(plan_->plan, buf.data, buf.data);
  std::copy(buf.data, buf.data + n, out.begin());
}

void DirichletSpectrum::apply_shifted_power(double shift, double power, std::span<const double> in,
                                            std::span<double> out) const {
  const std::size_t n = grid_.size();
  if (in.size() != n || out.size() != n) throw Error(ErrorKind::DimensionMismatch, "grid function size");
  FftwBuffer buf(n);
  std::copy(in.begin(), in.end(), buf.data);
  fftw_execute_r2r(plan_->plan, buf.data, buf.data);
  const double norm = 1.0 / std::pow(2.0 * (grid_.nodes_per_axis() + 1), 3);
  if (power == 1.0) {
    for (std::size_t i = 0; i < n; ++i) buf.data[i] *= norm / (shift + eig_[i]);
  } else {
    for (std::size_t i = 0; i < n; ++i) buf.data[i] *= norm * std::pow(shift + eig_[i], -power);
  }
  fftw_execute_r2r(plan_->plan, buf.data, buf.data);
  std::copy(buf.data, buf.data + n, out.begin());
}

void convolve_aperiodic(const Grid& grid, std::span<const double> f,
                        const std::function<double(int, int, int)>& kernel, std::span<double> out) {
  const int m = grid.nodes_per_axis();
  const int n = 2 * m;
  const std::size_t real_size = static_cast<std::size_t>(n) * n * n;
  const std::size_t complex_size = static_cast<std::size_t>(n) * n * (n / 2 + 1);
  if (f.size() != grid.size() || out.size() != grid.size()) {
    throw Error(ErrorKind::DimensionMismatch, "grid function size");
  }
  FftwBuffer fr(real_size), kr(real_size);
  auto* fc = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size));
  auto* kc = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size));
  if (!fc || !kc) throw std::bad_alloc();
  std::fill(fr.data, fr.data + real_size, 0.0);
  auto at = [n](int i, int j, int k) { return (static_cast<std::size_t>(i) * n + j) * n + k; };
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) fr.data[at(i, j, k)] = f[grid.index(i, j, k)];
  // offsets -(m-1)..(m-1) stored modulo n; index m (offset +-m) is never reached
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int di = i < m ? i : i - n, dj = j < m ? j : j - n, dk = k < m ? k : k - n;
        kr.data[at(i, j, k)] = (i == m || j == m || k == m) ? 0.0 : kernel(di, dj, dk);
      }
  fftw_plan fwd, bwd;
  {
    std::lock_guard lock(fftw_planner_mutex());
    fwd = fftw_plan_dft_r2c_3d(n, n, n, fr.data, fc, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_3d(n, n, n, fc, fr.data, FFTW_ESTIMATE);
  }
  fftw_execute_dft_r2c(fwd, fr.data, fc);
  fftw_execute_dft_r2c(fwd, kr.data, kc);
  const double scale = 1.0 / static_cast<double>(real_size);
  for (std::size_t i = 0; i < complex_size; ++i) {
    const double re = fc[i][0] * kc[i][0] - fc[i][1] * kc[i][1];
    const double im = fc[i][0] * kc[i][1] + fc[i][1] * kc[i][0];
    fc[i][0] = re * scale;
    fc[i][1] = im * scale;
  }
  fftw_execute_dft_c2r(bwd, fc, fr.data);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) out[grid.index(i, j, k)] = fr.data[at(i, j, k)];
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  fftw_free(fc);
  fftw_free(kc);
}

void apply_negative_laplacian(const Grid& grid, std::span<const double> u, std::span<double> y) {
  const int m = grid.nodes_per_axis();
  const double inv_h2 = 1.0 / (grid.spacing() * grid.spacing());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const std::size_t p = grid.index(i, j, k);
        double acc = 6.0 * u[p];
        if (i > 0) acc -= u[grid.index(i - 1, j, k)];
        if (i + 1 < m) acc -= u[grid.index(i + 1, j, k)];
        if (j > 0) acc -= u[grid.index(i, j - 1, k)];
        if (j + 1 < m) acc -= u[grid.index(i, j + 1, k)];
        if (k > 0) acc -= u[grid.index(i, j, k - 1)];
        if (k + 1 < m) acc -= u[grid.index(i, j, k + 1)];
        y[p] = acc * inv_h2;
      }
}

}  // namespace ssde
