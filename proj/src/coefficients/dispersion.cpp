#include "ssde/coefficients/dispersion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ssde/error.hpp"

namespace ssde::coefficients {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using MatX = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void set_identity(std::span<double> out, int d) {
  std::fill(out.begin(), out.begin() + d * d, 0.0);
  for (int i = 0; i < d; ++i) out[i * d + i] = 1.0;
}

// out = I + g u u^T
void identity_plus_rank_one(std::span<double> out, int d, double g, std::span<const double> u) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out[i * d + j] = (i == j ? 1.0 : 0.0) + g * u[i] * u[j];
}

std::vector<double> unit_radial(std::span<const double> x, double& r) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  r = std::sqrt(r2);
  std::vector<double> u(x.begin(), x.end());
  for (double& v : u) v /= r;
  return u;
}

double sine_log_weight(double c, std::span<const double> x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  const double s = std::sin(0.5 * std::log(r2));
  return c * s * s;
}

}  // namespace

Matrix sqrtm_psd(std::span<const double> a, int d) {
  Eigen::Map<const MatX> A(a.data(), d, d);
  Eigen::SelfAdjointEigenSolver<MatX> es(A);
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const MatX S = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  Matrix out(d * d);
  Eigen::Map<MatX>(out.data(), d, d) = 0.5 * (S + S.transpose());
  return out;
}

double min_eigenvalue(std::span<const double> a, int d) {
  Eigen::Map<const MatX> A(a.data(), d, d);
  Eigen::SelfAdjointEigenSolver<MatX> es(A, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

DispersionSpec::DispersionSpec(int d, Kind kind, std::vector<Point> singular)
    : d_(d), kind_(std::move(kind)), singular_(std::move(singular)) {
  const double lower = raw_lower_bound();
  if (!(lower > 0.0)) {
    throw Error(ErrorKind::NonPSDMatrix, "diffusion matrix is not bounded below by a positive constant");
  }
  nu_ = std::min(1.0, lower);
}

DispersionSpec DispersionSpec::identity(int d) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "dispersion needs d >= 3");
  return DispersionSpec(d, Identity{}, {});
}

DispersionSpec DispersionSpec::radial_projection(int d, double c) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "dispersion needs d >= 3");
  if (!(c > -1.0)) throw Error(ErrorKind::InvalidArgument, "radial_projection needs c > -1");
  return DispersionSpec(d, RadialProjection{c}, {Point(d, 0.0)});
}

DispersionSpec DispersionSpec::sine_log(int d, double c, std::vector<double> e) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "dispersion needs d >= 3");
  if (static_cast<int>(e.size()) != d) throw Error(ErrorKind::DimensionMismatch, "sine_log direction");
  double n = 0.0;
  for (double v : e) n += v * v;
  if (std::abs(std::sqrt(n) - 1.0) > 1e-12) throw Error(ErrorKind::InvalidArgument, "sine_log needs |e| = 1");
  if (!(c > -1.0)) throw Error(ErrorKind::InvalidArgument, "sine_log needs c > -1");
  return DispersionSpec(d, SineLog{c, std::move(e)}, {Point(d, 0.0)});
}

DispersionSpec DispersionSpec::sum(std::vector<DispersionSpec> children) {
  if (children.empty()) throw Error(ErrorKind::InvalidArgument, "sum of no dispersions");
  const int d = children.front().dimension();
  std::vector<Point> singular;
  for (const auto& c : children) {
    if (c.dimension() != d) throw Error(ErrorKind::DimensionMismatch, "sum children differ in dimension");
    for (const auto& p : c.singular_points())
      if (std::find(singular.begin(), singular.end(), p) == singular.end()) singular.push_back(p);
  }
  return DispersionSpec(d, Sum{std::move(children)}, std::move(singular));
}

DispersionSpec DispersionSpec::grid_sampled_sigma(GridField sigma, std::string source) {
  if (sigma.components != 9) throw Error(ErrorKind::DimensionMismatch, "grid-sampled sigma needs 9 components");
  GridField a(sigma.grid, 9);
  for (std::size_t p = 0; p < sigma.grid.size(); ++p) {
    Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> S(sigma.node(p).data());
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(a.node(p).data()) = S * S.transpose();
  }
  return DispersionSpec(3,
                        GridSampled{std::make_shared<const GridField>(std::move(sigma)),
                                    std::make_shared<const GridField>(std::move(a)), std::move(source)},
                        {});
}

DispersionSpec DispersionSpec::grid_sampled_a(GridField a, std::string source) {
  if (a.components != 9) throw Error(ErrorKind::DimensionMismatch, "grid-sampled a needs 9 components");
  GridField sigma(a.grid, 9);
  for (std::size_t p = 0; p < a.grid.size(); ++p) {
    const auto s = sqrtm_psd(a.node(p), 3);
    std::copy(s.begin(), s.end(), sigma.node(p).begin());
  }
  return DispersionSpec(3,
                        GridSampled{std::make_shared<const GridField>(std::move(sigma)),
                                    std::make_shared<const GridField>(std::move(a)), std::move(source)},
                        {});
}

std::string DispersionSpec::kind_name() const {
  return std::visit(Overloaded{[](const Identity&) { return "identity"; },
                               [](const RadialProjection&) { return "radial_projection"; },
                               [](const SineLog&) { return "sine_log"; }, [](const Sum&) { return "sum"; },
                               [](const GridSampled&) { return "grid_sampled"; }},
                    kind_);
}

bool DispersionSpec::is_identity() const {
  if (std::holds_alternative<Identity>(kind_)) return true;
  if (const auto* r = std::get_if<RadialProjection>(&kind_)) return r->c == 0.0;
  if (const auto* s = std::get_if<SineLog>(&kind_)) return s->c == 0.0;
  if (const auto* s = std::get_if<Sum>(&kind_))
    return std::all_of(s->children.begin(), s->children.end(), [](const auto& c) { return c.is_identity(); });
  return false;
}

void DispersionSpec::check_point(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) throw Error(ErrorKind::DimensionMismatch, "point dimension");
  for (const auto& p : singular_) {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += (x[i] - p[i]) * (x[i] - p[i]);
    if (std::sqrt(s) <= kSingularTolerance) throw Error(ErrorKind::SingularPoint, "dispersion evaluated at a singular point");
  }
}

void DispersionSpec::raw_a(std::span<const double> x, std::span<double> out) const {
  check_point(x);
  const int d = d_;
  std::visit(Overloaded{
                 [&](const Identity&) { set_identity(out, d); },
                 [&](const RadialProjection& k) {
                   double r;
                   const auto u = unit_radial(x, r);
                   identity_plus_rank_one(out, d, k.c, u);
                 },
                 [&](const SineLog& k) { identity_plus_rank_one(out, d, sine_log_weight(k.c, x), k.e); },
                 [&](const Sum& k) {
                   set_identity(out, d);
                   Matrix tmp(d * d);
                   for (const auto& c : k.children) {
                     c.raw_a(x, tmp);
                     for (int i = 0; i < d * d; ++i) out[i] += tmp[i];
                     for (int i = 0; i < d; ++i) out[i * d + i] -= 1.0;
                   }
                 },
                 [&](const GridSampled& k) { k.a->interpolate(x, out); },
             },
             kind_);
}

void DispersionSpec::raw_sigma(std::span<const double> x, std::span<double> out) const {
  check_point(x);
  const int d = d_;
  std::visit(Overloaded{
                 [&](const Identity&) { set_identity(out, d); },
                 [&](const RadialProjection& k) {
                   double r;
                   const auto u = unit_radial(x, r);
                   identity_plus_rank_one(out, d, std::sqrt(1.0 + k.c) - 1.0, u);
                 },
                 [&](const SineLog& k) {
                   identity_plus_rank_one(out, d, std::sqrt(1.0 + sine_log_weight(k.c, x)) - 1.0, k.e);
                 },
                 [&](const Sum&) {
                   Matrix a(d * d);
                   raw_a(x, a);
                   const auto s = sqrtm_psd(a, d);
                   std::copy(s.begin(), s.end(), out.begin());
                 },
                 [&](const GridSampled& k) { k.sigma->interpolate(x, out); },
             },
             kind_);
}

void DispersionSpec::a(std::span<const double> x, std::span<double> out) const {
  raw_a(x, out);
  if (nu_ != 1.0)
    for (int i = 0; i < d_ * d_; ++i) out[i] /= nu_;
}

void DispersionSpec::sigma(std::span<const double> x, std::span<double> out) const {
  raw_sigma(x, out);
  if (nu_ != 1.0) {
    const double s = 1.0 / std::sqrt(nu_);
    for (int i = 0; i < d_ * d_; ++i) out[i] *= s;
  }
}

Matrix DispersionSpec::a(std::span<const double> x) const {
  Matrix out(d_ * d_);
  a(x, out);
  return out;
}

Matrix DispersionSpec::sigma(std::span<const double> x) const {
  Matrix out(d_ * d_);
  sigma(x, out);
  return out;
}

double DispersionSpec::raw_lower_bound() const {
  return std::visit(Overloaded{
                        [](const Identity&) { return 1.0; },
                        [](const RadialProjection& k) { return std::min(1.0, 1.0 + k.c); },
                        [](const SineLog& k) { return std::min(1.0, 1.0 + k.c); },
                        [](const Sum& k) {
                          double lb = 1.0;
                          for (const auto& c : k.children) lb += std::min(0.0, c.raw_lower_bound() - 1.0);
                          return lb;
                        },
                        [](const GridSampled& k) {
                          double lb = std::numeric_limits<double>::infinity();
                          for (std::size_t p = 0; p < k.a->grid.size(); ++p)
                            lb = std::min(lb, min_eigenvalue(k.a->node(p), 3));
                          return lb;
                        },
                    },
                    kind_);
}

namespace {
// |raw a - I| operator-norm sup for one child, used in sum bounds.
double raw_deviation(const DispersionSpec& s);
}  // namespace

double DispersionSpec::a_deviation() const {
  const double inv = 1.0 / nu_;
  return std::visit(Overloaded{
                        [&](const Identity&) { return 0.0; },
                        [&](const RadialProjection& k) {
                          return std::max(std::abs((1.0 + k.c) * inv - 1.0), std::abs(inv - 1.0));
                        },
                        [&](const SineLog& k) {
                          return std::max(std::abs((1.0 + k.c) * inv - 1.0), std::abs(inv - 1.0));
                        },
                        [&](const Sum& k) {
                          double dev = 0.0;
                          for (const auto& c : k.children) dev += raw_deviation(c);
                          return dev * inv + std::abs(inv - 1.0);
                        },
                        [&](const GridSampled& k) {
                          double dev = 0.0;
                          for (std::size_t p = 0; p < k.a->grid.size(); ++p) {
                            Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>> A(k.a->node(p).data());
                            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A * inv, Eigen::EigenvaluesOnly);
                            dev = std::max({dev, std::abs(es.eigenvalues()(0) - 1.0), std::abs(es.eigenvalues()(2) - 1.0)});
                          }
                          return dev;
                        },
                    },
                    kind_);
}

namespace {
double raw_deviation(const DispersionSpec& s) {
  // a_deviation() of a spec with nu = 1 is its raw deviation; otherwise undo the rescale.
  const double nu = s.normalization();
  if (nu == 1.0) return s.a_deviation();
  return std::visit(Overloaded{
                        [](const DispersionSpec::RadialProjection& k) { return std::abs(k.c); },
                        [](const DispersionSpec::SineLog& k) { return std::abs(k.c); },
                        [&](const auto&) { return nu * s.a_deviation() + std::abs(1.0 - nu); },
                    },
                    s.kind());
}
}  // namespace

std::vector<double> DispersionSpec::raw_diag_excess() const {
  const int d = d_;
  std::vector<double> ex(d + 1, 0.0);
  std::visit(Overloaded{
                 [&](const Identity&) {},
                 [&](const RadialProjection& k) {
                   for (int l = 0; l < d; ++l) ex[l] = std::max(0.0, k.c);
                   ex[d] = k.c;
                 },
                 [&](const SineLog& k) {
                   for (int l = 0; l < d; ++l) ex[l] = std::max(0.0, k.c) * k.e[l] * k.e[l];
                   ex[d] = std::max(0.0, k.c);
                 },
                 [&](const Sum& k) {
                   for (const auto& c : k.children) {
                     const auto ce = c.raw_diag_excess();
                     for (int l = 0; l <= d; ++l) ex[l] += ce[l];
                   }
                 },
                 [&](const GridSampled& k) {
                   std::fill(ex.begin(), ex.end(), -std::numeric_limits<double>::infinity());
                   for (std::size_t p = 0; p < k.a->grid.size(); ++p) {
                     const auto A = k.a->node(p);
                     double tr = 0.0;
                     for (int l = 0; l < 3; ++l) {
                       ex[l] = std::max(ex[l], A[l * 3 + l] - 1.0);
                       tr += A[l * 3 + l] - 1.0;
                     }
                     ex[3] = std::max(ex[3], tr);
                   }
                 },
             },
             kind_);
  return ex;
}

std::vector<double> DispersionSpec::sigma_column_sups() const {
  if (const auto* g = std::get_if<GridSampled>(&kind_)) {
    std::vector<double> sup(3, 0.0);
    for (std::size_t p = 0; p < g->sigma->grid.size(); ++p) {
      const auto S = g->sigma->node(p);
      for (int l = 0; l < 3; ++l) {
        double c2 = 0.0;
        for (int i = 0; i < 3; ++i) c2 += S[i * 3 + l] * S[i * 3 + l];
        sup[l] = std::max(sup[l], std::sqrt(c2 / nu_));
      }
    }
    return sup;
  }
  const auto ex = raw_diag_excess();
  std::vector<double> sup(d_);
  for (int l = 0; l < d_; ++l) sup[l] = std::sqrt((1.0 + ex[l]) / nu_);
  return sup;
}

double DispersionSpec::sigma_sup() const {
  if (const auto* g = std::get_if<GridSampled>(&kind_)) {
    double sup = 0.0;
    for (std::size_t p = 0; p < g->sigma->grid.size(); ++p) {
      double f2 = 0.0;
      for (double v : g->sigma->node(p)) f2 += v * v;
      sup = std::max(sup, f2);
    }
    return std::sqrt(sup / nu_);
  }
  const auto ex = raw_diag_excess();
  return std::sqrt((d_ + ex[d_]) / nu_);
}

std::vector<Matrix> eval_coefficients(const DispersionSpec& disp, std::span<const Point> points, bool want_sigma) {
  std::vector<Matrix> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(want_sigma ? disp.sigma(p) : disp.a(p));
  return out;
}

}  // namespace ssde::coefficients
