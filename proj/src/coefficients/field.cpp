#include "ssde/coefficients/field.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssde/error.hpp"
#include "ssde/parallel.hpp"

namespace ssde::coefficients {

namespace {

void require_dimension(int d) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "fields need d >= 3, got " + std::to_string(d));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

}  // namespace

FieldSpec::FieldSpec(int d, Kind kind, std::vector<Point> singular)
    : d_(d), kind_(std::move(kind)), singular_(std::move(singular)) {}

FieldSpec FieldSpec::hardy(int d, double kappa, int sign) {
  require_dimension(d);
  if (!(kappa >= 0.0)) throw Error(ErrorKind::InvalidArgument, "hardy kappa must be >= 0");
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "hardy sign must be +1 or -1");
  return FieldSpec(d, Hardy{kappa, sign}, {Point(d, 0.0)});
}

FieldSpec FieldSpec::bounded_box(int d, double M, std::vector<double> direction, double half_width) {
  require_dimension(d);
  if (!(M >= 0.0)) throw Error(ErrorKind::InvalidArgument, "bounded_box M must be >= 0");
  if (direction.empty()) {
    direction.assign(d, 0.0);
    direction[0] = 1.0;
  }
  if (static_cast<int>(direction.size()) != d) throw Error(ErrorKind::DimensionMismatch, "bounded_box direction");
  const double n = norm(direction);
  if (n == 0.0) throw Error(ErrorKind::InvalidArgument, "bounded_box direction must be nonzero");
  for (double& v : direction) v /= n;
  if (!(half_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "bounded_box half_width must be > 0");
  return FieldSpec(d, BoundedBox{M, std::move(direction), half_width}, {});
}

FieldSpec FieldSpec::constant(std::vector<double> value) {
  const int d = static_cast<int>(value.size());
  const double M = norm(value);
  if (M == 0.0) return zero(d);
  return bounded_box(d, M, std::move(value));
}

FieldSpec FieldSpec::zero(int d) { return bounded_box(d, 0.0); }

FieldSpec FieldSpec::grid_sampled(std::shared_ptr<const GridField> data, std::string source) {
  if (!data || data->components != 3) {
    throw Error(ErrorKind::DimensionMismatch, "grid-sampled drift needs 3 components per node");
  }
  return FieldSpec(3, GridSampled{std::move(data), std::move(source)}, {});
}

FieldSpec FieldSpec::sum(std::vector<FieldSpec> children) {
  if (children.empty()) throw Error(ErrorKind::InvalidArgument, "sum of no fields");
  const int d = children.front().dimension();
  std::vector<Point> singular;
  for (const auto& c : children) {
    if (c.dimension() != d) throw Error(ErrorKind::DimensionMismatch, "sum children differ in dimension");
    for (const auto& p : c.singular_points()) {
      if (std::find(singular.begin(), singular.end(), p) == singular.end()) singular.push_back(p);
    }
  }
  return FieldSpec(d, Sum{std::move(children)}, std::move(singular));
}

FieldSpec FieldSpec::mollified(FieldSpec base, int n, double eps, std::shared_ptr<const GridField> data) {
  if (!data || data->components != 3) throw Error(ErrorKind::DimensionMismatch, "mollified payload");
  return FieldSpec(3, Mollified{std::make_shared<const FieldSpec>(std::move(base)), n, eps, std::move(data)}, {});
}

FieldSpec FieldSpec::derived(int d, std::string name,
                             std::function<void(std::span<const double>, std::span<double>)> fn,
                             std::vector<Point> singular_points) {
  require_dimension(d);
  return FieldSpec(d, Derived{std::move(name), std::move(fn)}, std::move(singular_points));
}

std::string FieldSpec::kind_name() const {
  return std::visit(Overloaded{[](const Hardy&) { return std::string("hardy"); },
                               [](const BoundedBox&) { return std::string("bounded_box"); },
                               [](const GridSampled&) { return std::string("grid_sampled"); },
                               [](const Sum&) { return std::string("sum"); },
                               [](const Mollified&) { return std::string("mollified"); },
                               [](const Derived& d) { return "derived:" + d.name; }},
                    kind_);
}

void FieldSpec::eval(std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != d_ || static_cast<int>(out.size()) < d_) {
    throw Error(ErrorKind::DimensionMismatch, "point dimension does not match field dimension");
  }
  for (const auto& p : singular_) {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) s += (x[i] - p[i]) * (x[i] - p[i]);
    if (std::sqrt(s) <= kSingularTolerance) {
      std::ostringstream msg;
      msg << "evaluation at singular point (" << x[0];
      for (int i = 1; i < d_; ++i) msg << ", " << x[i];
      msg << ")";
      throw Error(ErrorKind::SingularPoint, msg.str());
    }
  }
  std::visit(Overloaded{
                 [&](const Hardy& k) {
                   double r2 = 0.0;
                   for (int i = 0; i < d_; ++i) r2 += x[i] * x[i];
                   const double s = k.sign * k.kappa / r2;
                   for (int i = 0; i < d_; ++i) out[i] = s * x[i];
                 },
                 [&](const BoundedBox& k) {
                   bool inside = true;
                   for (int i = 0; i < d_; ++i) inside = inside && std::abs(x[i]) <= k.half_width;
                   for (int i = 0; i < d_; ++i) out[i] = inside ? k.M * k.direction[i] : 0.0;
                 },
                 [&](const GridSampled& k) { k.data->interpolate(x, out); },
                 [&](const Sum& k) {
                   std::fill(out.begin(), out.begin() + d_, 0.0);
                   std::vector<double> tmp(d_);
                   for (const auto& c : k.children) {
                     c.eval(x, tmp);
                     for (int i = 0; i < d_; ++i) out[i] += tmp[i];
                   }
                 },
                 [&](const Mollified& k) { k.data->interpolate(x, out); },
                 [&](const Derived& k) { k.fn(x, out); },
             },
             kind_);
}

std::vector<double> FieldSpec::eval(std::span<const double> x) const {
  std::vector<double> out(d_);
  eval(x, out);
  return out;
}

FieldSpec FieldSpec::scaled(double s) const {
  if (const auto* h = std::get_if<Hardy>(&kind_)) {
    return hardy(d_, std::abs(s) * h->kappa, s < 0 ? -h->sign : h->sign);
  }
  if (const auto* b = std::get_if<BoundedBox>(&kind_)) {
    auto dir = b->direction;
    if (s < 0)
      for (double& v : dir) v = -v;
    return bounded_box(d_, std::abs(s) * b->M, dir, b->half_width);
  }
  auto self = std::make_shared<const FieldSpec>(*this);
  const int d = d_;
  return derived(
      d_, "scaled",
      [self, s, d](std::span<const double> x, std::span<double> out) {
        self->eval(x, out);
        for (int i = 0; i < d; ++i) out[i] *= s;
      },
      singular_);
}

bool FieldSpec::is_zero() const {
  if (const auto* h = std::get_if<Hardy>(&kind_)) return h->kappa == 0.0;
  if (const auto* b = std::get_if<BoundedBox>(&kind_)) return b->M == 0.0;
  if (const auto* s = std::get_if<Sum>(&kind_)) {
    return std::all_of(s->children.begin(), s->children.end(), [](const FieldSpec& c) { return c.is_zero(); });
  }
  return false;
}

std::shared_ptr<const GridField> FieldSpec::grid_data() const {
  if (const auto* g = std::get_if<GridSampled>(&kind_)) return g->data;
  if (const auto* m = std::get_if<Mollified>(&kind_)) return m->data;
  return nullptr;
}

std::vector<std::vector<double>> eval_coefficients(const FieldSpec& field, std::span<const Point> points) {
  std::vector<std::vector<double>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(field.eval(p));
  return out;
}

GridField sample_field(const FieldSpec& field, const Grid& grid) {
  if (field.dimension() != 3) throw Error(ErrorKind::DimensionMismatch, "grid sampling needs a 3-D field");
  GridField out(grid, 3);
  parallel_for(0, grid.size(), [&](std::size_t idx) {
    const Vec3 x = grid.point(idx);
    try {
      field.eval(x, out.node(idx));
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::SingularPoint) {
        throw Error(ErrorKind::SingularOnGrid, "grid node coincides with a singular point of the field");
      }
      throw;
    }
  });
  return out;
}

GridFunction sample_magnitude(const FieldSpec& field, const Grid& grid) {
  const GridField b = sample_field(field, grid);
  GridFunction mag(grid.size());
  for (std::size_t i = 0; i < mag.size(); ++i) {
    const auto v = b.node(i);
    mag[i] = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
  }
  return mag;
}

}  // namespace ssde::coefficients
