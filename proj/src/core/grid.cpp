#include "ssde/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "ssde/error.hpp"

namespace ssde {

Grid::Grid(int nodes_per_axis, double half_width)
    : m_(nodes_per_axis), half_width_(half_width), h_(2.0 * half_width / nodes_per_axis) {
  if (nodes_per_axis < 2 || !(half_width > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least 2 nodes per axis and a positive extent");
  }
}

Grid Grid::with_max_spacing(double half_width, double max_spacing) {
  int m = static_cast<int>(std::ceil(2.0 * half_width / max_spacing - 1e-12));
  if (m % 2 != 0) ++m;
  return Grid(std::max(m, 2), half_width);
}

Grid Grid::padded(int extra) const {
  if (extra <= 0) return *this;
  return Grid(m_ + 2 * extra, half_width_ + extra * h_);
}

bool Grid::same_as(const Grid& other) const noexcept {
  return m_ == other.m_ && std::abs(half_width_ - other.half_width_) <= 1e-12 * std::max(1.0, half_width_);
}

namespace {

struct AxisWeight {
  int i0;
  double w;
};

AxisWeight axis_weight(const Grid& g, double x) {
  const double t = (x + g.half_width()) / g.spacing() - 0.5;
  const int m = g.nodes_per_axis();
  int i0 = static_cast<int>(std::floor(t));
  i0 = std::clamp(i0, 0, m - 2);
  const double w = std::clamp(t - i0, 0.0, 1.0);
  return {i0, w};
}

}  // namespace

void GridField::interpolate(std::span<const double> x, std::span<double> out) const {
  const auto ax = axis_weight(grid, x[0]);
  const auto ay = axis_weight(grid, x[1]);
  const auto az = axis_weight(grid, x[2]);
  const int nc = components;
  std::fill(out.begin(), out.begin() + nc, 0.0);
  for (int di = 0; di < 2; ++di) {
    const double wx = di ? ax.w : 1.0 - ax.w;
    if (wx == 0.0) continue;
    for (int dj = 0; dj < 2; ++dj) {
      const double wy = dj ? ay.w : 1.0 - ay.w;
      if (wy == 0.0) continue;
      for (int dk = 0; dk < 2; ++dk) {
        const double wz = dk ? az.w : 1.0 - az.w;
        if (wz == 0.0) continue;
        const double w = wx * wy * wz;
        const double* v = values.data() + grid.index(ax.i0 + di, ay.i0 + dj, az.i0 + dk) * nc;
        for (int c = 0; c < nc; ++c) out[c] += w * v[c];
      }
    }
  }
}

GridFunction GridField::component(int c) const {
  GridFunction f(grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = values[i * components + c];
  return f;
}

double interpolate(const Grid& grid, const GridFunction& f, std::span<const double> x) {
  const auto ax = axis_weight(grid, x[0]);
  const auto ay = axis_weight(grid, x[1]);
  const auto az = axis_weight(grid, x[2]);
  double acc = 0.0;
  for (int di = 0; di < 2; ++di)
    for (int dj = 0; dj < 2; ++dj)
      for (int dk = 0; dk < 2; ++dk) {
        const double w = (di ? ax.w : 1.0 - ax.w) * (dj ? ay.w : 1.0 - ay.w) * (dk ? az.w : 1.0 - az.w);
        if (w != 0.0) acc += w * f[grid.index(ax.i0 + di, ay.i0 + dj, az.i0 + dk)];
      }
  return acc;
}

void write_grid_field(const std::filesystem::path& path, const GridField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  const Grid& g = field.grid;
  std::ostringstream header;
  header.precision(17);
  header << "SSDEGRID 1\n"
         << "dims " << g.nodes_per_axis() << ' ' << g.nodes_per_axis() << ' ' << g.nodes_per_axis() << '\n'
         << "components " << field.components << '\n'
         << "extent " << g.half_width() << '\n'
         << "spacing " << g.spacing() << '\n'
         << "byte_order little\n"
         << "dtype float64\n"
         << "end\n";
  const std::string text = header.str();
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  static_assert(std::endian::native == std::endian::little, "payload is written in native little-endian order");
  out.write(reinterpret_cast<const char*>(field.values.data()),
            static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (!out) throw Error(ErrorKind::IoError, "short write to " + path.string());
}

GridField read_grid_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("SSDEGRID", 0) != 0) throw Error(ErrorKind::IoError, path.string() + ": not a grid file");
  int m = 0, comps = 1;
  double extent = 0.0;
  while (std::getline(in, line) && line != "end") {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "dims") {
      int a = 0, b = 0, c = 0;
      ls >> a >> b >> c;
      if (a != b || b != c) throw Error(ErrorKind::IoError, "only cubic grids are supported");
      m = a;
    } else if (key == "components") {
      ls >> comps;
    } else if (key == "extent") {
      ls >> extent;
    } else if (key == "byte_order") {
      std::string order;
      ls >> order;
      if (order != "little") throw Error(ErrorKind::IoError, "unsupported byte order " + order);
    } else if (key == "dtype") {
      std::string dtype;
      ls >> dtype;
      if (dtype != "float64") throw Error(ErrorKind::IoError, "unsupported dtype " + dtype);
    }
  }
  if (line != "end" || m <= 0) throw Error(ErrorKind::IoError, path.string() + ": malformed header");
  GridField field(Grid(m, extent), comps);
  in.read(reinterpret_cast<char*>(field.values.data()),
          static_cast<std::streamsize>(field.values.size() * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(field.values.size() * sizeof(double))) {
    throw Error(ErrorKind::IoError, path.string() + ": truncated payload");
  }
  return field;
}

}  // namespace ssde
