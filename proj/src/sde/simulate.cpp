#include "ssde/sde/simulate.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "ssde/error.hpp"
#include "ssde/parallel.hpp"

namespace ssde::sde {

std::string to_string(Scheme s) { return s == Scheme::ito ? "ito" : "stratonovich_converted"; }

Scheme parse_scheme(const std::string& s) {
  if (s == "ito") return Scheme::ito;
  if (s == "stratonovich" || s == "stratonovich_converted") return Scheme::stratonovich_converted;
  throw Error(ErrorKind::InvalidArgument, "unknown scheme '" + s + "'");
}

Vec3 PathEnsemble::state(std::size_t path, std::size_t record) const {
  const double* p = states.data() + (path * records() + record) * 3;
  return {p[0], p[1], p[2]};
}

std::size_t PathEnsemble::record_index(double t) const {
  for (std::size_t r = 0; r < record_times.size(); ++r)
    if (std::abs(record_times[r] - t) <= 0.5 * opts.dt) return r;
  throw Error(ErrorKind::InvalidArgument, "time " + std::to_string(t) + " was not recorded");
}

namespace {

// Shared by simulation and replay so both produce the same bits.
class Stepper {
 public:
  Stepper(const PathEnsemble& e, std::size_t path)
      : e_(e), identity_(e.sigma.is_identity()), x_(e.opts.x), path_(path) {
    std::seed_seq seq{static_cast<std::uint32_t>(e.opts.seed), static_cast<std::uint32_t>(e.opts.seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    rng_.seed(seq);
  }

  const Vec3& x() const noexcept { return x_; }

  // Advances one step; returns the displacement.
  double step(int k) {
    const double dt = e_.opts.dt;
    std::array<double, 3> b{}, c{}, xi, noise{};
    std::array<double, 9> s;
    try {
      e_.drift.eval(x_, b);
      if (e_.correction) e_.correction->eval(x_, c);
      if (!identity_) e_.sigma.sigma(x_, s);
    } catch (const Error& err) {
      fail(k, err.what());
    }
    for (double& v : xi) v = normal_(rng_);
    if (identity_) {
      noise = xi;
    } else {
      for (int i = 0; i < 3; ++i) noise[i] = s[i * 3] * xi[0] + s[i * 3 + 1] * xi[1] + s[i * 3 + 2] * xi[2];
    }
    const double amp = std::sqrt(2.0 * dt);
    double inc2 = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double dx = (c[i] - b[i]) * dt + amp * noise[i];
      x_[i] += dx;
      inc2 += dx * dx;
      if (!std::isfinite(x_[i])) fail(k, "state not finite");
    }
    return std::sqrt(inc2);
  }

  bool outside() const {
    const double R = e_.opts.exit_radius;
    return std::abs(x_[0]) > R || std::abs(x_[1]) > R || std::abs(x_[2]) > R;
  }

 private:
  [[noreturn]] void fail(int k, const std::string& why) const {
    throw Error(ErrorKind::NonFiniteState,
                "path " + std::to_string(path_) + " step " + std::to_string(k) + ": " + why);
  }

  const PathEnsemble& e_;
  bool identity_;
  Vec3 x_;
  std::size_t path_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

double norm3(const Vec3& x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }

}  // namespace

PathEnsemble simulate_ensemble(const coefficients::FieldSpec& drift, const coefficients::DispersionSpec& sigma,
                               const coefficients::FieldSpec* correction, const EnsembleOptions& opts,
                               Scheme scheme) {
  if (drift.dimension() != 3 || sigma.dimension() != 3 || (correction && correction->dimension() != 3)) {
    throw Error(ErrorKind::DimensionMismatch, "the simulator is 3-D");
  }
  const double cap = std::min(opts.eps > 0.0 ? opts.eps : kInf, 1e-2);
  if (!(opts.dt > 0.0) || opts.dt > cap * (1.0 + 1e-12)) {
    throw Error(ErrorKind::BadStep, "dt=" + std::to_string(opts.dt) + " must lie in (0, " + std::to_string(cap) + "]");
  }
  if (!(opts.horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  if (opts.paths < 1) throw Error(ErrorKind::InvalidArgument, "need at least one path");

  PathEnsemble e{.opts = opts, .scheme = scheme, .drift = drift, .sigma = sigma};
  if (correction) e.correction = *correction;
  e.steps = static_cast<int>(std::llround(opts.horizon / opts.dt));
  if (e.steps < 1) e.steps = 1;
  std::vector<int> rs;
  for (double t : opts.record_times) {
    if (t < 0.0 || t > opts.horizon + 0.5 * opts.dt) throw Error(ErrorKind::InvalidArgument, "record time outside [0, T]");
    rs.push_back(static_cast<int>(std::llround(t / opts.dt)));
  }
  rs.push_back(e.steps);
  std::sort(rs.begin(), rs.end());
  rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
  e.record_steps = rs;
  for (int k : rs) e.record_times.push_back(k * opts.dt);

  const std::size_t N = opts.paths, R = rs.size();
  e.states.assign(N * R * 3, 0.0);
  e.exit_step.assign(N, -1);
  e.min_radius.assign(N, 0.0);
  e.max_increment.assign(N, 0.0);

  parallel_for(0, N, [&](std::size_t p) {
    Stepper st(e, p);
    double rmin = norm3(st.x()), maxinc = 0.0;
    int exit = -1;
    std::size_t next = 0;
    double* out = e.states.data() + p * R * 3;
    for (int k = 0; k <= e.steps; ++k) {
      while (next < R && rs[next] == k) {
        std::copy(st.x().begin(), st.x().end(), out + next * 3);
        ++next;
      }
      if (k == e.steps) break;
      if (exit < 0) {
        maxinc = std::max(maxinc, st.step(k));
        rmin = std::min(rmin, norm3(st.x()));
        if (st.outside()) exit = k + 1;
      }
    }
    e.exit_step[p] = exit;
    e.min_radius[p] = rmin;
    e.max_increment[p] = maxinc;
  });
  return e;
}

void replay_path(const PathEnsemble& ens, std::size_t path, const std::function<void(int, const Vec3&)>& visit) {
  Stepper st(ens, path);
  const int last = ens.exit_step[path] >= 0 ? ens.exit_step[path] : ens.steps;
  visit(0, st.x());
  for (int k = 0; k < last; ++k) {
    st.step(k);
    visit(k + 1, st.x());
  }
}

void write_path_dump(const std::filesystem::path& path, const PathEnsemble& ens) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream header;
  header.precision(17);
  header << "SSDEPATHS 1\n"
         << "paths " << ens.paths() << '\n'
         << "records " << ens.records() << '\n'
         << "d 3\n"
         << "dt " << ens.opts.dt << '\n'
         << "times";
  for (double t : ens.record_times) header << ' ' << t;
  header << "\nbyte_order little\ndtype float64\nend\n";
  const std::string text = header.str();
  static_assert(std::endian::native == std::endian::little, "payload is written in native little-endian order");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.write(reinterpret_cast<const char*>(ens.states.data()),
            static_cast<std::streamsize>(ens.states.size() * sizeof(double)));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace ssde::sde
