#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"
#include "ssde/grid.hpp"
#include "ssde/numerics.hpp"

namespace ssde::sde {

/// Which SDE the ensemble integrates: (I) directly, or the Ito rewrite of
/// the Stratonovich equation with the correction drift added.
enum class Scheme { ito, stratonovich_converted };

std::string to_string(Scheme s);
/// Accepts "ito", "stratonovich" and "stratonovich_converted".
Scheme parse_scheme(const std::string& s);

struct EnsembleOptions {
  Vec3 x{};
  std::size_t paths = 1000;
  double dt = 1e-3;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  double exit_radius = kInf;         // paths freeze on leaving [-R, R]^3
  std::vector<double> record_times{};  // the horizon is always recorded
  double eps = 0.0;                  // mollification scale of the coefficients, 0 if none
  int schedule_n = 0;
};

/// Euler-Maruyama ensemble. Only states at the record times are kept; full
/// trajectories are regenerated on demand by replay_path.
struct PathEnsemble {
  EnsembleOptions opts;
  Scheme scheme = Scheme::ito;
  coefficients::FieldSpec drift;
  coefficients::DispersionSpec sigma;
  std::optional<coefficients::FieldSpec> correction{};
  int steps = 0;
  std::vector<double> record_times{};  // snapped to the step lattice, increasing
  std::vector<int> record_steps{};
  std::vector<double> states{};        // path-major: paths x records x 3
  std::vector<int> exit_step{};        // -1 when the path stayed inside
  std::vector<double> min_radius{};    // min |X| over the step endpoints
  std::vector<double> max_increment{}; // largest single-step displacement

  std::size_t paths() const noexcept { return exit_step.size(); }
  std::size_t records() const noexcept { return record_steps.size(); }
  Vec3 state(std::size_t path, std::size_t record) const;
  /// Index of the record at time t (within dt/2); InvalidArgument otherwise.
  std::size_t record_index(double t) const;
};

/// X_{k+1} = X_k - b dt (+ c dt) + sqrt(2) sigma sqrt(dt) xi_k, one Gaussian
/// stream per path seeded from (seed, path index).
/// BadStep unless 0 < dt <= min(eps, 1e-2); NonFiniteState when a state or
/// coefficient stops being finite.
PathEnsemble simulate_ensemble(const coefficients::FieldSpec& drift, const coefficients::DispersionSpec& sigma,
                               const coefficients::FieldSpec* correction, const EnsembleOptions& opts,
                               Scheme scheme = Scheme::ito);

/// Regenerates path `path` bit-identically, calling visit(step, state) for
/// step = 0..last, where last is the exit step or the final step.
void replay_path(const PathEnsemble& ens, std::size_t path, const std::function<void(int, const Vec3&)>& visit);

/// Recorded states in the binary array format: text header
/// {paths, records, d, dt} terminated by "end", then float64 payload.
void write_path_dump(const std::filesystem::path& path, const PathEnsemble& ens);

}  // namespace ssde::sde
