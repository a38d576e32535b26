#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssde/coefficients/form_bound.hpp"
#include "ssde/grid.hpp"
#include "ssde/regularization/regularization.hpp"
#include "ssde/sde/simulate.hpp"

namespace ssde::harness {

struct GridConfig {
  int nodes = 32;
  double half_width = 1.0;
  bool operator==(const GridConfig&) const = default;
  Grid make() const { return Grid(nodes, half_width); }
};

struct BoundsConfig {
  coefficients::ClassKind class_kind = coefficients::ClassKind::F_delta;
  double lambda = 1.0;
  std::string method = "auto";  // auto | analytic | grid_eigen
  GridConfig grid{48, 2.0};
  // explicit values replace the computed ones
  std::optional<double> delta;
  std::optional<double> delta_a;
  std::optional<double> gamma;
  std::optional<double> delta_c;
  std::optional<double> a_dev;
  bool operator==(const BoundsConfig&) const = default;
};

struct AdmissibilityConfig {
  std::optional<double> q;  // fixed exponent; searched when absent
  double q_min = 0.0;
  double q_max = 200.0;
  double q_step = 0.05;
  bool operator==(const AdmissibilityConfig&) const = default;
};

struct ScheduleConfig {
  std::vector<int> n_list{4, 8};
  regularization::EpsRule rule = regularization::EpsRule::inverse_square;
  bool preservation = false;  // F_delta estimates of every b_n on the bounds grid
  bool operator==(const ScheduleConfig&) const = default;
};

struct ResolventConfig {
  bool enabled = true;
  std::vector<double> mu_list{10.0, 100.0, 1000.0};
  double q = 3.0;
  nlohmann::json f = {{"kind", "gaussian"}, {"scale", 4.0}};
  bool star = false;
  bool weighted = false;
  double weight_l = 0.01;
  double weight_nu = 2.0;
  bool convergence = false;
  bool neumann = false;
  bool operator==(const ResolventConfig&) const = default;
};

struct EnsembleConfig {
  bool enabled = true;
  std::size_t paths = 1000;
  double dt = 1e-3;
  double horizon = 1.0;
  Vec3 x{1.0, 0.0, 0.0};
  std::optional<double> exit_radius;  // defaults to the grid half-width
  std::vector<double> record_times{0.25, 0.5, 1.0};
  std::vector<std::string> f_tags{"y1", "y1y2", "bump"};
  Vec3 bump_centre{1.0, 0.0, 0.0};
  double bump_radius = 0.8;
  std::optional<int> schedule_n;  // defaults to the last entry of the schedule
  bool hitting = false;           // one ensemble per schedule entry
  std::vector<double> r_in{0.01, 0.05};
  std::vector<double> clip_levels{10.0, 20.0, 40.0};
  bool operator==(const EnsembleConfig&) const = default;
};

struct ExperimentConfig {
  std::string experiment_id = "experiment";
  sde::Scheme variant = sde::Scheme::ito;
  nlohmann::json drift = {{"kind", "zero"}};
  nlohmann::json dispersion = {{"kind", "identity"}};
  BoundsConfig bounds;
  AdmissibilityConfig admissibility;
  ScheduleConfig schedule;
  GridConfig grid;
  ResolventConfig resolvent;
  EnsembleConfig ensemble;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::filesystem::path base_dir;  // where relative file references resolve; not serialized
  bool operator==(const ExperimentConfig& o) const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw ConfigInvalid.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentConfig& c);
/// Reads and parses a config file; relative references resolve next to it.
ExperimentConfig load_config(const std::filesystem::path& path);
/// Checks referenced files and variant-specific inputs; ConfigInvalid on failure.
void validate(const ExperimentConfig& c);

}  // namespace ssde::harness
