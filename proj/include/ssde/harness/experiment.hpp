#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssde/harness/config.hpp"

namespace ssde::harness {

enum class Stage { bounds, admit, regularize, resolvent, simulate };
std::string to_string(Stage s);

/// Numeric table persisted as CSV; columns keep their order.
struct CsvTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct StageRecord {
  std::string id;
  std::string status;  // ok | failed | skipped
  std::string error_kind;
  std::string message;
  double seconds = 0.0;
};

inline constexpr const char* kOutsideTag = "outside (cond0)";

struct ReportBundle {
  std::string experiment_id;
  nlohmann::json config = nlohmann::json::object();
  std::string config_hash;
  nlohmann::json reports = nlohmann::json::object();
  std::vector<CsvTable> tables;
  std::vector<StageRecord> stages;
  std::vector<std::string> warnings;
  bool outside_cond0 = false;

  bool has_failures() const;
  /// Full bundle; wall-clock values live only under "timing".
  nlohmann::json to_json() const;
  /// to_json() without the "timing" field.
  nlohmann::json deterministic_json() const;
};

/// Hex SHA-256 of the canonical dump of `config`.
std::string config_hash(const nlohmann::json& config);

struct RunOptions {
  /// Stages to run; prerequisites are added automatically.
  std::set<Stage> stages{Stage::bounds, Stage::admit, Stage::regularize, Stage::resolvent, Stage::simulate};
  std::optional<std::filesystem::path> path_dump;  // raw recorded states of the main ensemble
};

/// Runs the pipeline bounds -> admit -> regularize -> resolvent -> simulate.
/// Stage errors are recorded and downstream stages skipped; an infeasible
/// admissibility report tags every later report instead of stopping.
/// ConfigInvalid when the config does not validate.
ReportBundle run_experiment(const ExperimentConfig& config, const RunOptions& opts = {});

enum class ReportFormat { json, csv, both };

/// bundle.json and/or one CSV per table in `dir`; IoError on failure.
void write_report(const ReportBundle& bundle, const std::filesystem::path& dir, ReportFormat format = ReportFormat::both);

/// Comma-separated rendering with a header line, values printed round-trip exact.
std::string to_csv(const CsvTable& t);

}  // namespace ssde::harness
