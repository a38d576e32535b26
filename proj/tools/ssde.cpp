// Command-line front end: one subcommand per pipeline stage, `run` for the
// whole pipeline and `check` for the acceptance suite.
//
// exit status: 0 ran, 1 config error, 2 stage failure, 3 acceptance failure
#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "ssde/error.hpp"
#include "ssde/harness/acceptance.hpp"
#include "ssde/harness/config.hpp"
#include "ssde/harness/experiment.hpp"

namespace fs = std::filesystem;
using namespace ssde;
using namespace ssde::harness;

namespace {

struct Overrides {
  std::optional<std::size_t> paths;
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<int> schedule_n;
  std::optional<std::string> variant;
};

struct RunArgs {
  std::vector<std::string> configs;
  std::string out;
  std::string format = "both";
  std::string dump_paths;
  int jobs = 1;
  Overrides ov;
};

void add_run_flags(CLI::App* sub, RunArgs& a, bool simulate_flags) {
  sub->add_option("--config", a.configs, "experiment config (JSON); repeat for several")->required();
  sub->add_option("--out", a.out, "output directory (default: the config's output_dir)");
  sub->add_option("--format", a.format, "report format")->check(CLI::IsMember({"json", "csv", "both"}));
  sub->add_option("--jobs", a.jobs, "configs run concurrently")->check(CLI::PositiveNumber);
  if (!simulate_flags) return;
  sub->add_option("--paths", a.ov.paths, "ensemble size");
  sub->add_option("--dt", a.ov.dt, "Euler-Maruyama step");
  sub->add_option("--horizon", a.ov.horizon, "final time");
  sub->add_option("--seed", a.ov.seed, "RNG seed");
  sub->add_option("--schedule-n", a.ov.schedule_n, "regularization level of the main ensemble");
  sub->add_option("--variant", a.ov.variant, "SDE form")->check(CLI::IsMember({"ito", "stratonovich"}));
  sub->add_option("--dump-paths", a.dump_paths, "write recorded states of the main ensemble to this file");
}

// Overrides go through the strict parser so they get the same checks as the file.
ExperimentConfig apply(const Overrides& ov, const ExperimentConfig& c) {
  auto j = to_json(c);
  if (ov.paths) j["ensemble"]["paths"] = *ov.paths;
  if (ov.dt) j["ensemble"]["dt"] = *ov.dt;
  if (ov.horizon) j["ensemble"]["horizon"] = *ov.horizon;
  if (ov.seed) j["seed"] = *ov.seed;
  if (ov.schedule_n) j["ensemble"]["schedule_n"] = *ov.schedule_n;
  if (ov.variant) j["variant"] = *ov.variant;
  return config_from_json(j, c.base_dir);
}

ReportFormat parse_format(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  return ReportFormat::both;
}

// Returns the exit status of one config.
int run_one(const std::string& path, const RunArgs& a, const std::set<Stage>& stages, bool several,
            std::mutex& io) {
  auto say = [&](const std::string& s, bool err = false) {
    std::lock_guard lock(io);
    (err ? std::cerr : std::cout) << s << std::endl;
  };
  ExperimentConfig cfg;
  try {
    cfg = apply(a.ov, load_config(path));
    validate(cfg);
  } catch (const std::exception& e) {
    say(path + ": " + e.what(), true);
    return 1;
  }
  fs::path dir = a.out.empty() ? fs::path(cfg.output_dir) : fs::path(a.out);
  if (several) dir /= cfg.experiment_id;

  RunOptions opts;
  opts.stages = stages;
  if (!a.dump_paths.empty()) opts.path_dump = a.dump_paths;
  ReportBundle bundle;
  try {
    bundle = run_experiment(cfg, opts);
    write_report(bundle, dir, parse_format(a.format));
  } catch (const Error& e) {
    say(path + ": " + e.what(), true);
    return e.kind() == ErrorKind::ConfigInvalid ? 1 : 2;
  }
  for (const auto& w : bundle.warnings) say(cfg.experiment_id + ": warning: " + w, true);
  for (const auto& s : bundle.stages) {
    std::string line = cfg.experiment_id + ": " + s.id + " " + s.status;
    if (!s.error_kind.empty()) line += " (" + s.error_kind + ": " + s.message + ")";
    say(line);
  }
  say(cfg.experiment_id + ": reports in " + dir.string());
  return bundle.has_failures() ? 2 : 0;
}

int run_all(const RunArgs& a, const std::set<Stage>& stages) {
  if (!a.dump_paths.empty() && a.configs.size() > 1) {
    std::cerr << "--dump-paths takes a single config" << std::endl;
    return 1;
  }
  std::mutex io;
  std::vector<int> status(a.configs.size(), 0);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < a.configs.size();)
      status[i] = run_one(a.configs[i], a, stages, a.configs.size() > 1, io);
  };
  const int n = std::min<int>(a.jobs, static_cast<int>(a.configs.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  // config errors outrank stage failures
  int worst = 0;
  for (int s : status)
    if (s == 1 || (s == 2 && worst == 0)) worst = s;
  return worst;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular-drift SDE laboratory"};
  app.require_subcommand(1);

  struct Cmd {
    const char* name;
    const char* help;
    Stage stage;
    bool simulate_flags;
  };
  const Cmd cmds[] = {
      {"bounds", "form-bound constants of the configured coefficients", Stage::bounds, false},
      {"admit", "admissibility margins and exponent", Stage::admit, false},
      {"regularize", "regularization schedule", Stage::regularize, false},
      {"resolvent", "resolvent and semigroup estimates", Stage::resolvent, false},
      {"simulate", "Monte Carlo ensemble and its statistics", Stage::simulate, true},
  };
  std::vector<RunArgs> args(std::size(cmds) + 1);
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(cmds); ++i) {
    subs.push_back(app.add_subcommand(cmds[i].name, cmds[i].help));
    add_run_flags(subs.back(), args[i], cmds[i].simulate_flags);
  }
  auto* run = app.add_subcommand("run", "the whole pipeline");
  add_run_flags(run, args.back(), true);

  auto* check = app.add_subcommand("check", "acceptance suite");
  std::vector<int> criteria;
  std::string check_out;
  check->add_option("--criteria", criteria, "criterion ids (default: all)")->check(CLI::Range(1, kCriterionCount));
  check->add_option("--out", check_out, "directory for acceptance.json");
  std::string check_config;
  check->add_option("--config", check_config, "accepted for uniformity; the criteria fix their own setups");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  for (std::size_t i = 0; i < subs.size(); ++i)
    if (subs[i]->parsed()) return run_all(args[i], {cmds[i].stage});
  if (run->parsed()) {
    return run_all(args.back(), {Stage::bounds, Stage::admit, Stage::regularize, Stage::resolvent, Stage::simulate});
  }

  const auto results = run_acceptance({criteria.begin(), criteria.end()},
                                      [](const CriterionResult& r) { std::cout << format_result(r) << std::endl; });
  bool ok = true;
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results) {
    ok = ok && r.pass;
    j.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"summary", r.summary}, {"data", r.data}});
  }
  if (!check_out.empty()) {
    fs::create_directories(check_out);
    std::ofstream(fs::path(check_out) / "acceptance.json") << j.dump(2) << "\n";
  }
  return ok ? 0 : 3;
}
