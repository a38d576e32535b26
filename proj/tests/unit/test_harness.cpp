#include <filesystem>
#include <fstream>
#include <sstream>

#include "ssde/harness/config.hpp"
#include "ssde/harness/experiment.hpp"
#include "test_util.hpp"

namespace ssde::harness {
namespace {

using nlohmann::json;

json minimal_json() {
  return json::parse(R"({
    "experiment_id": "mini",
    "drift": {"kind": "hardy", "kappa": 0.25},
    "bounds": {"grid": {"nodes": 16, "half_width": 2.0}},
    "regularization": {"n_list": [4]},
    "grid": {"nodes": 16, "half_width": 1.0},
    "resolvent": {"mu_list": [10, 100, 1000]},
    "ensemble": {"paths": 200, "dt": 0.01, "horizon": 0.5, "record_times": [0.25, 0.5], "exit_radius": 1.0},
    "seed": 5
  })");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const StageRecord* stage(const ReportBundle& b, const std::string& id) {
  for (const auto& s : b.stages)
    if (s.id == id) return &s;
  return nullptr;
}

TEST(Config, DefaultsRoundTrip) {
  const ExperimentConfig c;
  EXPECT_EQ(config_from_json(to_json(c)), c);
  EXPECT_EQ(to_json(config_from_json(to_json(c))), to_json(c));
}

TEST(Config, ExampleConfigsRoundTrip) {
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::directory_iterator(SSDE_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    ++seen;
    const auto c = load_config(entry.path());
    EXPECT_NO_THROW(validate(c)) << entry.path();
    auto back = config_from_json(to_json(c), c.base_dir);
    EXPECT_EQ(back, c) << entry.path();
  }
  EXPECT_GE(seen, 3u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  auto j = minimal_json();
  j["colour"] = "blue";
  EXPECT_ERROR(config_from_json(j), ConfigInvalid);
  j = minimal_json();
  j["grid"]["spacing"] = 0.1;
  EXPECT_ERROR(config_from_json(j), ConfigInvalid);
  j = minimal_json();
  j["ensemble"]["paths"] = "many";
  EXPECT_ERROR(config_from_json(j), ConfigInvalid);
  j = minimal_json();
  j["ensemble"]["dt"] = -1.0;
  EXPECT_ERROR(config_from_json(j), ConfigInvalid);
  j = minimal_json();
  j["regularization"]["n_list"] = json::array();
  EXPECT_ERROR(config_from_json(j), ConfigInvalid);
  j = minimal_json();
  j["variant"] = "milstein";
  EXPECT_ERROR(config_from_json(j), ConfigInvalid);
}

TEST(Config, ScheduleIndexMustBeListed) {
  auto j = minimal_json();
  j["ensemble"]["schedule_n"] = 8;
  EXPECT_ERROR(config_from_json(j), ConfigInvalid);
  j["ensemble"]["schedule_n"] = 4;
  EXPECT_NO_THROW(config_from_json(j));
}

TEST(Config, StratonovichSumNeedsDeltaC) {
  auto j = minimal_json();
  j["variant"] = "stratonovich";
  j["dispersion"] = json::parse(R"({"kind": "sum", "children": [
      {"kind": "radial_projection", "c": 0.1},
      {"kind": "sine_log", "c": 0.05, "e": [1, 0, 0]}]})");
  EXPECT_ERROR(validate(config_from_json(j)), ConfigInvalid);
  j["bounds"]["delta_c"] = 0.1;
  EXPECT_NO_THROW(validate(config_from_json(j)));
}

TEST(Config, MissingGridFileIsInvalid) {
  auto j = minimal_json();
  j["drift"] = json::parse(R"({"kind": "grid_sampled", "file": "does_not_exist.bin"})");
  EXPECT_ERROR(validate(config_from_json(j)), ConfigInvalid);
}

TEST(Run, MinimalPipeline) {
  const auto bundle = run_experiment(config_from_json(minimal_json()));
  EXPECT_FALSE(bundle.has_failures());
  for (const char* id : {"bounds", "admit", "regularize", "resolvent", "simulate"}) {
    const auto* s = stage(bundle, id);
    ASSERT_NE(s, nullptr) << id;
    EXPECT_EQ(s->status, "ok") << id << ": " << s->message;
  }
  // admit is recorded before the stages that depend on it
  std::vector<std::string> order;
  for (const auto& s : bundle.stages) order.push_back(s.id);
  const auto pos = [&](const std::string& id) { return std::find(order.begin(), order.end(), id) - order.begin(); };
  EXPECT_LT(pos("admit"), pos("resolvent"));
  EXPECT_LT(pos("admit"), pos("simulate"));
  EXPECT_FALSE(bundle.outside_cond0);
  EXPECT_TRUE(bundle.reports.contains("simulate"));
}

TEST(Run, OnlyRequestedStagesWithPrerequisites) {
  RunOptions opts;
  opts.stages = {Stage::admit};
  const auto bundle = run_experiment(config_from_json(minimal_json()), opts);
  EXPECT_NE(stage(bundle, "bounds"), nullptr);
  EXPECT_NE(stage(bundle, "admit"), nullptr);
  const auto* sim = stage(bundle, "simulate");
  EXPECT_TRUE(sim == nullptr || sim->status == "skipped");
}

TEST(Run, OutsideConditionIsTaggedNotFailed) {
  auto j = minimal_json();
  j["bounds"]["delta"] = 1.2;
  j["bounds"]["gamma"] = 0.0;
  j["bounds"]["delta_a"] = 0.0;
  j["bounds"]["a_dev"] = 0.0;
  const auto bundle = run_experiment(config_from_json(j));
  EXPECT_TRUE(bundle.outside_cond0);
  EXPECT_FALSE(bundle.has_failures());
  EXPECT_FALSE(bundle.warnings.empty());
  const auto out = bundle.to_json();
  EXPECT_EQ(out["tags"], json::array({kOutsideTag}));
  EXPECT_EQ(out["reports"]["simulate"]["tags"], json::array({kOutsideTag}));
}

TEST(Run, DeterministicAcrossRuns) {
  const auto c = config_from_json(minimal_json());
  const auto a = run_experiment(c).deterministic_json();
  const auto b = run_experiment(c).deterministic_json();
  EXPECT_EQ(a, b);
  EXPECT_FALSE(a.contains("timing"));
}

TEST(Run, InvalidConfigThrows) {
  auto c = config_from_json(minimal_json());
  c.variant = sde::Scheme::stratonovich_converted;
  c.dispersion = json::parse(R"({"kind": "sum", "children": [{"kind": "radial_projection", "c": 0.1},
                                 {"kind": "radial_projection", "c": 0.1}]})");
  EXPECT_ERROR(run_experiment(c), ConfigInvalid);
}

TEST(Report, EmptyBundleWritesValidJson) {
  const auto dir = std::filesystem::temp_directory_path() / "ssde_empty_bundle";
  std::filesystem::remove_all(dir);
  ReportBundle b;
  b.experiment_id = "empty";
  write_report(b, dir, ReportFormat::json);
  const auto j = json::parse(slurp(dir / "bundle.json"));
  EXPECT_EQ(j["experiment_id"], "empty");
  std::filesystem::remove_all(dir);
}

TEST(Report, StarTableColumns) {
  auto j = minimal_json();
  j["resolvent"]["star"] = true;
  j["ensemble"]["enabled"] = false;
  const auto bundle = run_experiment(config_from_json(j));
  const CsvTable* star = nullptr;
  for (const auto& t : bundle.tables)
    if (t.name == "star") star = &t;
  ASSERT_NE(star, nullptr);
  EXPECT_EQ(star->columns, (std::vector<std::string>{"mu", "grad_norm_q", "grad_norm_qj", "residual"}));
  EXPECT_EQ(star->rows.size(), 3u);
}

TEST(Report, CsvValuesRoundTripExactly) {
  CsvTable t{"t", {"a", "b"}, {{0.1, 1.0 / 3.0}, {1e-300, -2.5e17}}};
  std::istringstream in(to_csv(t));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "a,b");
  for (const auto& row : t.rows) {
    std::getline(in, line);
    const auto comma = line.find(',');
    EXPECT_EQ(std::stod(line.substr(0, comma)), row[0]);
    EXPECT_EQ(std::stod(line.substr(comma + 1)), row[1]);
  }
}

TEST(Hash, KnownDigest) {
  EXPECT_EQ(config_hash(json::object()), "44136fa355b3678a1146ad16f7e8649e94fb4fc21fe77e8310c060f61caaff8a");
  auto a = minimal_json(), b = minimal_json();
  b["seed"] = 6;
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a), config_hash(json::parse(a.dump())));
}

}  // namespace
}  // namespace ssde::harness
