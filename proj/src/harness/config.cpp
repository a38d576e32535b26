#include "ssde/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "ssde/coefficients/derived.hpp"
#include "ssde/coefficients/serialize.hpp"
#include "ssde/error.hpp"
#include "ssde/sde/test_function.hpp"

namespace ssde::harness {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::ConfigInvalid, where + ": " + what);
}

// Reads keys of one JSON object and rejects anything it did not consume.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) invalid(name_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  template <class T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      invalid(name_ + "." + key, e.what());
    }
  }

  template <class T>
  void get_optional(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!has(key)) {
      out.reset();
      return;
    }
    T v{};
    get(key, v);
    out = v;
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) invalid(name_, "unknown key '" + k + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

template <class T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

GridConfig read_grid(const json& j, const std::string& name, GridConfig def) {
  Section s(j, name);
  s.get("nodes", def.nodes);
  s.get("half_width", def.half_width);
  s.finish();
  if (def.nodes < 2) invalid(name + ".nodes", "must be >= 2");
  if (!(def.half_width > 0.0)) invalid(name + ".half_width", "must be positive");
  return def;
}

json grid_json(const GridConfig& g) { return {{"nodes", g.nodes}, {"half_width", g.half_width}}; }

void positive(const std::string& where, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) invalid(where, "must be positive and finite");
}

}  // namespace

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return experiment_id == o.experiment_id && variant == o.variant && drift == o.drift && dispersion == o.dispersion &&
         bounds == o.bounds && admissibility == o.admissibility && schedule == o.schedule && grid == o.grid &&
         resolvent == o.resolvent && ensemble == o.ensemble && seed == o.seed && output_dir == o.output_dir;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.base_dir = base_dir;
  Section top(j, "config");
  top.get("experiment_id", c.experiment_id);
  std::string variant = c.variant == sde::Scheme::ito ? "ito" : "stratonovich";
  top.get("variant", variant);
  try {
    c.variant = sde::parse_scheme(variant);
  } catch (const Error& e) {
    invalid("variant", e.what());
  }
  top.get("drift", c.drift);
  top.get("dispersion", c.dispersion);
  top.get("seed", c.seed);
  top.get("output_dir", c.output_dir);
  if (!c.drift.is_object()) invalid("drift", "expected an object");
  if (!c.dispersion.is_object()) invalid("dispersion", "expected an object");

  if (top.has("bounds")) {
    Section s(top.raw("bounds"), "bounds");
    auto& b = c.bounds;
    std::string kind(coefficients::to_string(b.class_kind));
    s.get("class", kind);
    try {
      b.class_kind = coefficients::parse_class_kind(kind);
    } catch (const Error& e) {
      invalid("bounds.class", e.what());
    }
    s.get("lambda", b.lambda);
    s.get("method", b.method);
    if (s.has("grid")) b.grid = read_grid(s.raw("grid"), "bounds.grid", b.grid);
    s.get_optional("delta", b.delta);
    s.get_optional("delta_a", b.delta_a);
    s.get_optional("gamma", b.gamma);
    s.get_optional("delta_c", b.delta_c);
    s.get_optional("a_dev", b.a_dev);
    s.finish();
    positive("bounds.lambda", b.lambda);
    if (b.method != "auto" && b.method != "analytic" && b.method != "grid_eigen") {
      invalid("bounds.method", "expected auto, analytic or grid_eigen");
    }
    for (const auto* v : {&b.delta, &b.delta_a, &b.gamma, &b.delta_c, &b.a_dev})
      if (*v && !(**v >= 0.0)) invalid("bounds", "override values must be non-negative");
  }

  if (top.has("admissibility")) {
    Section s(top.raw("admissibility"), "admissibility");
    auto& a = c.admissibility;
    s.get_optional("q", a.q);
    s.get("q_min", a.q_min);
    s.get("q_max", a.q_max);
    s.get("q_step", a.q_step);
    s.finish();
    positive("admissibility.q_step", a.q_step);
    if (!(a.q_max > a.q_min)) invalid("admissibility", "q_max must exceed q_min");
  }

  if (top.has("regularization")) {
    Section s(top.raw("regularization"), "regularization");
    auto& sc = c.schedule;
    s.get("n_list", sc.n_list);
    std::string rule(regularization::to_string(sc.rule));
    s.get("eps_rule", rule);
    try {
      sc.rule = regularization::parse_eps_rule(rule);
    } catch (const Error& e) {
      invalid("regularization.eps_rule", e.what());
    }
    s.get("preservation", sc.preservation);
    s.finish();
    if (sc.n_list.empty()) invalid("regularization.n_list", "must not be empty");
    for (int n : sc.n_list)
      if (n < 1) invalid("regularization.n_list", "entries must be >= 1");
  }

  if (top.has("grid")) c.grid = read_grid(top.raw("grid"), "grid", c.grid);

  if (top.has("resolvent")) {
    Section s(top.raw("resolvent"), "resolvent");
    auto& r = c.resolvent;
    s.get("enabled", r.enabled);
    s.get("mu_list", r.mu_list);
    s.get("q", r.q);
    s.get("f", r.f);
    s.get("star", r.star);
    s.get("weighted", r.weighted);
    s.get("weight_l", r.weight_l);
    s.get("weight_nu", r.weight_nu);
    s.get("convergence", r.convergence);
    s.get("neumann", r.neumann);
    s.finish();
    if (r.mu_list.empty()) invalid("resolvent.mu_list", "must not be empty");
    for (double mu : r.mu_list) positive("resolvent.mu_list", mu);
    if (!(r.q > 1.0)) invalid("resolvent.q", "must exceed 1");
    if (!r.f.is_object() || !r.f.contains("kind")) invalid("resolvent.f", "expected an object with a kind");
  }

  if (top.has("ensemble")) {
    Section s(top.raw("ensemble"), "ensemble");
    auto& e = c.ensemble;
    s.get("enabled", e.enabled);
    s.get("paths", e.paths);
    s.get("dt", e.dt);
    s.get("horizon", e.horizon);
    s.get("x", e.x);
    s.get_optional("exit_radius", e.exit_radius);
    s.get("record_times", e.record_times);
    s.get("f_tags", e.f_tags);
    s.get("bump_centre", e.bump_centre);
    s.get("bump_radius", e.bump_radius);
    s.get_optional("schedule_n", e.schedule_n);
    s.get("hitting", e.hitting);
    s.get("r_in", e.r_in);
    s.get("clip_levels", e.clip_levels);
    s.finish();
    if (e.paths < 1) invalid("ensemble.paths", "must be >= 1");
    positive("ensemble.dt", e.dt);
    positive("ensemble.horizon", e.horizon);
    positive("ensemble.bump_radius", e.bump_radius);
    if (e.exit_radius) positive("ensemble.exit_radius", *e.exit_radius);
    for (double t : e.record_times)
      if (!(t >= 0.0 && t <= e.horizon)) invalid("ensemble.record_times", "entries must lie in [0, horizon]");
    if (!std::is_sorted(e.record_times.begin(), e.record_times.end())) {
      invalid("ensemble.record_times", "must be increasing");
    }
    for (double v : e.clip_levels) positive("ensemble.clip_levels", v);
    for (double v : e.r_in) positive("ensemble.r_in", v);
  }
  if (c.ensemble.schedule_n) {
    const auto& nl = c.schedule.n_list;
    if (std::find(nl.begin(), nl.end(), *c.ensemble.schedule_n) == nl.end()) {
      invalid("ensemble.schedule_n", "must be an entry of regularization.n_list");
    }
  }
  top.finish();
  return c;
}

json to_json(const ExperimentConfig& c) {
  const auto& b = c.bounds;
  const auto& a = c.admissibility;
  const auto& s = c.schedule;
  const auto& r = c.resolvent;
  const auto& e = c.ensemble;
  return {{"experiment_id", c.experiment_id},
          {"variant", c.variant == sde::Scheme::ito ? "ito" : "stratonovich"},
          {"drift", c.drift},
          {"dispersion", c.dispersion},
          {"bounds",
           {{"class", coefficients::to_string(b.class_kind)},
            {"lambda", b.lambda},
            {"method", b.method},
            {"grid", grid_json(b.grid)},
            {"delta", opt(b.delta)},
            {"delta_a", opt(b.delta_a)},
            {"gamma", opt(b.gamma)},
            {"delta_c", opt(b.delta_c)},
            {"a_dev", opt(b.a_dev)}}},
          {"admissibility", {{"q", opt(a.q)}, {"q_min", a.q_min}, {"q_max", a.q_max}, {"q_step", a.q_step}}},
          {"regularization", {{"n_list", s.n_list}, {"eps_rule", regularization::to_string(s.rule)}, {"preservation", s.preservation}}},
          {"grid", grid_json(c.grid)},
          {"resolvent",
           {{"enabled", r.enabled},
            {"mu_list", r.mu_list},
            {"q", r.q},
            {"f", r.f},
            {"star", r.star},
            {"weighted", r.weighted},
            {"weight_l", r.weight_l},
            {"weight_nu", r.weight_nu},
            {"convergence", r.convergence},
            {"neumann", r.neumann}}},
          {"ensemble",
           {{"enabled", e.enabled},
            {"paths", e.paths},
            {"dt", e.dt},
            {"horizon", e.horizon},
            {"x", e.x},
            {"exit_radius", opt(e.exit_radius)},
            {"record_times", e.record_times},
            {"f_tags", e.f_tags},
            {"bump_centre", e.bump_centre},
            {"bump_radius", e.bump_radius},
            {"schedule_n", opt(e.schedule_n)},
            {"hitting", e.hitting},
            {"r_in", e.r_in},
            {"clip_levels", e.clip_levels}}},
          {"seed", c.seed},
          {"output_dir", c.output_dir}};
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigInvalid, "cannot read config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

void validate(const ExperimentConfig& c) {
  coefficients::DispersionSpec disp = coefficients::DispersionSpec::identity(3);
  try {
    (void)coefficients::field_from_json(c.drift, c.base_dir);
    disp = coefficients::dispersion_from_json(c.dispersion, c.base_dir);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    throw Error(ErrorKind::ConfigInvalid, e.what());
  }
  if (c.variant == sde::Scheme::stratonovich_converted && !c.bounds.delta_c) {
    bool analytic = false;
    try {
      analytic = coefficients::gradient_majorants(disp).sigma_grad.has_value();
    } catch (const Error&) {
    }
    if (!analytic) {
      throw Error(ErrorKind::ConfigInvalid,
                  "stratonovich variant needs bounds.delta_c when sigma has no closed-form gradient bound");
    }
  }
  for (const auto& tag : c.ensemble.f_tags) {
    try {
      (void)sde::TestFunction::parse(tag);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigInvalid, std::string("ensemble.f_tags: ") + e.what());
    }
  }
}

}  // namespace ssde::harness
