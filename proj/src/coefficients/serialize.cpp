#include "ssde/coefficients/serialize.hpp"

#include <cmath>

#include "ssde/error.hpp"

namespace ssde::coefficients {

using nlohmann::json;

namespace {

template <class T>
T required(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::ConfigInvalid, std::string("missing key '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("bad value for '") + key + "': " + e.what());
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& file) {
  std::filesystem::path p(file);
  return p.is_relative() && !base.empty() ? base / p : p;
}

json double_or_inf(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

}  // namespace

FieldSpec field_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "drift spec must be an object");
  const auto kind = required<std::string>(j, "kind");
  const int d = j.value("d", 3);
  if (kind == "hardy") return FieldSpec::hardy(d, required<double>(j, "kappa"), j.value("sign", 1));
  if (kind == "bounded_box") {
    double hw = std::numeric_limits<double>::infinity();
    if (j.contains("half_width") && !j["half_width"].is_null()) hw = j["half_width"].get<double>();
    return FieldSpec::bounded_box(d, required<double>(j, "M"), j.value("direction", std::vector<double>{}), hw);
  }
  if (kind == "zero") return FieldSpec::zero(d);
  if (kind == "grid_sampled") {
    const auto file = required<std::string>(j, "file");
    auto data = std::make_shared<const GridField>(read_grid_field(resolve(base_dir, file)));
    return FieldSpec::grid_sampled(std::move(data), file);
  }
  if (kind == "sum") {
    std::vector<FieldSpec> children;
    for (const auto& c : required<json>(j, "children")) children.push_back(field_from_json(c, base_dir));
    return FieldSpec::sum(std::move(children));
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown drift kind '" + kind + "'");
}

json to_json(const FieldSpec& f) {
  json j;
  j["kind"] = f.kind_name();
  j["d"] = f.dimension();
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, FieldSpec::Hardy>) {
          j["kappa"] = k.kappa;
          j["sign"] = k.sign;
        } else if constexpr (std::is_same_v<K, FieldSpec::BoundedBox>) {
          j["M"] = k.M;
          j["direction"] = k.direction;
          j["half_width"] = double_or_inf(k.half_width);
        } else if constexpr (std::is_same_v<K, FieldSpec::GridSampled>) {
          j["file"] = k.source;
          j["nodes_per_axis"] = k.data->grid.nodes_per_axis();
          j["extent"] = k.data->grid.half_width();
        } else if constexpr (std::is_same_v<K, FieldSpec::Sum>) {
          j["children"] = json::array();
          for (const auto& c : k.children) j["children"].push_back(to_json(c));
        } else if constexpr (std::is_same_v<K, FieldSpec::Mollified>) {
          j["base"] = to_json(*k.base);
          j["n"] = k.n;
          j["eps"] = k.eps;
          j["nodes_per_axis"] = k.data->grid.nodes_per_axis();
          j["extent"] = k.data->grid.half_width();
        }
      },
      f.kind());
  json sp = json::array();
  for (const auto& p : f.singular_points()) sp.push_back(p);
  j["singular_points"] = sp;
  return j;
}

DispersionSpec dispersion_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "dispersion spec must be an object");
  const auto kind = required<std::string>(j, "kind");
  const int d = j.value("d", 3);
  if (kind == "identity") return DispersionSpec::identity(d);
  if (kind == "radial_projection") return DispersionSpec::radial_projection(d, required<double>(j, "c"));
  if (kind == "sine_log") return DispersionSpec::sine_log(d, required<double>(j, "c"), required<std::vector<double>>(j, "e"));
  if (kind == "sum") {
    std::vector<DispersionSpec> children;
    for (const auto& c : required<json>(j, "children")) children.push_back(dispersion_from_json(c, base_dir));
    return DispersionSpec::sum(std::move(children));
  }
  if (kind == "grid_sampled") {
    const auto file = required<std::string>(j, "file");
    GridField data = read_grid_field(resolve(base_dir, file));
    const auto holds = j.value("holds", std::string("sigma"));
    if (holds == "sigma") return DispersionSpec::grid_sampled_sigma(std::move(data), file);
    if (holds == "a") return DispersionSpec::grid_sampled_a(std::move(data), file);
    throw Error(ErrorKind::ConfigInvalid, "grid_sampled 'holds' must be sigma or a");
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown dispersion kind '" + kind + "'");
}

json to_json(const DispersionSpec& s) {
  json j;
  j["kind"] = s.kind_name();
  j["d"] = s.dimension();
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, DispersionSpec::RadialProjection>) {
          j["c"] = k.c;
        } else if constexpr (std::is_same_v<K, DispersionSpec::SineLog>) {
          j["c"] = k.c;
          j["e"] = k.e;
        } else if constexpr (std::is_same_v<K, DispersionSpec::Sum>) {
          j["children"] = json::array();
          for (const auto& c : k.children) j["children"].push_back(to_json(c));
        } else if constexpr (std::is_same_v<K, DispersionSpec::GridSampled>) {
          j["file"] = k.source;
          j["nodes_per_axis"] = k.a->grid.nodes_per_axis();
          j["extent"] = k.a->grid.half_width();
        }
      },
      s.kind());
  j["normalization"] = s.normalization();
  return j;
}

json to_json(const FormBoundEstimate& e) {
  json j;
  j["delta"] = e.delta;
  j["lambda"] = e.lambda;
  j["class_kind"] = std::string(to_string(e.class_kind));
  j["method"] = std::string(to_string(e.method));
  j["operator_norm"] = e.operator_norm;
  j["residual"] = e.residual;
  j["iterations"] = e.iterations;
  if (e.grid) {
    j["grid_meta"] = {{"extent", e.grid->extent}, {"spacing", e.grid->spacing}, {"nodes_per_axis", e.grid->nodes_per_axis}};
  } else {
    j["grid_meta"] = nullptr;
  }
  return j;
}

}  // namespace ssde::coefficients
