#pragma once

#include <filesystem>
#include <json.hpp>

#include "ssde/coefficients/dispersion.hpp"
#include "ssde/coefficients/field.hpp"
#include "ssde/coefficients/form_bound.hpp"

namespace ssde::coefficients {

/// Drift schema:
///   {"kind": "hardy", "d": 3, "kappa": 0.25, "sign": 1}
///   {"kind": "bounded_box", "d": 3, "M": 1.0, "direction": [1,0,0], "half_width": 2.0}
///   {"kind": "grid_sampled", "file": "b.grid"}
///   {"kind": "sum", "children": [...]}
/// Relative file names resolve against `base_dir`.
FieldSpec field_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const FieldSpec& f);

/// Dispersion schema:
///   {"kind": "identity", "d": 3}
///   {"kind": "radial_projection", "d": 3, "c": 0.1}
///   {"kind": "sine_log", "d": 3, "c": 0.1, "e": [1,0,0]}
///   {"kind": "sum", "children": [...]}
///   {"kind": "grid_sampled", "file": "sigma.grid", "holds": "sigma" | "a"}
DispersionSpec dispersion_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const DispersionSpec& s);

nlohmann::json to_json(const FormBoundEstimate& e);

}  // namespace ssde::coefficients
