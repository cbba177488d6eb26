#pragma once

#include "ufb/pde.hpp"

#include <json.hpp>

#include <string>

namespace ufb::cli {

using nlohmann::json;

/// Parses text as JSON; syntax errors become Error(Config) with line:column.
json parse_config_text(const std::string& text, const std::string& source);
json load_config(const std::string& path);

/// Overlays `user` on `defaults`. Every key must exist in `defaults` and keep
/// its JSON type (any number fits a number; a null default accepts anything).
/// Nested objects merge recursively. Throws Error(Config) naming the path.
json resolve(const json& defaults, const json& user, const std::string& where = "");

/// Field descriptors in config form, e.g. {"kind": "constant", "value": -1};
/// a bare number is a constant. `resolved` receives the form with defaults.
FieldDescriptor field_from_json(const json& j, const std::string& where, json* resolved = nullptr);
Eigen::Vector3d vec3_from_json(const json& j, const std::string& where);
Eigen::Matrix3d matrix3_from_json(const json& j, const std::string& where);

}  // namespace ufb::cli
