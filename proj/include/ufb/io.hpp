#pragma once

#include "ufb/blowup.hpp"
#include "ufb/grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ufb {

constexpr int kSchemaVersion = 1;

std::uint64_t fnv1a64(std::string_view bytes);
/// "fnv1a64:" followed by 16 lowercase hex digits.
std::string digest_string(std::uint64_t h);
/// Digest of the compact, key-sorted dump of a resolved config.
std::string config_digest(const nlohmann::json& config);

/// Writes to a sibling temporary file and renames it over `path`.
/// Throws Error(Io).
void write_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// "# schema_version=1" and "# config_digest=…" comment lines.
std::string csv_preamble(const std::string& digest);

/// Raw little-endian float64 values (x fastest) in `<base>.f64` plus a JSON
/// sidecar `<base>.json` with origin, spacing, dims and byte order.
void write_grid(const std::filesystem::path& base, const ScalarGrid& g, const nlohmann::json& extra = {});
/// Reads a grid from its sidecar path. Throws Error(Io) or Error(Config).
ScalarGrid read_grid(const std::filesystem::path& sidecar);

std::string mesh_to_ply(const Mesh& m, const std::string& digest);

/// Two-space indented dump with a trailing newline; keys come out sorted.
std::string dump_json(const nlohmann::json& j);

}  // namespace ufb
