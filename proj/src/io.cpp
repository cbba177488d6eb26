#include "ufb/io.hpp"

#include "ufb/errors.hpp"
#include "ufb/format.hpp"

#include <bit>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ufb {

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_string(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const nlohmann::json& config) { return digest_string(fnv1a64(config.dump())); }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), std::streamsize(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot rename onto " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string csv_preamble(const std::string& digest) {
  return "# schema_version=" + std::to_string(kSchemaVersion) + "\n# config_digest=" + digest + "\n";
}

void write_grid(const std::filesystem::path& base, const ScalarGrid& g, const nlohmann::json& extra) {
  std::string raw(g.values.size() * 8, '\0');
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const std::uint64_t v = to_little(std::bit_cast<std::uint64_t>(g.values[i]));
    std::memcpy(raw.data() + 8 * i, &v, 8);
  }
  std::filesystem::path data = base;
  data += ".f64";
  std::filesystem::path side = base;
  side += ".json";
  nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
  j["schema_version"] = kSchemaVersion;
  j["data_file"] = data.filename().string();
  j["dtype"] = "float64";
  j["byte_order"] = "little";
  j["layout"] = "x_fastest";
  j["dims"] = {g.dims[0], g.dims[1], g.dims[2]};
  j["origin"] = {g.origin(0), g.origin(1), g.origin(2)};
  j["spacing"] = g.h;
  write_atomic(data, raw);
  write_atomic(side, dump_json(j));
}

ScalarGrid read_grid(const std::filesystem::path& sidecar) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(sidecar));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "grid sidecar " + sidecar.string() + ": " + e.what());
  }
  ScalarGrid g;
  try {
    if (j.at("dtype") != "float64" || j.at("byte_order") != "little") {
      throw Error(ErrorCode::Config, "unsupported grid encoding in " + sidecar.string());
    }
    for (int a = 0; a < 3; ++a) {
      g.dims[a] = j.at("dims").at(a).get<int>();
      g.origin(a) = j.at("origin").at(a).get<double>();
    }
    g.h = j.at("spacing").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Config, "grid sidecar " + sidecar.string() + ": " + e.what());
  }
  if (g.dims[0] < 2 || g.dims[1] < 2 || g.dims[2] < 2 || !(g.h > 0.0)) {
    throw Error(ErrorCode::Config, "degenerate grid in " + sidecar.string());
  }
  const std::filesystem::path data = sidecar.parent_path() / j.at("data_file").get<std::string>();
  const std::string raw = read_file(data);
  const std::size_t n = std::size_t(g.dims[0]) * g.dims[1] * g.dims[2];
  if (raw.size() != 8 * n) throw Error(ErrorCode::Io, data.string() + " has the wrong size");
  g.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t v;
    std::memcpy(&v, raw.data() + 8 * i, 8);
    g.values[i] = std::bit_cast<double>(to_little(v));
  }
  return g;
}

std::string mesh_to_ply(const Mesh& m, const std::string& digest) {
  std::string s = "ply\nformat ascii 1.0\ncomment schema_version=" + std::to_string(kSchemaVersion) +
                  "\ncomment config_digest=" + digest + "\nelement vertex " + std::to_string(m.vertices.size()) +
                  "\nproperty double x\nproperty double y\nproperty double z\nelement face " +
                  std::to_string(m.triangles.size()) + "\nproperty list uchar int vertex_indices\nend_header\n";
  for (const auto& v : m.vertices) {
    s += format_double(v.x()) + ' ' + format_double(v.y()) + ' ' + format_double(v.z()) + '\n';
  }
  for (const auto& t : m.triangles) {
    s += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  }
  return s;
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace ufb
