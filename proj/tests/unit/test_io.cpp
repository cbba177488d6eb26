#include "ufb/errors.hpp"
#include "ufb/io.hpp"

#include <doctest.h>

#include <filesystem>

using namespace ufb;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "ufb_io_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("fnv1a64 reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(digest_string(0xabcULL) == "fnv1a64:0000000000000abc");
}

TEST_CASE("config digest ignores key order") {
  const auto a = nlohmann::json::parse(R"({"x": 1, "y": [1, 2]})");
  const auto b = nlohmann::json::parse(R"({"y": [1, 2], "x": 1})");
  CHECK(config_digest(a) == config_digest(b));
  CHECK(config_digest(a) != config_digest(nlohmann::json::parse(R"({"x": 2, "y": [1, 2]})")));
}

TEST_CASE("atomic write leaves no temporary behind") {
  const fs::path p = scratch_dir() / "atomic.txt";
  write_atomic(p, "first");
  write_atomic(p, "second");
  CHECK(read_file(p) == "second");
  fs::path tmp = p;
  tmp += ".tmp";
  CHECK(!fs::exists(tmp));
  CHECK_THROWS_AS(read_file(scratch_dir() / "missing.txt"), Error);
}

TEST_CASE("grid round trip through the raw format") {
  ScalarGrid g(Eigen::Vector3d(-1.0, 0.5, 2.0), 0.25, {3, 4, 5});
  for (std::size_t i = 0; i < g.size(); ++i) g.values[i] = 0.1 * double(i) - 1.0 / 3.0;
  const fs::path base = scratch_dir() / "grid";
  write_grid(base, g, {{"note", "test"}});
  fs::path sidecar = base;
  sidecar += ".json";
  const ScalarGrid back = read_grid(sidecar);
  CHECK(back.dims == g.dims);
  CHECK(back.h == g.h);
  CHECK(back.origin == g.origin);
  CHECK(back.values == g.values);
  const auto meta = nlohmann::json::parse(read_file(sidecar));
  CHECK(meta["schema_version"] == kSchemaVersion);
  CHECK(meta["note"] == "test");
}

TEST_CASE("CSV preamble and PLY header") {
  CHECK(csv_preamble("fnv1a64:0") == "# schema_version=1\n# config_digest=fnv1a64:0\n");
  Mesh m;
  m.vertices = {Eigen::Vector3d(0, 0, 0), Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0)};
  m.triangles = {{0, 1, 2}};
  const std::string ply = mesh_to_ply(m, "fnv1a64:0");
  CHECK(ply.rfind("ply\nformat ascii 1.0\n", 0) == 0);
  CHECK(ply.find("element vertex 3") != std::string::npos);
  CHECK(ply.find("element face 1") != std::string::npos);
  CHECK(ply.find("3 0 1 2") != std::string::npos);
}
