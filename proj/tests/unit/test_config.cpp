#include "config.hpp"

#include "ufb/errors.hpp"

#include <doctest.h>

using namespace ufb;
using namespace ufb::cli;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("syntax errors carry line and column") {
  const std::string msg = error_of([] { parse_config_text("{\n  \"a\": 1,,\n}", "cfg.json"); });
  CHECK(msg.find("cfg.json:2:10") != std::string::npos);
}

TEST_CASE("resolve merges nested objects and rejects strangers") {
  const json defaults = {{"a", 1}, {"b", {{"c", 2.0}, {"d", "x"}}}, {"e", nullptr}};
  const json r = resolve(defaults, json::parse(R"({"b": {"c": 5}, "e": [1]})"));
  CHECK(r["a"] == 1);
  CHECK(r["b"]["c"] == 5);
  CHECK(r["b"]["d"] == "x");
  CHECK(r["e"].is_array());
  CHECK(error_of([&] { resolve(defaults, json::parse(R"({"b": {"z": 1}})")); }).find("b.z") != std::string::npos);
  CHECK(error_of([&] { resolve(defaults, json::parse(R"({"a": "one"})")); }).find("expected number") !=
        std::string::npos);
}

TEST_CASE("field descriptors from JSON") {
  json resolved;
  const FieldDescriptor c = field_from_json(-1.0, "f", &resolved);
  CHECK(c(Eigen::Vector3d::Zero()) == -1.0);
  CHECK(resolved["kind"] == "constant");

  const FieldDescriptor q = field_from_json(json::parse(R"({"kind": "quadratic", "form": [1, 0, 0, 0, 0, 0]})"), "f");
  CHECK(q(Eigen::Vector3d(2, 5, 5)) == doctest::Approx(4.0));

  field_from_json(json::parse(R"({"kind": "manufactured", "delta": 0.2})"), "b", &resolved);
  CHECK(resolved["tau"] == 30.0);
  CHECK(resolved["lmax"] == 40);

  CHECK_THROWS_AS(field_from_json(json::parse(R"({"kind": "spline"})"), "f"), Error);
  CHECK_THROWS_AS(field_from_json(json::parse(R"({"kind": "manufactured", "tau": 1})"), "f"), Error);
  CHECK_THROWS_AS(field_from_json(json::parse(R"({"kind": "manufactured", "delta": 0.7})"), "f"), Error);
  CHECK_THROWS_AS(field_from_json("text", "f"), Error);
}

TEST_CASE("vector and matrix parsing") {
  CHECK(vec3_from_json(json::parse("[1, 2, 3]"), "v") == Eigen::Vector3d(1, 2, 3));
  CHECK_THROWS_AS(vec3_from_json(json::parse("[1, 2]"), "v"), Error);
  CHECK(matrix3_from_json(json::parse("[[1,0,0],[0,1,0],[0,0,1]]"), "m") == Eigen::Matrix3d::Identity());
}
