#include "config.hpp"

#include "ufb/errors.hpp"
#include "ufb/io.hpp"

#include <map>

namespace ufb::cli {

namespace {

bool same_kind(const json& a, const json& b) {
  if (a.is_null()) return true;
  if (a.is_number() && b.is_number()) return true;
  return a.type() == b.type();
}

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

[[noreturn]] void fail(const std::string& msg) { throw Error(ErrorCode::Config, msg); }

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + ": expected a number");
  return j.get<double>();
}

const std::map<std::string, json>& field_defaults() {
  static const std::map<std::string, json> d = {
      {"constant", {{"kind", "constant"}, {"value", 0.0}}},
      {"affine", {{"kind", "affine"}, {"value", 0.0}, {"gradient", {0.0, 0.0, 0.0}}}},
      {"quadratic",
       {{"kind", "quadratic"}, {"form", {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}}, {"gradient", {0.0, 0.0, 0.0}}, {"value", 0.0}}},
      {"radial", {{"kind", "radial"}, {"c0", 0.0}, {"c1", 1.0}, {"exponent", 2.0}, {"center", {0.0, 0.0, 0.0}}}},
      {"holder", {{"kind", "holder"}, {"c", 1.0}, {"alpha", 0.5}}},
      {"manufactured",
       {{"kind", "manufactured"}, {"tau", 30.0}, {"delta", 0.0}, {"rotation", nullptr}, {"amplitude", 1.0},
        {"lmax", kDefaultLmax}}},
      {"grid", {{"kind", "grid"}, {"path", ""}}},
  };
  return d;
}

}  // namespace

json parse_config_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("syntax error");
    if (pos != std::string::npos) what = what.substr(pos);
    fail(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

json load_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    fail(e.what());
  }
  return parse_config_text(text, path);
}

json resolve(const json& defaults, const json& user, const std::string& where) {
  if (!user.is_object()) fail((where.empty() ? "config" : where) + ": expected an object");
  json out = defaults;
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = join(where, it.key());
    if (!defaults.contains(it.key())) fail("unknown key '" + path + "'");
    const json& d = defaults.at(it.key());
    if (!same_kind(d, it.value())) fail(path + ": expected " + std::string(d.type_name()) + ", got " + it.value().type_name());
    if (d.is_object() && !d.empty()) {
      out[it.key()] = resolve(d, it.value(), path);
    } else {
      out[it.key()] = it.value();
    }
  }
  return out;
}

Eigen::Vector3d vec3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where + ": expected an array of 3 numbers");
  return {number(j[0], where), number(j[1], where), number(j[2], where)};
}

Eigen::Matrix3d matrix3_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where + ": expected a 3x3 array");
  Eigen::Matrix3d m;
  for (int i = 0; i < 3; ++i) m.row(i) = vec3_from_json(j[i], where).transpose();
  return m;
}

FieldDescriptor field_from_json(const json& j, const std::string& where, json* resolved) {
  if (j.is_number()) {
    if (resolved) *resolved = {{"kind", "constant"}, {"value", j.get<double>()}};
    return FieldDescriptor::constant(j.get<double>());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    fail(where + ": expected a number or an object with a string 'kind'");
  }
  const std::string kind = j["kind"];
  const auto d = field_defaults().find(kind);
  if (d == field_defaults().end()) fail(where + ": unknown field kind '" + kind + "'");
  const json f = resolve(d->second, j, where);
  if (resolved) *resolved = f;
  try {
    if (kind == "constant") return FieldDescriptor::constant(f["value"]);
    if (kind == "affine") return FieldDescriptor::affine(f["value"], vec3_from_json(f["gradient"], where + ".gradient"));
    if (kind == "quadratic") {
      const json& c = f["form"];
      if (!c.is_array() || c.size() != 6) fail(where + ".form: expected m11,m22,m33,m12,m13,m23");
      std::array<double, 6> v;
      for (int i = 0; i < 6; ++i) v[i] = number(c[i], where + ".form");
      return FieldDescriptor::quadratic(QuadraticForm::from_coefficients(v),
                                        vec3_from_json(f["gradient"], where + ".gradient"), f["value"]);
    }
    if (kind == "radial") {
      return FieldDescriptor::radial(f["c0"], f["c1"], f["exponent"], vec3_from_json(f["center"], where + ".center"));
    }
    if (kind == "holder") return FieldDescriptor::holder(f["c"], f["alpha"]);
    if (kind == "manufactured") {
      const Eigen::Matrix3d q = f["rotation"].is_null() ? Eigen::Matrix3d::Identity()
                                                         : matrix3_from_json(f["rotation"], where + ".rotation");
      if ((q.transpose() * q - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-10) {
        fail(where + ".rotation: not orthogonal");
      }
      const double delta = f["delta"];
      if (!(delta >= 0.0 && delta <= 0.5)) fail(where + ".delta: outside [0, 1/2]");
      return FieldDescriptor::manufactured(f["tau"], delta, q, f["amplitude"], f["lmax"].get<int>());
    }
    // grid
    return FieldDescriptor::from_grid(std::make_shared<const ScalarGrid>(read_grid(f["path"].get<std::string>())));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    fail(where + ": " + e.what());
  }
}

}  // namespace ufb::cli
