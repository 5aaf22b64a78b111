#ifndef EHRELAY_SCENARIO_HPP
#define EHRELAY_SCENARIO_HPP

// Scenario files and key=value overrides.
//
// A scenario is a JSON object holding either
//   "geometry": {"d_sr", "d_rd"?, "d_sd", "d_sp", "d_rp"} plus "epsilon"
// or
//   "lambdas": {"sr", "rd", "sd", "sp", "rp"}
// together with "eta", "rho", "rs" and exactly one of "i_over_no_db" /
// "i_over_no_linear". A missing d_rd places R on the S-D segment
// (d_rd = d_sd - d_sr). "name", "comment" and "description" are ignored.
//
// Structural problems raise ConfigError; out-of-range values raise
// ScenarioError when the scenario is turned into SystemParams.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "ehrelay/errors.hpp"
#include "ehrelay/model.hpp"

namespace ehrelay {

struct GeometrySpec {
  double d_sr = 1.2;
  std::optional<double> d_rd;  // empty: collinear
  double d_sd = 3.0;
  double d_sp = 3.0;
  double d_rp = 3.0;
  double epsilon = 4.0;
};

struct Scenario {
  std::string name;
  std::optional<GeometrySpec> geometry;
  std::optional<LinkStats> lambdas;
  double eta = 0.7;
  double rho = 0.5;
  double rs = 3.0;
  double i_over_no_value = 6.0;  // as written in the file
  bool i_over_no_in_db = true;

  double i_over_no_linear() const {
    return i_over_no_in_db ? db_to_linear(i_over_no_value) : i_over_no_value;
  }

  LinkStats links() const {
    if (lambdas) return *lambdas;
    const GeometrySpec& g = *geometry;
    NetworkGeometry geo;
    geo.d_sr = g.d_sr;
    geo.d_rd = g.d_rd ? *g.d_rd : g.d_sd - g.d_sr;
    geo.d_sd = g.d_sd;
    geo.d_sp = g.d_sp;
    geo.d_rp = g.d_rp;
    geo.epsilon = g.epsilon;
    return lambdas_from_geometry(geo);
  }

  SystemParams system() const {
    return {links(), eta, rho, i_over_no_linear(), rs};
  }

  /// Canonical form: sorted keys, no ignored fields. Input to scenario_hash.
  nlohmann::json to_json() const {
    nlohmann::json j;
    if (geometry) {
      nlohmann::json g = {{"d_sr", geometry->d_sr},
                          {"d_sd", geometry->d_sd},
                          {"d_sp", geometry->d_sp},
                          {"d_rp", geometry->d_rp}};
      if (geometry->d_rd) g["d_rd"] = *geometry->d_rd;
      j["geometry"] = g;
      j["epsilon"] = geometry->epsilon;
    } else {
      j["lambdas"] = {{"sr", lambdas->lambda_sr}, {"rd", lambdas->lambda_rd},
                      {"sd", lambdas->lambda_sd}, {"sp", lambdas->lambda_sp},
                      {"rp", lambdas->lambda_rp}};
    }
    j["eta"] = eta;
    j["rho"] = rho;
    j["rs"] = rs;
    j[i_over_no_in_db ? "i_over_no_db" : "i_over_no_linear"] = i_over_no_value;
    return j;
  }
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string scenario_hash(const Scenario& s) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(s.to_json().dump())));
  return buf;
}

namespace detail {

inline double number_field(const nlohmann::json& obj, const char* key,
                           const std::string& where) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError(where + ": missing \"" + key + "\"");
  }
  if (!it->is_number()) {
    throw ConfigError(where + ": \"" + key + "\" must be a number");
  }
  return it->get<double>();
}

inline void reject_unknown(const nlohmann::json& obj,
                           std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + ": unknown key \"" + key + "\"");
  }
}

}  // namespace detail

inline Scenario parse_scenario(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
  detail::reject_unknown(j,
                         {"name", "comment", "description", "geometry",
                          "epsilon", "lambdas", "eta", "rho", "rs",
                          "i_over_no_db", "i_over_no_linear"},
                         "scenario");
  Scenario s;
  if (auto it = j.find("name"); it != j.end() && it->is_string()) {
    s.name = it->get<std::string>();
  }

  const bool has_geo = j.contains("geometry");
  const bool has_lambdas = j.contains("lambdas");
  if (has_geo == has_lambdas) {
    throw ConfigError(
        "scenario: exactly one of \"geometry\" and \"lambdas\" is required");
  }
  if (has_geo) {
    const auto& g = j.at("geometry");
    if (!g.is_object()) throw ConfigError("geometry: expected an object");
    detail::reject_unknown(g, {"d_sr", "d_rd", "d_sd", "d_sp", "d_rp"},
                           "geometry");
    GeometrySpec geo;
    geo.d_sr = detail::number_field(g, "d_sr", "geometry");
    if (g.contains("d_rd")) geo.d_rd = detail::number_field(g, "d_rd", "geometry");
    geo.d_sd = detail::number_field(g, "d_sd", "geometry");
    geo.d_sp = detail::number_field(g, "d_sp", "geometry");
    geo.d_rp = detail::number_field(g, "d_rp", "geometry");
    geo.epsilon = detail::number_field(j, "epsilon", "scenario");
    s.geometry = geo;
  } else {
    if (j.contains("epsilon")) {
      throw ConfigError("scenario: \"epsilon\" only applies with \"geometry\"");
    }
    const auto& l = j.at("lambdas");
    if (!l.is_object()) throw ConfigError("lambdas: expected an object");
    detail::reject_unknown(l, {"sr", "rd", "sd", "sp", "rp"}, "lambdas");
    s.lambdas = LinkStats{detail::number_field(l, "sr", "lambdas"),
                          detail::number_field(l, "rd", "lambdas"),
                          detail::number_field(l, "sd", "lambdas"),
                          detail::number_field(l, "sp", "lambdas"),
                          detail::number_field(l, "rp", "lambdas")};
  }

  s.eta = detail::number_field(j, "eta", "scenario");
  s.rho = detail::number_field(j, "rho", "scenario");
  s.rs = detail::number_field(j, "rs", "scenario");
  const bool db = j.contains("i_over_no_db");
  const bool lin = j.contains("i_over_no_linear");
  if (db == lin) {
    throw ConfigError(
        "scenario: exactly one of \"i_over_no_db\" and \"i_over_no_linear\" "
        "is required");
  }
  s.i_over_no_in_db = db;
  s.i_over_no_value =
      detail::number_field(j, db ? "i_over_no_db" : "i_over_no_linear",
                           "scenario");
  return s;
}

/// Reads and parses a JSON file. Missing or malformed files raise ConfigError.
inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Applies "key=value". Keys: rho, eta, rs, i_over_no_db, i_over_no_linear,
/// d_sr, d_rd, d_sd, d_sp, d_rp, epsilon (geometry scenarios) and
/// lambda_sr, lambda_rd, lambda_sd, lambda_sp, lambda_rp (lambda scenarios).
inline void apply_override(Scenario& s, std::string_view key, double v) {
  const auto need_geo = [&]() -> GeometrySpec& {
    if (!s.geometry) {
      throw ConfigError("override " + std::string(key) +
                        ": scenario has no geometry");
    }
    return *s.geometry;
  };
  const auto need_lambdas = [&]() -> LinkStats& {
    if (!s.lambdas) {
      throw ConfigError("override " + std::string(key) +
                        ": scenario has no lambdas");
    }
    return *s.lambdas;
  };
  if (key == "rho") s.rho = v;
  else if (key == "eta") s.eta = v;
  else if (key == "rs") s.rs = v;
  else if (key == "i_over_no_db") { s.i_over_no_value = v; s.i_over_no_in_db = true; }
  else if (key == "i_over_no_linear") { s.i_over_no_value = v; s.i_over_no_in_db = false; }
  else if (key == "d_sr") need_geo().d_sr = v;
  else if (key == "d_rd") need_geo().d_rd = v;
  else if (key == "d_sd") need_geo().d_sd = v;
  else if (key == "d_sp") need_geo().d_sp = v;
  else if (key == "d_rp") need_geo().d_rp = v;
  else if (key == "epsilon") need_geo().epsilon = v;
  else if (key == "lambda_sr") need_lambdas().lambda_sr = v;
  else if (key == "lambda_rd") need_lambdas().lambda_rd = v;
  else if (key == "lambda_sd") need_lambdas().lambda_sd = v;
  else if (key == "lambda_sp") need_lambdas().lambda_sp = v;
  else if (key == "lambda_rp") need_lambdas().lambda_rp = v;
  else throw ConfigError("unknown override key \"" + std::string(key) + "\"");
}

inline void apply_override(Scenario& s, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override \"" + std::string(assignment) +
                      "\": expected key=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) {
    throw ConfigError("override " + key + ": \"" + text + "\" is not a number");
  }
  apply_override(s, key, v);
}

}  // namespace ehrelay

#endif  // EHRELAY_SCENARIO_HPP
