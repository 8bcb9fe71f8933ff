#pragma once

// Strict reader for scenario JSON documents:
//
//   {
//     "vehicle":  {"L": 2.8, "W": 1.9, "a_f": 0.7, "a_r": 0.8},
//     "limits":   {"v_max": 2.0, "a_max": 1.0},
//     "bounds":   {"xmin": 0, "xmax": 10, "ymin": -13, "ymax": 12},
//     "obstacles": [[[x, y], [x, y], ...], ...],
//     "start": [x, y, phi], "goal": [x, y, phi],
//     "planner": {"alpha": 4, "m": 2, "beta": 1.2, "z": 3,
//                 "weights": {"Q1": 1, "Q2": 1e-3, "Q3": 1e-2, "R1": 0, "R2": 1, "R3": 1e-2},
//                 "samples_per_meter": 20, "lambda": 0.5, "seed": 7}
//   }
//
// Unknown keys are rejected; angles are radians.

#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "ritp/errors.hpp"
#include "ritp/scenario.hpp"

namespace ritp {

struct PlannerOverrides {
  std::optional<int> alpha;
  std::optional<int> m;
  std::optional<double> beta;
  std::optional<int> z;
  std::optional<double> q1, q2, q3, r1, r2, r3;
  std::optional<double> samples_per_meter;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
};

struct ScenarioFile {
  Scenario scenario;
  PlannerOverrides planner;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where,
                           std::initializer_list<const char*> allowed) {
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) {
      throw Error(ErrorCode::InvalidInput,
                  "unknown key '" + (where.empty() ? it.key() : where + "." + it.key()) + "'");
    }
  }
}

inline const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) {
    throw Error(ErrorCode::InvalidInput,
                "missing key '" + (where.empty() ? std::string(key) : where + "." + key) + "'");
  }
  return obj.at(key);
}

inline double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidInput, "field '" + field + "': expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw Error(ErrorCode::InvalidInput, "field '" + field + "': not finite");
  return d;
}

inline int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::InvalidInput, "field '" + field + "': expected an integer");
  }
  return v.get<int>();
}

inline const json& object(const json& v, const std::string& field) {
  if (!v.is_object()) throw Error(ErrorCode::InvalidInput, "field '" + field + "': expected an object");
  return v;
}

inline Pose pose(const json& v, const std::string& field) {
  if (!v.is_array() || v.size() != 3) {
    throw Error(ErrorCode::InvalidInput, "field '" + field + "': expected [x, y, phi]");
  }
  return {number(v[0], field + "[0]"), number(v[1], field + "[1]"), number(v[2], field + "[2]")};
}

inline int line_of(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace detail

inline ScenarioFile parse_scenario(const std::string& text) {
  using detail::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput,
                "line " + std::to_string(detail::line_of(text, e.byte)) + ": " + e.what());
  }
  detail::object(doc, "<root>");
  detail::reject_unknown(doc, "",
                         {"vehicle", "limits", "bounds", "obstacles", "start", "goal", "planner"});

  ScenarioFile out;
  Scenario& sc = out.scenario;

  const auto& veh = detail::object(detail::require(doc, "", "vehicle"), "vehicle");
  detail::reject_unknown(veh, "vehicle", {"L", "W", "a_f", "a_r"});
  sc.vehicle.wheelbase = detail::number(detail::require(veh, "vehicle", "L"), "vehicle.L");
  sc.vehicle.width = detail::number(detail::require(veh, "vehicle", "W"), "vehicle.W");
  sc.vehicle.front_overhang = detail::number(detail::require(veh, "vehicle", "a_f"), "vehicle.a_f");
  sc.vehicle.rear_overhang = detail::number(detail::require(veh, "vehicle", "a_r"), "vehicle.a_r");

  const auto& lim = detail::object(detail::require(doc, "", "limits"), "limits");
  detail::reject_unknown(lim, "limits", {"v_max", "a_max"});
  sc.v_max = detail::number(detail::require(lim, "limits", "v_max"), "limits.v_max");
  sc.a_max = detail::number(detail::require(lim, "limits", "a_max"), "limits.a_max");

  const auto& b = detail::object(detail::require(doc, "", "bounds"), "bounds");
  detail::reject_unknown(b, "bounds", {"xmin", "xmax", "ymin", "ymax"});
  sc.bounds = {detail::number(detail::require(b, "bounds", "xmin"), "bounds.xmin"),
               detail::number(detail::require(b, "bounds", "xmax"), "bounds.xmax"),
               detail::number(detail::require(b, "bounds", "ymin"), "bounds.ymin"),
               detail::number(detail::require(b, "bounds", "ymax"), "bounds.ymax")};

  const auto& obs = detail::require(doc, "", "obstacles");
  if (!obs.is_array()) throw Error(ErrorCode::InvalidInput, "field 'obstacles': expected an array");
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const std::string f = "obstacles[" + std::to_string(i) + "]";
    if (!obs[i].is_array()) throw Error(ErrorCode::InvalidInput, "field '" + f + "': expected vertex list");
    std::vector<Vec2> verts;
    for (std::size_t k = 0; k < obs[i].size(); ++k) {
      const auto& v = obs[i][k];
      const std::string fv = f + "[" + std::to_string(k) + "]";
      if (!v.is_array() || v.size() != 2) {
        throw Error(ErrorCode::InvalidInput, "field '" + fv + "': expected [x, y]");
      }
      verts.emplace_back(detail::number(v[0], fv), detail::number(v[1], fv));
    }
    try {
      sc.obstacles.emplace_back(std::move(verts));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidInput, "field '" + f + "': " + e.what());
    }
  }

  sc.start = detail::pose(detail::require(doc, "", "start"), "start");
  sc.goal = detail::pose(detail::require(doc, "", "goal"), "goal");

  if (doc.contains("planner")) {
    const auto& pl = detail::object(doc.at("planner"), "planner");
    detail::reject_unknown(pl, "planner",
                           {"alpha", "m", "beta", "z", "weights", "samples_per_meter", "lambda", "seed"});
    auto& o = out.planner;
    if (pl.contains("alpha")) o.alpha = detail::integer(pl.at("alpha"), "planner.alpha");
    if (pl.contains("m")) o.m = detail::integer(pl.at("m"), "planner.m");
    if (pl.contains("beta")) o.beta = detail::number(pl.at("beta"), "planner.beta");
    if (pl.contains("z")) o.z = detail::integer(pl.at("z"), "planner.z");
    if (pl.contains("samples_per_meter")) {
      o.samples_per_meter = detail::number(pl.at("samples_per_meter"), "planner.samples_per_meter");
    }
    if (pl.contains("lambda")) o.lambda = detail::number(pl.at("lambda"), "planner.lambda");
    if (pl.contains("seed")) {
      if (!pl.at("seed").is_number_unsigned()) {
        throw Error(ErrorCode::InvalidInput, "field 'planner.seed': expected a non-negative integer");
      }
      o.seed = pl.at("seed").get<std::uint64_t>();
    }
    if (pl.contains("weights")) {
      const auto& w = detail::object(pl.at("weights"), "planner.weights");
      detail::reject_unknown(w, "planner.weights", {"Q1", "Q2", "Q3", "R1", "R2", "R3"});
      auto get = [&](const char* k, std::optional<double>& dst) {
        if (w.contains(k)) dst = detail::number(w.at(k), std::string("planner.weights.") + k);
      };
      get("Q1", o.q1);
      get("Q2", o.q2);
      get("Q3", o.q3);
      get("R1", o.r1);
      get("R2", o.r2);
      get("R3", o.r3);
    }
  }

  try {
    sc.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidInput, e.what());
  }
  return out;
}

inline ScenarioFile load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

}  // namespace ritp
