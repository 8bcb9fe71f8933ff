#pragma once

#include <string>

#include "ritp/geometry.hpp"
#include "ritp/scenario_io.hpp"

namespace testing_util {

inline std::string scenario_path(const std::string& name) {
  return std::string(RITP_DATA_DIR) + "/" + name + ".json";
}

inline ritp::Scenario load(const std::string& name) { return ritp::load_scenario(scenario_path(name)).scenario; }

/// Wide empty lot with the car at the origin facing +x.
inline ritp::Scenario open_lot(const ritp::Pose& goal) {
  ritp::Scenario sc;
  sc.bounds = {-10.0, 20.0, -10.0, 10.0};
  sc.start = {0.0, 0.0, 0.0};
  sc.goal = goal;
  return sc;
}

}  // namespace testing_util
