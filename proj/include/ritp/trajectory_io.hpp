#pragma once

// Trajectory CSV: header "t,x,y,phi,delta,v,omega", 9 significant digits.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ritp/errors.hpp"
#include "ritp/pipeline.hpp"

namespace ritp {

inline constexpr const char* kTrajectoryHeader = "t,x,y,phi,delta,v,omega";

inline std::string format_trajectory_csv(const Trajectory& tr) {
  std::string out = kTrajectoryHeader;
  out += '\n';
  char buf[256];
  for (const auto& s : tr.samples) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", s.t, s.x, s.y, s.phi,
                  s.delta, s.v, s.omega);
    out += buf;
  }
  return out;
}

/// Boundaries are recovered as interior samples with v == 0.
inline Trajectory parse_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidInput, "line 1: empty trajectory file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) {
    throw Error(ErrorCode::InvalidInput, std::string("line 1: expected header '") + kTrajectoryHeader + "'");
  }
  Trajectory tr;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    TrajectorySample s;
    double* fields[] = {&s.t, &s.x, &s.y, &s.phi, &s.delta, &s.v, &s.omega};
    std::istringstream ls(line);
    std::string cell;
    int col = 0;
    while (std::getline(ls, cell, ',')) {
      if (col >= 7) throw Error(ErrorCode::InvalidInput, "line " + std::to_string(lineno) + ": too many columns");
      try {
        std::size_t used = 0;
        *fields[col] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidInput,
                    "line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != 7) throw Error(ErrorCode::InvalidInput, "line " + std::to_string(lineno) + ": expected 7 columns");
    if (!tr.samples.empty() && !(s.t > tr.samples.back().t)) {
      throw Error(ErrorCode::InvalidInput, "line " + std::to_string(lineno) + ": time not increasing");
    }
    tr.samples.push_back(s);
  }
  if (tr.samples.empty()) throw Error(ErrorCode::InvalidInput, "trajectory has no samples");
  for (std::size_t k = 1; k + 1 < tr.samples.size(); ++k) {
    if (tr.samples[k].v == 0.0) tr.segment_boundaries.push_back(k);
  }
  return tr;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path + "'");
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ritp
