#pragma once

// The three commands behind the `ritp` executable. Each returns a process
// exit code: 0 success, 1 malformed input, 2 planning failure.

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ritp/errors.hpp"
#include "ritp/pipeline.hpp"
#include "ritp/scenario_io.hpp"
#include "ritp/sim.hpp"
#include "ritp/trajectory_io.hpp"

namespace ritp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 1;
inline constexpr int kExitPlanningFailed = 2;

/// Planner settings given on the command line; they win over the scenario file.
struct PlannerFlags {
  std::optional<int> alpha;
  std::optional<int> tsc_m;
  std::optional<double> beta;
  std::optional<int> z;
  bool paper_exact_tsc = false;
  int workers = 4;
  std::optional<std::uint64_t> seed;
};

inline PlannerConfig make_planner_config(const PlannerOverrides& o, const PlannerFlags& f) {
  PlannerConfig c;
  auto& it = c.itca;
  if (o.alpha) it.alpha = *o.alpha;
  if (o.m) it.m = *o.m;
  if (o.beta) it.beta = *o.beta;
  if (o.z) it.z = *o.z;
  if (o.q1) it.q1 = *o.q1;
  if (o.q2) it.q2 = *o.q2;
  if (o.q3) it.q3 = *o.q3;
  if (o.r1) c.velocity.r1 = *o.r1;
  if (o.r2) c.velocity.r2 = *o.r2;
  if (o.r3) c.velocity.r3 = *o.r3;
  if (o.samples_per_meter) it.samples_per_meter = *o.samples_per_meter;
  if (o.lambda) c.velocity.lambda = *o.lambda;
  if (f.alpha) it.alpha = *f.alpha;
  if (f.tsc_m) it.m = *f.tsc_m;
  if (f.beta) it.beta = *f.beta;
  if (f.z) it.z = *f.z;
  if (f.paper_exact_tsc) it.paper_exact_tsc = true;
  c.workers = f.workers;
  try {
    it.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidInput, e.what());
  }
  if (c.workers < 1) throw Error(ErrorCode::InvalidInput, "workers must be >= 1");
  if (!(c.velocity.lambda > 0.0 && c.velocity.lambda < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "lambda must be in (0, 1)");
  }
  return c;
}

inline bool trajectory_collision_free(const Trajectory& tr, const Scenario& sc) {
  const auto obstacles = sc.collision_set();
  for (const auto& s : tr.samples) {
    if (!collision_free_pose(s.pose(), sc.vehicle, obstacles)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// plan

struct PlanOptions {
  std::string scenario_path;
  std::string out_dir = ".";
  PlannerFlags flags;
};

inline nlohmann::json plan_report(const PlanResult& r, const Scenario& sc) {
  nlohmann::json j;
  j["success"] = true;
  j["segment_count"] = r.segments.size();
  auto& segs = j["segments"] = nlohmann::json::array();
  auto& iters = j["iterations"] = nlohmann::json::array();
  for (const auto& s : r.segments) {
    iters.push_back(s.path.iterations);
    segs.push_back({{"zeta", s.reference.zeta},
                    {"length", s.reference.length()},
                    {"iterations", s.path.iterations},
                    {"t_max", s.speed.t_max},
                    {"path_seconds", s.path_seconds},
                    {"speed_seconds", s.speed_seconds}});
  }
  j["times"] = {{"search", r.times.search},
                {"segments", r.times.segments},
                {"join", r.times.join},
                {"total", r.times.total}};
  j["duration"] = r.trajectory.duration();
  j["samples"] = r.trajectory.samples.size();
  j["segment_boundaries"] = r.trajectory.segment_boundaries;
  j["collision_free"] = trajectory_collision_free(r.trajectory, sc);
  return j;
}

inline int cmd_plan(const PlanOptions& opt, std::ostream& log) {
  ScenarioFile sf;
  PlannerConfig cfg;
  try {
    sf = load_scenario(opt.scenario_path);
    cfg = make_planner_config(sf.planner, opt.flags);
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  std::uint64_t seed = opt.flags.seed ? *opt.flags.seed : sf.planner.seed.value_or(0);

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(opt.out_dir, ec);
  const std::string csv_path = (fs::path(opt.out_dir) / "trajectory.csv").string();
  const std::string report_path = (fs::path(opt.out_dir) / "report.json").string();

  nlohmann::json report;
  int code = kExitOk;
  try {
    const PlanResult r = plan(sf.scenario, cfg);
    write_text(csv_path, format_trajectory_csv(r.trajectory));
    report = plan_report(r, sf.scenario);
    log << "planned " << r.segments.size() << " segment(s), " << r.trajectory.samples.size()
        << " samples in " << r.times.total << " s\n";
  } catch (const PlanningFailed& e) {
    report = {{"success", false},
              {"error", std::string(to_string(e.cause()))},
              {"segment", e.segment()},
              {"message", e.what()}};
    log << "error: " << e.what() << "\n";
    code = kExitPlanningFailed;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  report["seed"] = seed;
  report["workers"] = cfg.workers;
  report["config"] = {{"alpha", cfg.itca.alpha},
                      {"m", cfg.itca.m},
                      {"beta", cfg.itca.beta},
                      {"z", cfg.itca.z},
                      {"paper_exact_tsc", cfg.itca.paper_exact_tsc}};
  try {
    write_text(report_path, report.dump(2) + "\n");
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return code;
}

// ---------------------------------------------------------------------------
// bench

struct GridSpec {
  double x_min = 0, x_max = 0, x_step = 1;
  double y_min = 0, y_max = 0, y_step = 1;
  std::optional<double> yaw;  // default: scenario start yaw
};

inline std::vector<double> grid_axis(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw Error(ErrorCode::InvalidInput, "grid range/step invalid");
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + i * step;
  return v;
}

inline std::vector<Pose> grid_poses(const GridSpec& g, double default_yaw) {
  std::vector<Pose> out;
  const auto xs = grid_axis(g.x_min, g.x_max, g.x_step);
  const auto ys = grid_axis(g.y_min, g.y_max, g.y_step);
  for (double x : xs) {
    for (double y : ys) out.push_back({x, y, g.yaw.value_or(default_yaw)});
  }
  return out;
}

struct BenchRow {
  Pose start;
  bool success = false;
  std::string error;
  int segments = 0;
  std::vector<int> iterations;
  bool collision_free = false;
  double t_mean = 0, t_min = 0, t_max = 0;
};

inline BenchRow bench_pose(const Scenario& base, const PlannerConfig& cfg, const Pose& start, int repeat) {
  BenchRow row;
  row.start = start;
  Scenario sc = base;
  sc.start = start;
  std::vector<double> times;
  for (int k = 0; k < repeat; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const PlanResult r = plan(sc, cfg);
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      if (k == 0) {
        row.success = true;
        row.segments = static_cast<int>(r.segments.size());
        for (const auto& s : r.segments) row.iterations.push_back(s.path.iterations);
        row.collision_free = trajectory_collision_free(r.trajectory, sc);
      }
    } catch (const PlanningFailed& e) {
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      if (k == 0) {
        row.error = std::string(to_string(e.cause()));
        if (e.segment() >= 0) row.error += "@" + std::to_string(e.segment());
      }
    }
  }
  if (!times.empty()) {
    row.t_min = *std::min_element(times.begin(), times.end());
    row.t_max = *std::max_element(times.begin(), times.end());
    double sum = 0;
    for (double t : times) sum += t;
    row.t_mean = sum / times.size();
  }
  return row;
}

inline std::string format_bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "index,x,y,yaw,success,error,segments,iterations,collision_free,time_mean,time_min,time_max\n";
  char buf[512];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::string it;
    for (std::size_t k = 0; k < r.iterations.size(); ++k) it += (k ? ";" : "") + std::to_string(r.iterations[k]);
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%d,%s,%d,%s,%d,%.6f,%.6f,%.6f\n", i, r.start.x,
                  r.start.y, r.start.phi, r.success ? 1 : 0, r.error.c_str(), r.segments, it.c_str(),
                  r.collision_free ? 1 : 0, r.t_mean, r.t_min, r.t_max);
    out += buf;
  }
  return out;
}

struct BenchOptions {
  std::string scenario_path;
  std::string out_path = "bench.csv";
  GridSpec grid;
  int repeat = 1;
  int workers = 4;  // poses planned concurrently; each plan runs single-threaded
  PlannerFlags flags;
};

inline std::vector<BenchRow> run_bench(const Scenario& sc, const PlannerConfig& cfg,
                                       const std::vector<Pose>& poses, int repeat, int workers) {
  std::vector<BenchRow> rows(poses.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < poses.size(); i = next++) rows[i] = bench_pose(sc, cfg, poses[i], repeat);
  };
  const int nw = std::clamp<int>(workers, 1, static_cast<int>(std::max<std::size_t>(poses.size(), 1)));
  std::vector<std::thread> pool;
  for (int w = 1; w < nw; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return rows;
}

inline int cmd_bench(const BenchOptions& opt, std::ostream& log) {
  ScenarioFile sf;
  PlannerConfig cfg;
  std::vector<Pose> poses;
  try {
    sf = load_scenario(opt.scenario_path);
    PlannerFlags f = opt.flags;
    f.workers = 1;
    cfg = make_planner_config(sf.planner, f);
    poses = grid_poses(opt.grid, sf.scenario.start.phi);
    if (opt.repeat < 1 || opt.workers < 1) throw Error(ErrorCode::InvalidInput, "repeat and workers must be >= 1");
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = run_bench(sf.scenario, cfg, poses, opt.repeat, opt.workers);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    write_text(opt.out_path, format_bench_csv(rows));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  const auto ok = std::count_if(rows.begin(), rows.end(), [](const BenchRow& r) { return r.success; });
  log << poses.size() << " poses, " << ok << " planned, " << wall << " s wall\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string trajectory_path;
  std::optional<std::string> scenario_path;  // vehicle and obstacles for the collision rate
  std::string level = "low";
  std::optional<double> v_amp, delta_amp, pos_amp;
  int seeds = 20;
  std::uint64_t seed = 0;  // first seed; rollout i uses seed + i
  int workers = 4;
  std::optional<std::string> out_path;  // default: stdout
};

inline int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& log) {
  Trajectory tr;
  Scenario sc;
  bool have_scenario = false;
  DisturbanceSpec base;
  try {
    tr = parse_trajectory_csv(read_text(opt.trajectory_path));
    if (opt.scenario_path) {
      sc = load_scenario(*opt.scenario_path).scenario;
      have_scenario = true;
    }
    base = disturbance_preset(opt.level);
    if (opt.v_amp) base.v_amp = *opt.v_amp;
    if (opt.delta_amp) base.delta_amp = *opt.delta_amp;
    if (opt.pos_amp) base.pos_amp = *opt.pos_amp;
    if (!(base.v_amp >= 0 && base.delta_amp >= 0 && base.pos_amp >= 0)) {
      throw Error(ErrorCode::InvalidInput, "amplitudes must be >= 0");
    }
    if (opt.seeds < 1 || opt.workers < 1) throw Error(ErrorCode::InvalidInput, "seeds and workers must be >= 1");
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  const VehicleGeom geom = have_scenario ? sc.vehicle : VehicleGeom{};
  const auto obstacles = have_scenario ? sc.collision_set() : std::vector<ConvexPolygon>{};

  const int n = opt.seeds;
  std::vector<RolloutResult> runs(n);
  std::vector<char> collided(n, 0);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      DisturbanceSpec d = base;
      d.seed = opt.seed + static_cast<std::uint64_t>(i);
      runs[i] = rollout(tr, geom, d);
      collided[i] = have_scenario && rollout_collides(runs[i].poses, geom, obstacles);
      runs[i].errors.clear();
      runs[i].errors.shrink_to_fit();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < std::min(opt.workers, n); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  nlohmann::json j;
  j["level"] = opt.level;
  j["v_amp"] = base.v_amp;
  j["delta_amp"] = base.delta_amp;
  j["pos_amp"] = base.pos_amp;
  j["seeds"] = n;
  auto& rows = j["per_seed"] = nlohmann::json::array();
  double mean = 0, worst = 0, hits = 0;
  for (int i = 0; i < n; ++i) {
    rows.push_back({{"seed", opt.seed + static_cast<std::uint64_t>(i)},
                    {"mean_error", runs[i].mean_error},
                    {"max_error", runs[i].max_error},
                    {"std_error", runs[i].std_error},
                    {"collided", collided[i] != 0}});
    mean += runs[i].mean_error;
    worst = std::max(worst, runs[i].max_error);
    hits += collided[i] ? 1 : 0;
  }
  mean /= n;
  double var = 0;
  for (const auto& r : runs) var += (r.mean_error - mean) * (r.mean_error - mean);
  j["aggregate"] = {{"mean_error", mean},
                    {"mean_error_std", std::sqrt(var / n)},
                    {"max_error", worst},
                    {"collision_rate", have_scenario ? nlohmann::json(hits / n) : nlohmann::json(nullptr)}};
  const std::string text = j.dump(2) + "\n";
  if (opt.out_path) {
    try {
      write_text(*opt.out_path, text);
    } catch (const Error& e) {
      log << "error: " << e.what() << "\n";
      return kExitBadInput;
    }
  } else {
    out << text;
  }
  return kExitOk;
}

}  // namespace ritp
