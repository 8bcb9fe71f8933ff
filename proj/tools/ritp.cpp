// ritp: plan parking trajectories, benchmark start-pose grids, simulate rollouts.

#include <iostream>

#include "CLI11.hpp"
#include "ritp/cli.hpp"

namespace {

void add_planner_flags(CLI::App* cmd, ritp::PlannerFlags& f) {
  cmd->add_option("--alpha", f.alpha, "polynomial order")->check(CLI::IsMember({3, 4, 5}));
  cmd->add_option("--tsc-m", f.tsc_m, "terminal smoothing offset (0 disables)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--beta", f.beta, "error-vector growth factor (> 1)");
  cmd->add_option("--z", f.z, "error-vector window half-width")->check(CLI::NonNegativeNumber);
  cmd->add_flag("--paper-exact-tsc", f.paper_exact_tsc, "constrain only the x-projection at terminals");
  cmd->add_option("--seed", f.seed, "seed recorded in the report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Iterative QP trajectory planner for automated parking"};
  app.require_subcommand(1);

  ritp::PlanOptions plan;
  auto* p = app.add_subcommand("plan", "plan a trajectory for a scenario file");
  p->add_option("scenario", plan.scenario_path, "scenario JSON")->required();
  p->add_option("--out", plan.out_dir, "output directory for trajectory.csv and report.json");
  p->add_option("--workers", plan.flags.workers, "segment workers")->check(CLI::PositiveNumber);
  add_planner_flags(p, plan.flags);

  ritp::BenchOptions bench;
  auto* b = app.add_subcommand("bench", "plan from every pose of a start grid");
  b->add_option("scenario", bench.scenario_path, "scenario JSON")->required();
  b->add_option("--x-min", bench.grid.x_min)->required();
  b->add_option("--x-max", bench.grid.x_max)->required();
  b->add_option("--x-step", bench.grid.x_step)->required();
  b->add_option("--y-min", bench.grid.y_min)->required();
  b->add_option("--y-max", bench.grid.y_max)->required();
  b->add_option("--y-step", bench.grid.y_step)->required();
  b->add_option("--yaw", bench.grid.yaw, "start yaw (default: scenario start yaw)");
  b->add_option("--repeat", bench.repeat, "plans per pose")->check(CLI::PositiveNumber);
  b->add_option("--workers", bench.workers, "poses planned concurrently")->check(CLI::PositiveNumber);
  b->add_option("--out", bench.out_path, "CSV output file");
  add_planner_flags(b, bench.flags);

  ritp::SimulateOptions sim;
  auto* s = app.add_subcommand("simulate", "roll out a trajectory under command noise");
  s->add_option("trajectory", sim.trajectory_path, "trajectory CSV")->required();
  s->add_option("--scenario", sim.scenario_path, "scenario JSON for vehicle and obstacles");
  s->add_option("--level", sim.level, "none | low | medium | high")
      ->check(CLI::IsMember({"none", "low", "medium", "high"}));
  s->add_option("--v-amp", sim.v_amp, "speed noise amplitude, m/s");
  s->add_option("--delta-amp", sim.delta_amp, "steering noise amplitude, rad");
  s->add_option("--pos-amp", sim.pos_amp, "localization noise amplitude, m");
  s->add_option("--seeds", sim.seeds, "number of rollouts")->check(CLI::PositiveNumber);
  s->add_option("--seed", sim.seed, "first seed");
  s->add_option("--workers", sim.workers)->check(CLI::PositiveNumber);
  s->add_option("--out", sim.out_path, "JSON output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ritp::kExitBadInput;
  }

  if (p->parsed()) return ritp::cmd_plan(plan, std::cerr);
  if (b->parsed()) return ritp::cmd_bench(bench, std::cerr);
  return ritp::cmd_simulate(sim, std::cout, std::cerr);
}
