#include <gtest/gtest.h>

#include <map>

#include "common.hpp"
#include "ritp/pipeline.hpp"
#include "ritp/sim.hpp"

using namespace ritp;

namespace {

const PlanResult& planned(const std::string& name) {
  static std::map<std::string, PlanResult> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, plan(testing_util::load(name))).first;
  return it->second;
}

double mean_over_seeds(const Trajectory& tr, const VehicleGeom& g, double va, double da, int seeds) {
  double sum = 0.0;
  for (int s = 0; s < seeds; ++s) sum += rollout(tr, g, {va, da, 0.01, static_cast<std::uint64_t>(s)}).mean_error;
  return sum / seeds;
}

}  // namespace

TEST(DifferentialSpeeds, Examples) {
  const auto [l0, r0] = differential_speeds(1.3, 0.0, 2.8, 1.6);
  EXPECT_DOUBLE_EQ(l0, 1.3);
  EXPECT_DOUBLE_EQ(r0, 1.3);
  const auto [l, r] = differential_speeds(0.5, M_PI / 4, 0.18, 0.165);
  EXPECT_NEAR(l, 0.5 * (1 - 0.165 / 0.36), 1e-12);
  EXPECT_NEAR(l, 0.2708, 1e-4);
  EXPECT_NEAR(r, 0.7292, 1e-4);
  for (double d : {-1.2, -0.3, 0.4, 1.5}) {
    const auto [a, b] = differential_speeds(0.8, d, 0.18, 0.165);
    EXPECT_NEAR(a + b, 1.6, 1e-12);
  }
  EXPECT_THROW(differential_speeds(1.0, M_PI / 2, 2.8, 1.6), Error);
  EXPECT_THROW(differential_speeds(1.0, 0.1, 0.0, 1.6), Error);
}

TEST(Presets, Levels) {
  const auto none = disturbance_preset("none");
  EXPECT_EQ(none.v_amp, 0.0);
  EXPECT_EQ(none.pos_amp, 0.0);
  const auto low = disturbance_preset("low");
  EXPECT_EQ(low.v_amp, 0.2);
  EXPECT_EQ(low.delta_amp, 0.05);
  EXPECT_EQ(low.pos_amp, 0.01);
  const auto high = disturbance_preset("high", 9);
  EXPECT_EQ(high.v_amp, 1.0);
  EXPECT_EQ(high.delta_amp, 0.34);
  EXPECT_EQ(high.seed, 9u);
  EXPECT_THROW(disturbance_preset("extreme"), Error);
}

TEST(Rollout, NegativeAmplitudeIsInvalid) {
  EXPECT_THROW(rollout(planned("reverse").trajectory, VehicleGeom{}, {-0.1, 0.0, 0.0, 0}), Error);
}

class Scenarios : public ::testing::TestWithParam<const char*> {};

TEST_P(Scenarios, NoDisturbanceReproducesPlan) {
  const auto sc = testing_util::load(GetParam());
  const auto r = rollout(planned(GetParam()).trajectory, sc.vehicle, disturbance_preset("none"));
  EXPECT_LT(r.mean_error, 1e-4);
  EXPECT_LT(r.max_error, 1e-4);
  EXPECT_EQ(r.poses.size(), planned(GetParam()).trajectory.samples.size());
  const std::vector<std::vector<Pose>> rollouts{r.poses};
  EXPECT_EQ(collision_rate(rollouts, sc.vehicle, sc.collision_set()), 0.0);
  EXPECT_EQ(collision_rate(rollouts, sc.vehicle, std::vector<ConvexPolygon>{}), 0.0);
}

TEST_P(Scenarios, ErrorGrowsWithDisturbanceLevel) {
  const auto sc = testing_util::load(GetParam());
  const auto& tr = planned(GetParam()).trajectory;
  double prev = mean_over_seeds(tr, sc.vehicle, 0.0, 0.0, 20);
  for (const auto& [va, da] : kDisturbanceLevels) {
    const double m = mean_over_seeds(tr, sc.vehicle, va, da, 20);
    EXPECT_GT(m, prev) << va << "/" << da;
    prev = m;
  }
}

INSTANTIATE_TEST_SUITE_P(Bundled, Scenarios, ::testing::Values("parallel", "reverse", "diagonal"));

TEST(Rollout, SeededRunsAreReproducible) {
  const auto& tr = planned("parallel").trajectory;
  const auto a = rollout(tr, VehicleGeom{}, disturbance_preset("medium", 42));
  const auto b = rollout(tr, VehicleGeom{}, disturbance_preset("medium", 42));
  const auto c = rollout(tr, VehicleGeom{}, disturbance_preset("medium", 43));
  EXPECT_EQ(a.errors, b.errors);
  EXPECT_NE(a.errors, c.errors);
}

TEST(Rollout, StatisticsAreConsistent) {
  const auto r = rollout(planned("reverse").trajectory, VehicleGeom{}, disturbance_preset("high", 3));
  double sum = 0.0, mx = 0.0;
  for (double e : r.errors) {
    sum += e;
    mx = std::max(mx, e);
  }
  EXPECT_NEAR(r.mean_error, sum / r.errors.size(), 1e-12);
  EXPECT_EQ(r.max_error, mx);
  EXPECT_GE(r.std_error, 0.0);
}

TEST(CollisionRate, HighDisturbanceOnReverse) {
  const auto sc = testing_util::load("reverse");
  const auto& tr = planned("reverse").trajectory;
  const auto obstacles = sc.collision_set();
  double first = 0.0, last = 0.0;
  for (std::size_t lv = 0; lv < std::size(kDisturbanceLevels); ++lv) {
    std::vector<std::vector<Pose>> rolls;
    for (int s = 0; s < 50; ++s) {
      const auto [va, da] = kDisturbanceLevels[lv];
      rolls.push_back(rollout(tr, sc.vehicle, {va, da, 0.01, static_cast<std::uint64_t>(s)}).poses);
    }
    const double rate = collision_rate(rolls, sc.vehicle, obstacles);
    EXPECT_GE(rate, 0.0);
    EXPECT_LE(rate, 1.0);
    if (lv == 0) first = rate;
    last = rate;
  }
  EXPECT_GE(last, first);
}

TEST(CollisionRate, EmptyInput) {
  EXPECT_EQ(collision_rate(std::vector<std::vector<Pose>>{}, VehicleGeom{}, std::vector<ConvexPolygon>{}), 0.0);
}
