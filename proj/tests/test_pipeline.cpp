#include <gtest/gtest.h>

#include <map>

#include "common.hpp"
#include "ritp/pipeline.hpp"

using namespace ritp;

namespace {

Trajectory line_piece(double x0, double x1, double duration, int n) {
  Trajectory tr;
  for (int k = 0; k <= n; ++k) {
    const double u = static_cast<double>(k) / n;
    tr.samples.push_back({duration * u, x0 + (x1 - x0) * u, 0.0, 0.0, 0.0, 0.0, 0.0});
  }
  return tr;
}

const PlanResult& bundled(const std::string& name) {
  static std::map<std::string, PlanResult> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, plan(testing_util::load(name))).first;
  return it->second;
}

std::vector<FlatPoint> flat_samples(const SegmentPlan& seg, double& dt) {
  const int n = static_cast<int>(std::lround(seg.speed.t_max / 0.02));
  dt = seg.speed.t_max / n;
  std::vector<FlatPoint> pts;
  for (int k = 0; k <= n; ++k) pts.push_back(compose(seg.path.path, seg.speed, k * dt));
  return pts;
}

}  // namespace

TEST(Compose, ChainRuleMatchesFiniteDifferences) {
  PolyPath pp;
  pp.alpha = 4;
  pp.xi_x = (Eigen::VectorXd(5) << 0.001, -0.01, 0.02, 1.0, 0.5).finished();
  pp.xi_y = (Eigen::VectorXd(5) << -0.002, 0.015, 0.1, 0.05, -1.0).finished();
  pp.s_end = 6.0;
  const auto sp = plan_velocity(6.0, 2.0, 1.0, 1);
  auto pos = [&](double t) { return pp.eval(std::clamp(sp.s(t), 0.0, pp.s_end)); };
  const double h = 1e-3;
  for (double t : {0.7, 1.9, 3.3}) {
    const FlatPoint fp = compose(pp, sp, t);
    const Vec2 d1 = (-pos(t + 2 * h) + 8 * pos(t + h) - 8 * pos(t - h) + pos(t - 2 * h)) / (12 * h);
    const Vec2 d2 = (-pos(t + 2 * h) + 16 * pos(t + h) - 30 * pos(t) + 16 * pos(t - h) - pos(t - 2 * h)) / (12 * h * h);
    const Vec2 d3 = (pos(t + 2 * h) - 2 * pos(t + h) + 2 * pos(t - h) - pos(t - 2 * h)) / (2 * h * h * h);
    EXPECT_LT((fp.xi - pos(t)).norm(), 1e-12);
    EXPECT_LT((fp.d1 - d1).norm(), 1e-8);
    EXPECT_LT((fp.d2 - d2).norm(), 1e-6);
    EXPECT_LT((fp.d3 - d3).norm(), 1e-4);
  }
}

TEST(StandstillState, IsTheLimitOfMovingStates) {
  PolyPath pp;
  pp.alpha = 3;
  pp.xi_x = (Eigen::VectorXd(4) << 0.01, -0.05, 1.0, 2.0).finished();
  pp.xi_y = (Eigen::VectorXd(4) << -0.02, 0.1, 0.3, 1.0).finished();
  pp.s_end = 4.0;
  for (int zeta : {1, -1}) {
    const auto st = standstill_state(pp, 0.0, zeta, 2.8);
    const FlatPoint near{pp.eval(1e-7), pp.eval(1e-7, 1), pp.eval(1e-7, 2), pp.eval(1e-7, 3)};
    const auto mv = state_from_flat(near, 2.8, zeta);
    EXPECT_NEAR(st.pose.phi, mv.pose.phi, 1e-6);
    EXPECT_NEAR(st.delta, mv.delta, 1e-6);
    EXPECT_EQ(st.v, 0.0);
    EXPECT_EQ(st.omega, 0.0);
  }
}

TEST(Join, SinglePieceIsIdentity) {
  const auto a = line_piece(0, 2, 4.0, 10);
  const auto j = join({a});
  ASSERT_EQ(j.samples.size(), a.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    EXPECT_EQ(j.samples[k].t, a.samples[k].t);
    EXPECT_EQ(j.samples[k].x, a.samples[k].x);
  }
  EXPECT_TRUE(j.segment_boundaries.empty());
}

TEST(Join, TwoPieces) {
  auto b = line_piece(2, 0, 6.0, 15);
  b.samples.front().phi = 0.3;  // departing values win at the boundary
  const auto j = join({line_piece(0, 2, 4.0, 10), b});
  EXPECT_DOUBLE_EQ(j.duration(), 10.0);
  ASSERT_EQ(j.segment_boundaries.size(), 1u);
  EXPECT_EQ(j.segment_boundaries[0], 10u);
  EXPECT_EQ(j.samples.size(), 26u);
  EXPECT_EQ(j.samples[10].phi, 0.3);
  for (std::size_t k = 1; k < j.samples.size(); ++k) EXPECT_GT(j.samples[k].t, j.samples[k - 1].t);
}

TEST(Join, GapIsRejected) {
  try {
    join({line_piece(0, 2, 4.0, 10), line_piece(2.01, 0, 6.0, 15)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BoundaryMismatch);
  }
}

TEST(Plan, StraightAheadInOpenLot) {
  const auto sc = testing_util::open_lot({5, 0, 0});
  const auto r = plan(sc);
  ASSERT_EQ(r.segments.size(), 1u);
  const auto& s = r.trajectory.samples;
  ASSERT_GT(s.size(), 10u);
  std::size_t peak = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_LT(std::abs(s[k].delta), 1e-6);
    EXPECT_LT(std::abs(s[k].y), 1e-6);
    if (s[k].v > s[peak].v) peak = k;
  }
  for (std::size_t k = 1; k <= peak; ++k) EXPECT_GE(s[k].v, s[k - 1].v - 1e-12);
  for (std::size_t k = peak + 1; k < s.size(); ++k) EXPECT_LE(s[k].v, s[k - 1].v + 1e-12);
  EXPECT_EQ(s.front().v, 0.0);
  EXPECT_EQ(s.back().v, 0.0);
  EXPECT_NEAR(s.back().x, 5.0, 1e-6);
}

TEST(Plan, StartAtGoalGivesOneSample) {
  const auto r = plan(testing_util::open_lot({0, 0, 0}));
  EXPECT_EQ(r.trajectory.samples.size(), 1u);
  EXPECT_TRUE(r.segments.empty());
}

TEST(Plan, GoalInObstacleFailsBeforeSegmentation) {
  auto sc = testing_util::open_lot({10, 0, 0});
  sc.obstacles.push_back(make_box(9, 11, -1, 1));
  try {
    plan(sc);
    FAIL();
  } catch (const PlanningFailed& e) {
    EXPECT_EQ(e.cause(), ErrorCode::NoPathFound);
    EXPECT_EQ(e.segment(), -1);
  }
}

TEST(Plan, SegmentFailureIsReportedWithIndex) {
  PlannerConfig cfg;
  cfg.velocity.t_max = 0.5;  // far too short, and retries are off for an explicit horizon
  for (int workers : {1, 4}) {
    cfg.workers = workers;
    try {
      plan(testing_util::load("reverse"), cfg);
      FAIL();
    } catch (const PlanningFailed& e) {
      EXPECT_EQ(e.cause(), ErrorCode::Infeasible);
      EXPECT_EQ(e.segment(), 0);
    }
  }
}

TEST(Plan, DeterministicAcrossWorkerCounts) {
  const auto sc = testing_util::load("parallel");
  PlannerConfig one, four;
  one.workers = 1;
  four.workers = 4;
  const auto a = plan(sc, one).trajectory, b = plan(sc, four).trajectory, c = plan(sc, four).trajectory;
  ASSERT_EQ(a.samples.size(), b.samples.size());
  ASSERT_EQ(b.samples.size(), c.samples.size());
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    for (const auto* o : {&b, &c}) {
      const auto &p = a.samples[k], &q = o->samples[k];
      ASSERT_TRUE(p.t == q.t && p.x == q.x && p.y == q.y && p.phi == q.phi && p.delta == q.delta && p.v == q.v &&
                  p.omega == q.omega)
          << k;
    }
  }
}

class Bundled : public ::testing::TestWithParam<const char*> {};

TEST_P(Bundled, TrajectoryIsFeasible) {
  const auto sc = testing_util::load(GetParam());
  const auto& r = bundled(GetParam());
  const auto& s = r.trajectory.samples;
  ASSERT_GE(r.segments.size(), 1u);
  const auto obstacles = sc.collision_set();
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_TRUE(collision_free_pose(s[k].pose(), sc.vehicle, obstacles)) << k;
    EXPECT_LE(std::abs(s[k].v), sc.v_max + 1e-9) << k;
    if (k > 0) {
      EXPECT_GT(s[k].t, s[k - 1].t);
      EXPECT_LE(std::abs(s[k].v - s[k - 1].v) / (s[k].t - s[k - 1].t), sc.a_max + 1e-9) << k;
    }
  }
  EXPECT_LT(std::hypot(s.back().x - sc.goal.x, s.back().y - sc.goal.y), 1e-3);
  EXPECT_LT(std::abs(wrap_angle(s.back().phi - sc.goal.phi)), 1e-2);
  EXPECT_EQ(s.front().v, 0.0);
  EXPECT_EQ(s.back().v, 0.0);
  EXPECT_EQ(r.trajectory.segment_boundaries.size(), r.segments.size() - 1);
  for (std::size_t b : r.trajectory.segment_boundaries) {
    EXPECT_EQ(s[b].v, 0.0);
    // Heading is continuous through the gear shift.
    EXPECT_LT(std::abs(wrap_angle(s[b + 1].phi - s[b - 1].phi)), 0.05);
  }
  for (const auto& seg : r.segments) EXPECT_LE(seg.path.iterations, 10);
}

TEST_P(Bundled, ControlsReproducePositions) {
  const auto sc = testing_util::load(GetParam());
  for (const auto& seg : bundled(GetParam()).segments) {
    double dt = 0.0;
    const auto pts = flat_samples(seg, dt);
    EXPECT_LT(rollout_consistency(pts, dt, sc.vehicle.wheelbase, seg.reference.zeta), 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(Scenarios, Bundled, ::testing::Values("parallel", "reverse", "diagonal"));

TEST(Plan, ParallelHasGearShifts) { EXPECT_GE(bundled("parallel").segments.size(), 2u); }
