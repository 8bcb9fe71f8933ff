#include <gtest/gtest.h>

#include <random>

#include "ritp/flatness.hpp"

using namespace ritp;

namespace {

constexpr double kL = 2.8;

/// Polynomial with ascending coefficients, evaluated with its derivatives.
struct Poly {
  std::vector<double> c;
  double operator()(double t, int d = 0) const {
    double out = 0.0;
    for (std::size_t k = d; k < c.size(); ++k) {
      double f = 1.0;
      for (int j = 0; j < d; ++j) f *= static_cast<double>(k - j);
      out += f * c[k] * std::pow(t, static_cast<double>(k - d));
    }
    return out;
  }
};

struct Curve {
  Poly x, y;
  FlatPoint at(double t) const {
    return {{x(t), y(t)}, {x(t, 1), y(t, 1)}, {x(t, 2), y(t, 2)}, {x(t, 3), y(t, 3)}};
  }
};

Curve random_cubic(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  return {{{u(rng), 1.0 + u(rng) * 0.5, u(rng) * 0.5, u(rng) * 0.3}},
          {{u(rng), u(rng), u(rng) * 0.5, u(rng) * 0.3}}};
}

/// Steering angle written out independently of the library.
double delta_of(const FlatPoint& fp, int zeta) {
  const double cr = fp.d1.x() * fp.d2.y() - fp.d1.y() * fp.d2.x();
  return std::atan(kL * cr / (zeta * std::pow(fp.d1.norm(), 3)));
}

/// Five-point central derivative.
template <class F>
double ddt(F f, double t, double h = 1e-3) {
  return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h);
}

/// Signed curvature through three points (circumscribed circle).
double circle_curvature(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double cr = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
  return 2.0 * cr / ((b - a).norm() * (c - b).norm() * (c - a).norm());
}

}  // namespace

TEST(StateFromFlat, StraightLine) {
  const FlatPoint fp{{3, 0}, {1, 0}, {0, 0}, {0, 0}};
  const auto st = state_from_flat(fp, kL, 1);
  EXPECT_DOUBLE_EQ(st.pose.phi, 0.0);
  EXPECT_DOUBLE_EQ(st.v, 1.0);
  EXPECT_DOUBLE_EQ(st.delta, 0.0);
  EXPECT_DOUBLE_EQ(st.omega, 0.0);
}

TEST(StateFromFlat, CircleOfRadiusWheelbase) {
  // (R sin t, R - R cos t) at unit speed.
  const double R = kL, t = 0.4;
  const FlatPoint fp{{R * std::sin(t / R), R - R * std::cos(t / R)},
                     {std::cos(t / R), std::sin(t / R)},
                     {-std::sin(t / R) / R, std::cos(t / R) / R},
                     {-std::cos(t / R) / (R * R), -std::sin(t / R) / (R * R)}};
  const auto fwd = state_from_flat(fp, kL, 1);
  EXPECT_NEAR(fwd.delta, M_PI / 4, 1e-12);
  EXPECT_NEAR(fwd.v, 1.0, 1e-12);
  EXPECT_NEAR(fwd.pose.phi, t / R, 1e-12);
  EXPECT_NEAR(fwd.omega, 0.0, 1e-12);

  const auto rev = state_from_flat(fp, kL, -1);
  EXPECT_NEAR(rev.v, -1.0, 1e-12);
  EXPECT_NEAR(std::abs(wrap_angle(rev.pose.phi - fwd.pose.phi)), M_PI, 1e-12);
  // Kinematic model holds: the position derivative is v * heading.
  EXPECT_NEAR(rev.v * std::cos(rev.pose.phi), fp.d1.x(), 1e-12);
  EXPECT_NEAR(rev.v * std::sin(rev.pose.phi), fp.d1.y(), 1e-12);
  // And the heading rate matches v tan(delta) / L.
  EXPECT_NEAR(rev.v * std::tan(rev.delta) / kL, 1.0 / R, 1e-12);
}

TEST(StateFromFlat, StandstillIsSingular) {
  const FlatPoint fp{{0, 0}, {1e-7, 0}, {1, 0}, {0, 0}};
  try {
    state_from_flat(fp, kL, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularVelocity);
  }
  EXPECT_THROW(omega_from_flat(fp, kL), Error);
}

TEST(OmegaFromFlat, CubicAtHalf) {
  const Curve c{{{0, 1}}, {{0, 0, 0, 1}}};  // (t, t^3)
  const double fd = ddt([&](double t) { return delta_of(c.at(t), 1); }, 0.5, 1e-5);
  EXPECT_NEAR(omega_from_flat(c.at(0.5), kL), fd, 1e-6);
}

TEST(OmegaFromFlat, ConstantCurvatureHasZeroRate) {
  const double R = 5.0, w = 0.7;
  const double t = 1.1;
  const FlatPoint fp{{R * std::cos(w * t), R * std::sin(w * t)},
                     {-R * w * std::sin(w * t), R * w * std::cos(w * t)},
                     {-R * w * w * std::cos(w * t), -R * w * w * std::sin(w * t)},
                     {R * w * w * w * std::sin(w * t), -R * w * w * w * std::cos(w * t)}};
  EXPECT_NEAR(omega_from_flat(fp, kL), 0.0, 1e-12);
}

TEST(OmegaFromFlat, MatchesFiniteDifferencesOnRandomCubics) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    const Curve c = random_cubic(rng);
    const double t = ut(rng);
    if (c.at(t).d1.norm() < 0.2) continue;
    for (int zeta : {1, -1}) {
      const double fd = ddt([&](double s) { return delta_of(c.at(s), zeta); }, t, 1e-4);
      EXPECT_NEAR(omega_from_flat(c.at(t), kL, zeta), fd, 1e-6) << i;
    }
    ++checked;
  }
  EXPECT_GT(checked, 80);
}

TEST(StateFromFlat, SteeringMatchesSignedCurvature) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Curve c = random_cubic(rng);
    const double t = ut(rng);
    if (c.at(t).d1.norm() < 0.2) continue;
    const double h = 1e-4;
    const double kappa = circle_curvature(c.at(t - h).xi, c.at(t).xi, c.at(t + h).xi);
    EXPECT_NEAR(state_from_flat(c.at(t), kL, 1).delta, std::atan(kL * kappa), 1e-6) << i;
  }
}

TEST(StateFromFlat, SatisfiesKinematicModel) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ut(0.1, 0.9);
  for (int i = 0; i < 50; ++i) {
    const Curve c = random_cubic(rng);
    const double t = ut(rng);
    if (c.at(t).d1.norm() < 0.2) continue;
    for (int zeta : {1, -1}) {
      const auto st = state_from_flat(c.at(t), kL, zeta);
      const double phi0 = st.pose.phi;
      const double phi_rate = ddt([&](double s) { return phi0 + wrap_angle(state_from_flat(c.at(s), kL, zeta).pose.phi - phi0); }, t);
      const double delta_rate = ddt([&](double s) { return state_from_flat(c.at(s), kL, zeta).delta; }, t);
      const double scale = 1.0 + std::abs(st.v);
      EXPECT_NEAR(c.x(t, 1), st.v * std::cos(st.pose.phi), 1e-8 * scale);
      EXPECT_NEAR(c.y(t, 1), st.v * std::sin(st.pose.phi), 1e-8 * scale);
      EXPECT_NEAR(phi_rate, st.v * std::tan(st.delta) / kL, 1e-8 * scale);
      EXPECT_NEAR(delta_rate, st.omega, 1e-8 * (1.0 + std::abs(st.omega)));
    }
  }
}

TEST(RolloutConsistency, StraightLine) {
  std::vector<FlatPoint> pts;
  for (int k = 0; k < 100; ++k) pts.push_back({{0.1 * k, 0}, {1, 0}, {0, 0}, {0, 0}});
  EXPECT_LT(rollout_consistency(pts, 0.1, kL), 1e-9);
}

namespace {

/// Curvy quintic over 5 s with nonzero speed throughout.
const Curve kQuintic{{{0, 1.0, 0.1, -0.02, 0.003, -0.0001}}, {{0, 0.2, 0.15, -0.03, 0.001, 0.0001}}};

std::vector<FlatPoint> sample(const Curve& c, double T, double dt) {
  std::vector<FlatPoint> pts;
  const int n = static_cast<int>(std::lround(T / dt));
  for (int k = 0; k <= n; ++k) pts.push_back(c.at(k * dt));
  return pts;
}

}  // namespace

TEST(RolloutConsistency, QuinticConvergesAtFourthOrder) {
  const double coarse = rollout_consistency(sample(kQuintic, 5.0, 0.02), 0.02, kL);
  const double fine = rollout_consistency(sample(kQuintic, 5.0, 0.01), 0.01, kL);
  EXPECT_LT(fine, 1e-6);
  EXPECT_GT(coarse / fine, 8.0);  // ideal 16 for a fourth-order method
}

TEST(RolloutConsistency, Reverse) {
  EXPECT_LT(rollout_consistency(sample(kQuintic, 5.0, 0.01), 0.01, kL, -1), 1e-6);
}

TEST(RolloutConsistency, InteriorStandstillIsSingular) {
  auto pts = sample(kQuintic, 5.0, 0.01);
  pts[200].d1 = Vec2::Zero();
  try {
    rollout_consistency(pts, 0.01, kL);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularVelocity);
  }
}

TEST(RolloutConsistency, EndpointStandstillAllowed) {
  // Rest-to-rest: x = 10 tau^3 - 15 tau^4 + 6 tau^5 along a gentle arc.
  const double T = 4.0;
  const Curve c{{{0, 0, 0, 10 / std::pow(T, 3), -15 / std::pow(T, 4), 6 / std::pow(T, 5)}},
                {{0, 0, 0, 1 / std::pow(T, 3), -1.5 / std::pow(T, 4), 0.6 / std::pow(T, 5)}}};
  EXPECT_LT(rollout_consistency(sample(c, T, 0.01), 0.01, kL), 1e-4);
}
