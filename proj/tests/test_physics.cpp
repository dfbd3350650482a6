#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "shuttle3d/errors.hpp"
#include "shuttle3d/physics.hpp"

namespace {

using namespace shuttle3d;
using namespace shuttle3d::physics;

// Drag-free projectile, written out independently of the integrator.
WorldPoint ballistic(const WorldPoint& x0, const Vec3& v0, double t) {
  return {x0.x() + v0.x() * t, x0.y() + v0.y() * t,
          x0.z() + v0.z() * t - 0.5 * 9.81 * t * t};
}

InitialConditions make_ic(WorldPoint x0, Vec3 v0, double cd) {
  InitialConditions ic;
  ic.x0 = x0;
  ic.v0 = v0;
  ic.cd = cd;
  return ic;
}

TEST(Integrate, BallisticHalfSecond) {
  const auto ic = make_ic({3.05, 1, 1}, {0, 10, 5}, 0.0);
  const auto path = integrate(ic, 1.0, 1e-3);
  const auto& s = path.samples[500];
  EXPECT_NEAR(s.t, 0.5, 1e-12);
  EXPECT_NEAR(s.pos.x(), 3.05, 1e-9);
  EXPECT_NEAR(s.pos.y(), 6.0, 1e-9);
  EXPECT_NEAR(s.pos.z(), 2.27375, 1e-9);
}

TEST(Integrate, BallisticClosedFormTwoSeconds) {
  const auto ic = make_ic({1.0, 2.0, 1.5}, {2.0, 9.0, 12.0}, 0.0);
  const auto path = integrate(ic, 2.0, 1e-3);
  ASSERT_EQ(path.samples.size(), 2001u);
  double worst = 0.0;
  for (const auto& s : path.samples)
    worst = std::max(worst, (s.pos - ballistic(ic.x0, ic.v0, s.t)).norm());
  EXPECT_LT(worst, 1e-6);
}

TEST(Integrate, SamplesStartAtZeroAndIncrease) {
  const auto path = integrate(make_ic({1, 1, 1}, {1, 5, 3}, 0.3), 0.95, 0.1);
  ASSERT_FALSE(path.samples.empty());
  EXPECT_EQ(path.samples.front().t, 0.0);
  for (std::size_t i = 1; i < path.samples.size(); ++i)
    EXPECT_GT(path.samples[i].t, path.samples[i - 1].t);
  EXPECT_NEAR(path.samples.back().t, 0.95, 1e-12);
}

TEST(Integrate, RestingShuttleFallsVertically) {
  for (double cd : {0.0, 0.21, 1.0}) {
    const auto path = integrate(make_ic({1, 1, 1}, Vec3::Zero(), cd), 1.0, 0.01);
    for (const auto& s : path.samples) {
      EXPECT_EQ(s.pos.x(), 1.0);
      EXPECT_EQ(s.pos.y(), 1.0);
    }
  }
}

TEST(Integrate, TerminalSpeed) {
  // Steady state of z'' = -g + cd v^2 for a falling body.
  const double cd = 0.21;
  State s{{0, 0, 1000}, Vec3::Zero()};
  for (int i = 0; i < 20000; ++i) s = rk4_step(s, cd, 1e-3);
  EXPECT_NEAR(s.vel.norm(), std::sqrt(9.81 / cd), 1e-6);
  EXPECT_NEAR(std::sqrt(9.81 / cd), 6.835, 1e-3);
}

TEST(Integrate, RejectsBadArguments) {
  const auto ic = make_ic({1, 1, 1}, {0, 1, 1}, 0.2);
  EXPECT_THROW(integrate(ic, 0.0, 0.1), InvalidInput);
  EXPECT_THROW(integrate(ic, 1.0, 0.0), InvalidInput);
  EXPECT_THROW(integrate(ic, 1.0, 2.0), InvalidInput);
  EXPECT_THROW(integrate(make_ic({1, 1, 1}, {0, 1, 1}, -1.0), 1.0, 0.1), InvalidInput);
  EXPECT_THROW(integrate(make_ic({1, NAN, 1}, {0, 1, 1}, 0.1), 1.0, 0.1), InvalidInput);
}

TEST(Integrate, DivergenceIsReported) {
  // Huge drag with a huge step blows the explicit scheme up.
  const auto ic = make_ic({1, 1, 1}, {0, 100, 0}, 1.0);
  EXPECT_THROW(integrate(ic, 50.0, 5.0), IntegrationError);
}

TEST(Integrate, Rk4FourthOrder) {
  const auto ic = make_ic({3.0, 1.0, 1.0}, {0.5, 25.0, 10.0}, 0.21);
  const double T = 1.0;
  const WorldPoint ref = integrate(ic, T, 1e-4).samples.back().pos;
  const double e1 = (integrate(ic, T, 0.02).samples.back().pos - ref).norm();
  const double e2 = (integrate(ic, T, 0.01).samples.back().pos - ref).norm();
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 16.0 * 0.7);
  EXPECT_LT(ratio, 16.0 * 1.3);
}

TEST(Energy, ConservedWithoutDrag) {
  State s{{1, 1, 1}, {3, 12, 9}};
  const double e0 = specific_energy(s);
  for (int i = 0; i < 2000; ++i) {
    s = rk4_step(s, 0.0, 1e-3);
    EXPECT_NEAR(specific_energy(s), e0, 1e-6 * e0);
  }
}

TEST(Energy, NonIncreasingWithDrag) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-30, 30);
  for (int trial = 0; trial < 20; ++trial) {
    State s{{3, 3, 1}, {u(rng), u(rng), u(rng)}};
    double prev = specific_energy(s);
    for (int i = 0; i < 2000; ++i) {
      s = rk4_step(s, 0.5, 1e-3);
      const double e = specific_energy(s);
      EXPECT_LE(e, prev + 1e-12);
      prev = e;
    }
  }
}

TEST(Drag, HorizontalVelocityNeverReverses) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-40, 40);
  for (int trial = 0; trial < 20; ++trial) {
    State s{{3, 3, 1}, {u(rng), u(rng), u(rng)}};
    const double sx = std::copysign(1.0, s.vel.x());
    const double sy = std::copysign(1.0, s.vel.y());
    for (int i = 0; i < 3000; ++i) {
      s = rk4_step(s, 0.8, 1e-3);
      EXPECT_GE(sx * s.vel.x(), 0.0);
      EXPECT_GE(sy * s.vel.y(), 0.0);
    }
  }
}

TEST(ExtendToGround, FreeFall) {
  const auto land = extend_to_ground(make_ic({3, 3, 1}, Vec3::Zero(), 0.0), 1e-3);
  EXPECT_NEAR(land.time, std::sqrt(2.0 / 9.81), 1e-6);
  EXPECT_NEAR(land.time, 0.45152, 1e-5);
  EXPECT_NEAR(land.point.x(), 3.0, 1e-12);
  EXPECT_NEAR(land.point.y(), 3.0, 1e-12);
  EXPECT_EQ(land.point.z(), 0.0);
  EXPECT_EQ(land.out_distance, 0.0);
}

TEST(ExtendToGround, BallisticLandingPoint) {
  const auto ic = make_ic({3, 2, 2}, {0.3, 9, 4}, 0.0);
  const auto land = extend_to_ground(ic, 1.0 / 120.0);
  // 0 = 2 + 4t - 4.905 t^2
  const double t = (4.0 + std::sqrt(16.0 + 4.0 * 4.905 * 2.0)) / (2.0 * 4.905);
  EXPECT_NEAR(land.time, t, 1e-6);
  EXPECT_NEAR((land.point - ballistic(ic.x0, ic.v0, t)).head<2>().norm(), 0.0, 1e-5);
}

TEST(ExtendToGround, AgreesWithDenseIntegration) {
  const auto ic = make_ic({2, 1, 1.5}, {1, 20, 8}, 0.4);
  const auto land = extend_to_ground(ic, 1.0 / 120.0);
  const auto dense = integrate(ic, land.time, 1e-5);
  EXPECT_NEAR(dense.samples.back().pos.z(), 0.0, 1e-5);
  EXPECT_NEAR((dense.samples.back().pos - land.point).head<2>().norm(), 0.0, 1e-4);
}

TEST(ExtendToGround, NoImpactBeforeDeadline) {
  const auto ic = make_ic({3, 3, 1}, {0, 0, 40}, 0.0);
  EXPECT_THROW(extend_to_ground(ic, 1e-2, 1.0), IntegrationError);
  EXPECT_THROW(extend_to_ground(make_ic({3, 3, -1}, Vec3::Zero(), 0.0), 1e-2), InvalidInput);
}

TEST(OutOfCourt, Examples) {
  EXPECT_EQ(out_of_court_distance({3, 5, 0}), 0.0);
  EXPECT_DOUBLE_EQ(out_of_court_distance({-0.5, 5, 0}), 0.5);
  EXPECT_NEAR(out_of_court_distance({6.6, 13.9, 0}), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(out_of_court_distance({3, 14.4, 0}), 1.0, 1e-12);
  EXPECT_NEAR(out_of_court_distance({7.1, 14.4, 0}), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(out_of_court_distance({6.1, 13.4, 0}), 0.0);
}

TEST(OutOfCourt, ZeroExactlyInside) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ux(-3, 9), uy(-3, 16);
  for (int i = 0; i < 2000; ++i) {
    const WorldPoint p{ux(rng), uy(rng), 0};
    const bool inside = p.x() >= 0 && p.x() <= 6.1 && p.y() >= 0 && p.y() <= 13.4;
    EXPECT_EQ(out_of_court_distance(p) == 0.0, inside);
  }
}

TEST(OutOfCourt, OneLipschitz) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-3, 9), uy(-3, 16);
  for (int i = 0; i < 5000; ++i) {
    const WorldPoint a{ux(rng), uy(rng), 0}, b{ux(rng), uy(rng), 0};
    EXPECT_LE(std::abs(out_of_court_distance(a) - out_of_court_distance(b)),
              (a - b).head<2>().norm() + 1e-12);
  }
}

TEST(NetCrossing, LobClearsNet) {
  // From (3,2,1) with vy = 8 the net plane is reached at t = 4.7 / 8; pick vz
  // so that z = 3 there.
  const double tc = 4.7 / 8.0;
  const double vz = (2.0 + 4.905 * tc * tc) / tc;
  const auto path = integrate(make_ic({3, 2, 1}, {0, 8, vz}, 0.0), 1.5, 1e-3);
  EXPECT_NEAR(ballistic({3, 2, 1}, {0, 8, vz}, tc).z(), 3.0, 1e-12);
  EXPECT_TRUE(crosses_net_validly(path, 1.55));
  EXPECT_TRUE(crosses_net_validly(path, 2.99));
  EXPECT_FALSE(crosses_net_validly(path, 3.01));
}

TEST(NetCrossing, NeverCrosses) {
  const auto path = integrate(make_ic({3, 2, 1}, {0, 1, 3}, 0.0), 0.5, 1e-3);
  EXPECT_FALSE(crosses_net_validly(path, 1.55));
}

TEST(NetCrossing, LowCrossingFails) {
  FlightPath path;
  path.dt = 0.1;
  path.samples = {{0.0, {3, 6.0, 1.0}}, {0.1, {3, 7.4, 1.0}}};
  EXPECT_FALSE(crosses_net_validly(path, 1.55));
  path.samples[1].pos.z() = 2.0;
  // Interpolated height at y = 6.7 is 1.5.
  EXPECT_FALSE(crosses_net_validly(path, 1.55));
  EXPECT_TRUE(crosses_net_validly(path, 1.5));
}

TEST(Landing, IntegratorMatchesPositions) {
  const auto ic = make_ic({1, 1, 2}, {2, 15, 6}, 0.3);
  FlightIntegrator fi(ic, 0.01);
  const auto path = integrate(ic, 1.0, 0.01);
  for (const auto& s : path.samples) EXPECT_EQ(fi.position_at(s.t), s.pos);
}

}  // namespace
