#pragma once

// Shuttlecock flight under gravity and quadratic drag:
//
//   x'' = g - cd * |x'| * x',   g = (0, 0, -9.81)
//
// integrated with classical fixed-step RK4.

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "shuttle3d/geometry.hpp"

namespace shuttle3d::physics {

using geometry::WorldPoint;
using Vec3 = Eigen::Vector3d;

inline constexpr double kGravity = 9.81;
inline constexpr double kDefaultDragCoefficient = 0.21;
inline constexpr double kDefaultMaxFlightTime = 20.0;
inline constexpr double kGroundTolerance = 1e-6;

struct InitialConditions {
  WorldPoint x0 = WorldPoint::Zero();
  Vec3 v0 = Vec3::Zero();
  double cd = kDefaultDragCoefficient;

  /// Throws InvalidInput for non-finite values or cd < 0.
  void validate() const;
};

struct State {
  WorldPoint pos;
  Vec3 vel;
};

struct FlightSample {
  double t = 0.0;
  WorldPoint pos;
};

struct FlightPath {
  std::vector<FlightSample> samples;
  double dt = 0.0;
};

struct LandingInfo {
  WorldPoint point;
  double time = 0.0;
  double out_distance = 0.0;
};

/// One classical RK4 step.
State rk4_step(const State& s, double cd, double h);

/// Fixed-step stepper shared by every consumer of the flight model, so that
/// sampled positions and the ground impact come from the same step sequence.
///
/// Grid states are advanced at multiples of dt from t = 0; positions between
/// grid points come from one partial RK4 step off the latest grid state.
class FlightIntegrator {
 public:
  FlightIntegrator(const InitialConditions& ic, double dt);

  /// Position at time t. Calls must use non-decreasing t. Throws
  /// IntegrationError when the state stops being finite.
  WorldPoint position_at(double t);

  /// Continues to the first downward crossing of z = 0 and refines the impact
  /// time by bisection. Throws IntegrationError when no impact happens before
  /// t_max.
  LandingInfo land(double t_max = kDefaultMaxFlightTime);

  double dt() const { return dt_; }

 private:
  void advance();

  double cd_;
  double dt_;
  long step_ = 0;
  State state_;
  std::optional<LandingInfo> landing_;
};

/// Samples at t = 0, dt, 2dt, ..., duration (the last step is shortened when
/// duration is not a multiple of dt).
FlightPath integrate(const InitialConditions& ic, double duration, double dt);

/// Ground impact of the flight started at ic. Requires x0.z >= 0.
LandingInfo extend_to_ground(const InitialConditions& ic, double dt,
                             double t_max = kDefaultMaxFlightTime);

/// Euclidean distance from (x, y) to the court rectangle; 0 inside.
double out_of_court_distance(const WorldPoint& p);

/// True iff the path crosses y = 6.7 and the interpolated height at the first
/// crossing is at least net_height.
bool crosses_net_validly(const FlightPath& path, double net_height);

/// Mechanical energy per unit mass.
inline double specific_energy(const State& s) {
  return 0.5 * s.vel.squaredNorm() + kGravity * s.pos.z();
}

}  // namespace shuttle3d::physics
