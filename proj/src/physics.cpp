#include "shuttle3d/physics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shuttle3d/errors.hpp"

namespace shuttle3d::physics {

void InitialConditions::validate() const {
  if (!x0.allFinite() || !v0.allFinite() || !std::isfinite(cd)) {
    throw InvalidInput("initial conditions must be finite");
  }
  if (cd < 0.0) throw InvalidInput("drag coefficient must be non-negative");
}

namespace {

inline Vec3 acceleration(const Vec3& v, double cd) {
  Vec3 a = -cd * v.norm() * v;
  a.z() -= kGravity;
  return a;
}

bool finite(const State& s) { return s.pos.allFinite() && s.vel.allFinite(); }

}  // namespace

State rk4_step(const State& s, double cd, double h) {
  const Vec3 k1x = s.vel;
  const Vec3 k1v = acceleration(s.vel, cd);
  const Vec3 v2 = s.vel + 0.5 * h * k1v;
  const Vec3 k2v = acceleration(v2, cd);
  const Vec3 v3 = s.vel + 0.5 * h * k2v;
  const Vec3 k3v = acceleration(v3, cd);
  const Vec3 v4 = s.vel + h * k3v;
  const Vec3 k4v = acceleration(v4, cd);

  State out;
  out.pos = s.pos + (h / 6.0) * (k1x + 2.0 * v2 + 2.0 * v3 + v4);
  out.vel = s.vel + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  return out;
}

FlightIntegrator::FlightIntegrator(const InitialConditions& ic, double dt)
    : cd_(ic.cd), dt_(dt), state_{ic.x0, ic.v0} {
  ic.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("time step must be positive");
}

void FlightIntegrator::advance() {
  const State next = rk4_step(state_, cd_, dt_);
  if (!finite(next)) {
    throw IntegrationError("integration diverged at t = " +
                           std::to_string(static_cast<double>(step_) * dt_));
  }
  if (!landing_ && state_.pos.z() >= 0.0 && next.pos.z() < 0.0) {
    // Bisection on the sub-step length within [t_k, t_k + dt].
    double lo = 0.0;
    double hi = dt_;
    State at = next;
    double h = hi;
    for (int it = 0; it < 200; ++it) {
      h = 0.5 * (lo + hi);
      at = rk4_step(state_, cd_, h);
      if (std::abs(at.pos.z()) < kGroundTolerance) break;
      if (at.pos.z() > 0.0) {
        lo = h;
      } else {
        hi = h;
      }
    }
    LandingInfo info;
    info.point = at.pos;
    info.point.z() = 0.0;
    info.time = static_cast<double>(step_) * dt_ + h;
    info.out_distance = out_of_court_distance(info.point);
    landing_ = info;
  }
  state_ = next;
  ++step_;
}

WorldPoint FlightIntegrator::position_at(double t) {
  if (!(t >= 0.0)) throw InvalidInput("sample time must be non-negative");
  // Tolerate representation error when t is meant to be a grid multiple.
  const auto target = static_cast<long>(std::floor(t / dt_ + 1e-9));
  if (target < step_) {
    throw InvalidInput("FlightIntegrator::position_at requires non-decreasing times");
  }
  while (step_ < target) advance();
  const double rem = t - static_cast<double>(step_) * dt_;
  if (rem <= 1e-12 * std::max(1.0, t)) return state_.pos;
  const State partial = rk4_step(state_, cd_, rem);
  if (!finite(partial)) throw IntegrationError("integration diverged");
  return partial.pos;
}

LandingInfo FlightIntegrator::land(double t_max) {
  while (!landing_) {
    if (static_cast<double>(step_) * dt_ > t_max) {
      throw IntegrationError("no ground impact within " + std::to_string(t_max) + " s");
    }
    advance();
  }
  return *landing_;
}

FlightPath integrate(const InitialConditions& ic, double duration, double dt) {
  if (!(duration > 0.0) || !(dt > 0.0) || dt > duration || !std::isfinite(duration)) {
    throw InvalidInput("integrate requires duration > 0 and 0 < dt <= duration");
  }
  ic.validate();

  FlightPath path;
  path.dt = dt;
  const auto full_steps = static_cast<long>(std::floor(duration / dt + 1e-9));
  path.samples.reserve(static_cast<std::size_t>(full_steps) + 2);

  State s{ic.x0, ic.v0};
  path.samples.push_back({0.0, s.pos});
  for (long k = 1; k <= full_steps; ++k) {
    s = rk4_step(s, ic.cd, dt);
    if (!finite(s)) {
      throw IntegrationError("integration diverged at t = " +
                             std::to_string(static_cast<double>(k) * dt));
    }
    path.samples.push_back({static_cast<double>(k) * dt, s.pos});
  }
  const double rem = duration - static_cast<double>(full_steps) * dt;
  if (rem > 1e-12 * duration) {
    s = rk4_step(s, ic.cd, rem);
    if (!finite(s)) throw IntegrationError("integration diverged");
    path.samples.push_back({duration, s.pos});
  }
  return path;
}

LandingInfo extend_to_ground(const InitialConditions& ic, double dt, double t_max) {
  if (ic.x0.z() < 0.0) throw InvalidInput("extend_to_ground requires x0.z >= 0");
  FlightIntegrator flight(ic, dt);
  return flight.land(t_max);
}

double out_of_court_distance(const WorldPoint& p) {
  const double dx = std::max({0.0, -p.x(), p.x() - geometry::kCourtWidth});
  const double dy = std::max({0.0, -p.y(), p.y() - geometry::kCourtLength});
  return std::hypot(dx, dy);
}

bool crosses_net_validly(const FlightPath& path, double net_height) {
  if (path.samples.empty()) throw InvalidInput("empty flight path");
  for (std::size_t i = 1; i < path.samples.size(); ++i) {
    const WorldPoint& a = path.samples[i - 1].pos;
    const WorldPoint& b = path.samples[i].pos;
    const double da = a.y() - geometry::kNetY;
    const double db = b.y() - geometry::kNetY;
    if (da == db) continue;
    if ((da <= 0.0 && db >= 0.0) || (da >= 0.0 && db <= 0.0)) {
      const double s = da / (da - db);
      const double z = a.z() + s * (b.z() - a.z());
      return z >= net_height;
    }
  }
  return false;
}

}  // namespace shuttle3d::physics
