#include "shuttle3d/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "shuttle3d/errors.hpp"
#include "shuttle3d/random.hpp"
#include "shuttle3d/hit_segmentation.hpp"
#include "shuttle3d/nelder_mead.hpp"

namespace shuttle3d::recon {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  Vec3 lo;
  Vec3 hi;
};

Box launch_box(Player hitter) {
  const double y_lo = hitter == Player::far ? geometry::kNetY : 0.0;
  const double y_hi = hitter == Player::far ? geometry::kCourtLength : geometry::kNetY;
  return {Vec3(0.0, y_lo, 0.0), Vec3(geometry::kCourtWidth, y_hi, kMaxLaunchHeight)};
}

Vec3 clamp(const Vec3& p, const Box& b) { return p.cwiseMax(b.lo).cwiseMin(b.hi); }

Vec3 toward_receiver(const ShotObservation& shot) {
  const Vec3 d = shot.x_receive - shot.x_hit;
  const double n = d.norm();
  return n > 0.0 ? Vec3(d / n) : Vec3::Zero();
}

// Enforces |v| <= 120 and v . d >= 0 by projection.
Vec3 project_velocity(Vec3 v, const Vec3& dir) {
  const double along = v.dot(dir);
  if (along < 0.0) v -= along * dir;
  const double speed = v.norm();
  if (speed > kMaxLaunchSpeed) v *= kMaxLaunchSpeed / speed;
  return v;
}

// The observation quantities the loss needs, precomputed once per shot.
struct ShotData {
  std::vector<double> times;
  std::vector<Eigen::Vector2d> observed;
  double t_receive = 0.0;
};

ShotData prepare(const ShotObservation& shot) {
  ShotData d;
  for (const auto& e : shot.track.entries) {
    if (!e.visible) continue;
    if (e.frame < shot.hit_frame || e.frame >= shot.receive_frame) continue;
    d.times.push_back(shot.time_of(e.frame));
    d.observed.emplace_back(e.u, e.v);
  }
  d.t_receive = shot.t_receive();
  return d;
}

struct Evaluation {
  LossComponents components;
  Vec3 receive_position = Vec3::Zero();
};

// Single pass over the flight: frame samples, x(t_R), then the ground impact.
// Returns false when the flight is not finite or a sample falls behind the
// camera.
bool evaluate(const geometry::Matrix34& P, double sigma, const InitialConditions& ic,
              const ShotObservation& shot, const ShotData& data, double dt, double t_max,
              bool need_landing, Evaluation& out) {
  physics::FlightIntegrator flight(ic, dt);
  double lr = 0.0;
  for (std::size_t i = 0; i < data.times.size(); ++i) {
    const Vec3 x = flight.position_at(data.times[i]);
    const Eigen::Vector3d h = P.leftCols<3>() * x + P.col(3);
    if (!(h.z() > 0.0)) return false;
    const Eigen::Vector2d r = h.head<2>() / h.z() - data.observed[i];
    lr += r.squaredNorm();
  }
  out.receive_position = flight.position_at(data.t_receive);

  LossComponents& c = out.components;
  c.sigma = sigma;
  c.reprojection = lr;
  c.start_anchor = (ic.x0 - shot.x_hit).squaredNorm();
  c.end_anchor = (out.receive_position - shot.x_receive).squaredNorm();
  if (need_landing) {
    const physics::LandingInfo landing = flight.land(t_max);
    c.out_distance = landing.out_distance;
    c.out_of_court = landing.out_distance * landing.out_distance;
  }
  return std::isfinite(lr);
}

double combine(const LossComponents& c, LossMode mode) {
  if (mode == LossMode::reprojection_only) return c.sigma * c.reprojection;
  return c.sigma * c.reprojection + c.start_anchor + c.end_anchor + c.out_of_court;
}

// Optimisation variables, scaled to comparable magnitudes.
constexpr double kVelocityScale = 10.0;
constexpr double kDragScale = 0.1;

Eigen::VectorXd encode(const InitialConditions& ic) {
  Eigen::VectorXd u(7);
  u << ic.x0.x(), ic.x0.y(), ic.x0.z(), ic.v0.x() / kVelocityScale, ic.v0.y() / kVelocityScale,
      ic.v0.z() / kVelocityScale, ic.cd / kDragScale;
  return u;
}

struct Decoded {
  InitialConditions ic;
  double box_excess = 0.0;
};

Decoded decode(const Eigen::VectorXd& u, const Box& box) {
  Decoded d;
  const Vec3 x(u(0), u(1), u(2));
  d.ic.x0 = clamp(x, box);
  d.ic.v0 = Vec3(u(3), u(4), u(5)) * kVelocityScale;
  const double cd_raw = u(6) * kDragScale;
  d.ic.cd = std::clamp(cd_raw, kMinDragCoefficient, kMaxDragCoefficient);
  d.box_excess = (x - d.ic.x0).squaredNorm() +
                 std::pow((cd_raw - d.ic.cd) / kDragScale, 2);
  return d;
}

InitialConditions make_feasible(InitialConditions ic, const ShotObservation& shot) {
  ic.x0 = clamp(ic.x0, launch_box(shot.hitter));
  ic.cd = std::clamp(ic.cd, kMinDragCoefficient, kMaxDragCoefficient);
  ic.v0 = project_velocity(ic.v0, toward_receiver(shot));
  return ic;
}

InitialConditions perturb(const InitialConditions& guess, const ShotObservation& shot,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  InitialConditions ic = guess;
  for (int k = 0; k < 3; ++k) ic.x0(k) += 0.3 * unit(rng);

  const double speed = ic.v0.norm();
  if (speed > 0.0) {
    const Vec3 dir = ic.v0 / speed;
    // Random axis perpendicular to the launch direction.
    Vec3 axis = dir.cross(Vec3(unit(rng), unit(rng), unit(rng)));
    if (axis.norm() < 1e-9) axis = dir.unitOrthogonal();
    axis.normalize();
    const double angle = unit(rng) * 15.0 * std::numbers::pi / 180.0;
    const Vec3 rotated = Eigen::AngleAxisd(angle, axis) * dir;
    std::uniform_real_distribution<double> speed_factor(0.7, 1.4);
    ic.v0 = rotated * speed * speed_factor(rng);
  }
  std::uniform_real_distribution<double> log_cd(std::log(0.5), std::log(2.0));
  ic.cd *= std::exp(log_cd(rng));
  return make_feasible(ic, shot);
}

}  // namespace

// ---------------------------------------------------------------------------

void ShuttleTrack::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidInput("track fps must be positive");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i > 0 && entries[i].frame <= entries[i - 1].frame) {
      throw InvalidInput("track frames must be strictly increasing (frame " +
                         std::to_string(entries[i].frame) + ")");
    }
    if (entries[i].visible && (!std::isfinite(entries[i].u) || !std::isfinite(entries[i].v))) {
      throw InvalidInput("visible track entry with non-finite coordinates");
    }
  }
}

std::size_t ShuttleTrack::visible_count() const {
  return static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [](const TrackEntry& e) { return e.visible; }));
}

ShuttleTrack ShuttleTrack::slice(int first_frame, int end_frame) const {
  ShuttleTrack out;
  out.fps = fps;
  for (const auto& e : entries) {
    if (e.frame >= first_frame && e.frame < end_frame) out.entries.push_back(e);
  }
  return out;
}

double ShotObservation::t_receive() const {
  return static_cast<double>(receive_frame - hit_frame) / track.fps;
}

double ShotObservation::time_of(int frame) const {
  return static_cast<double>(frame - hit_frame) / track.fps;
}

void ShotObservation::validate() const {
  track.validate();
  if (receive_frame <= hit_frame) throw InvalidInput("receive frame must follow the hit frame");
  if (hitter == Player::unknown) throw InvalidInput("shot hitter must be near or far");
  if (!x_hit.allFinite() || !x_receive.allFinite()) throw InvalidInput("non-finite anchors");
}

const char* to_string(LossMode m) {
  return m == LossMode::full ? "full" : "reprojection-only";
}

LossMode loss_mode_from_string(std::string_view s) {
  if (s == "full") return LossMode::full;
  if (s == "reprojection-only" || s == "reprojection_only") return LossMode::reprojection_only;
  throw InvalidInput("unknown loss mode '" + std::string(s) + "'");
}

void ReconstructionConfig::validate() const {
  if (multistart_count < 1 || max_iterations < 1 || !(tolerance > 0.0) ||
      penalty.rounds < 1 || !(penalty.initial_weight > 0.0) || !(penalty.growth >= 1.0) ||
      dt < 0.0 || !(t_max > 0.0)) {
    throw InvalidInput("invalid reconstruction config");
  }
  if (sigma_override && !(*sigma_override >= 0.0)) {
    throw InvalidInput("sigma override must be non-negative");
  }
}

double sigma_from_camera(const CameraModel& camera) {
  Eigen::JacobiSVD<geometry::Matrix34> svd(camera.matrix());
  const double s = svd.singularValues()(0);
  if (!(s > 0.0)) throw InvalidInput("zero camera matrix");
  return 1.0 / (s * s);
}

double loss_sigma(const CameraModel& camera, const ReconstructionConfig& config) {
  if (config.sigma_override) return *config.sigma_override;
  return sigma_from_camera(camera.normalized());
}

double reprojection_loss(const CameraModel& camera, const InitialConditions& ic,
                         const ShotObservation& shot, double dt) {
  const ShotData data = prepare(shot);
  if (data.times.empty()) throw InvalidInput("shot has no visible frames");
  physics::FlightIntegrator flight(ic, dt);
  double lr = 0.0;
  for (std::size_t i = 0; i < data.times.size(); ++i) {
    const Eigen::Vector2d r = camera.project(flight.position_at(data.times[i])) - data.observed[i];
    lr += r.squaredNorm();
  }
  return lr;
}

LossComponents total_loss(const CameraModel& camera, const InitialConditions& ic,
                          const ShotObservation& shot, const ReconstructionConfig& config) {
  shot.validate();
  const ShotData data = prepare(shot);
  if (data.times.empty()) throw InvalidInput("shot has no visible frames");
  if (ic.x0.z() < 0.0) throw InvalidInput("launch height must be non-negative");
  const CameraModel normalized = camera.normalized();
  Evaluation ev;
  if (!evaluate(normalized.matrix(), loss_sigma(camera, config), ic, shot, data,
                config.step_for(shot.fps()), config.t_max, true, ev)) {
    throw NumericalError("trajectory leaves the camera's field of view (behind the camera)");
  }
  ev.components.total = combine(ev.components, config.loss_mode);
  return ev.components;
}

InitialConditions initial_guess(const ShotObservation& shot) {
  const double t_r = shot.t_receive();
  if (!(t_r > 0.0)) throw InvalidInput("receive time must be positive");
  InitialConditions ic;
  ic.x0 = shot.x_hit;
  ic.v0 = (shot.x_receive - shot.x_hit) / t_r;
  ic.v0.z() += 0.5 * physics::kGravity * t_r;
  ic.cd = physics::kDefaultDragCoefficient;
  return make_feasible(ic, shot);
}

bool feasible(const InitialConditions& ic, const ShotObservation& shot, double tol) {
  const Box box = launch_box(shot.hitter);
  for (int k = 0; k < 3; ++k) {
    if (ic.x0(k) < box.lo(k) - tol || ic.x0(k) > box.hi(k) + tol) return false;
  }
  if (ic.v0.norm() > kMaxLaunchSpeed * (1.0 + tol)) return false;
  if (ic.v0.dot(shot.x_receive - shot.x_hit) < -tol) return false;
  return ic.cd >= kMinDragCoefficient - tol && ic.cd <= kMaxDragCoefficient + tol;
}

FlightPath frame_path(const InitialConditions& ic, const ShotObservation& shot, double dt) {
  FlightPath path;
  path.dt = dt;
  physics::FlightIntegrator flight(ic, dt);
  for (int f = shot.hit_frame; f < shot.receive_frame; ++f) {
    const double t = shot.time_of(f);
    path.samples.push_back({t, flight.position_at(t)});
  }
  return path;
}

ReconstructionResult reconstruct_shot(const CameraModel& camera, const ShotObservation& shot,
                                      const ReconstructionConfig& config) {
  config.validate();
  shot.validate();
  const ShotData data = prepare(shot);
  if (data.times.size() < 3) throw InvalidInput("reconstruction needs at least 3 visible frames");

  const CameraModel normalized = camera.normalized();
  const geometry::Matrix34& P = normalized.matrix();
  const double sigma = loss_sigma(camera, config);
  const double dt = config.step_for(shot.fps());
  const bool full = config.loss_mode == LossMode::full;
  const Box box = launch_box(shot.hitter);
  const Vec3 dir = toward_receiver(shot);

  auto plain_loss = [&](const InitialConditions& ic) {
    Evaluation ev;
    try {
      if (!evaluate(P, sigma, ic, shot, data, dt, config.t_max, full, ev)) return kInf;
    } catch (const NumericalError&) {
      return kInf;
    }
    return combine(ev.components, config.loss_mode);
  };

  const InitialConditions guess = initial_guess(shot);
  InitialConditions best_ic = guess;
  double best_loss = plain_loss(guess);
  bool any_converged = false;
  int evaluations = 1;
  int iterations = 0;

  std::mt19937_64 rng(splitmix64(config.seed));

  for (int start = 0; start < config.multistart_count; ++start) {
    const InitialConditions init = start == 0 ? guess : perturb(guess, shot, rng);
    Eigen::VectorXd u = encode(init);
    Eigen::VectorXd step(7);
    const double speed = std::max(1.0, init.v0.norm());
    step << 0.1, 0.1, 0.1, Eigen::Vector3d::Constant(0.05 * speed / kVelocityScale),
        0.05 / kDragScale;

    double weight = config.penalty.initial_weight;
    bool converged = false;
    for (int round = 0; round < config.penalty.rounds; ++round) {
      auto objective = [&](const Eigen::VectorXd& x) {
        const Decoded d = decode(x, box);
        const double base = plain_loss(d.ic);
        if (!std::isfinite(base)) return kInf;
        const double over_speed = std::max(0.0, d.ic.v0.norm() - kMaxLaunchSpeed);
        const double backward = std::max(0.0, -d.ic.v0.dot(dir));
        return base + weight * (over_speed * over_speed + backward * backward) +
               1e4 * d.box_excess;
      };
      optim::NelderMeadOptions opt;
      opt.max_iterations = config.max_iterations;
      opt.f_tolerance = config.tolerance;
      opt.x_tolerance = config.tolerance;
      const optim::NelderMeadResult r = optim::nelder_mead(objective, u, step, opt);
      evaluations += r.evaluations;
      iterations += r.iterations;
      u = r.x;
      converged = r.converged;
      const Decoded d = decode(u, box);
      if (feasible(d.ic, shot)) break;
      weight *= config.penalty.growth;
      step *= 0.1;
    }

    const InitialConditions candidate = make_feasible(decode(u, box).ic, shot);
    const double loss = plain_loss(candidate);
    ++evaluations;
    if (loss < best_loss) {
      best_loss = loss;
      best_ic = candidate;
    }
    any_converged = any_converged || converged;
  }

  ReconstructionResult result;
  result.ic = best_ic;
  result.iterations = iterations;
  result.evaluations = evaluations;
  if (!std::isfinite(best_loss)) {
    result.converged = false;
    result.message = "no start produced a finite loss";
    result.loss_total = kInf;
    result.loss_reprojection = kInf;
    return result;
  }
  result.components = total_loss(camera, best_ic, shot, config);
  result.loss_total = result.components.total;
  result.loss_reprojection = result.components.reprojection;
  result.converged = any_converged;
  result.path = frame_path(best_ic, shot, dt);

  physics::FlightIntegrator flight(best_ic, dt);
  const double z_end = flight.position_at(shot.t_receive()).z();
  result.final_height_ok = z_end >= 0.0 && z_end <= kMaxLaunchHeight;
  return result;
}

// ---------------------------------------------------------------------------

std::vector<ShotAssembly> shots_from_hits(const std::vector<hits::Hit>& hit_list,
                                          const ShuttleTrack& track,
                                          const geometry::PlayerAnchors& anchors,
                                          const ReconstructionConfig& config,
                                          std::optional<int> rally_end_frame) {
  track.validate();
  for (std::size_t i = 0; i < hit_list.size(); ++i) {
    if (hit_list[i].player == Player::unknown) {
      throw InvalidInput("hit at frame " + std::to_string(hit_list[i].frame) +
                         " has no player attribution");
    }
    if (i > 0) {
      if (hit_list[i].frame <= hit_list[i - 1].frame) {
        throw InvalidInput("hits must be strictly time-ordered");
      }
      if (hit_list[i].player == hit_list[i - 1].player) {
        throw InvalidInput("hits must alternate between players");
      }
    }
  }
  if (rally_end_frame && !hit_list.empty() && *rally_end_frame <= hit_list.back().frame) {
    throw InvalidInput("rally end frame must follow the last hit");
  }

  std::vector<ShotAssembly> shots;
  for (std::size_t j = 0; j < hit_list.size(); ++j) {
    const bool last = j + 1 == hit_list.size();
    if (last && !rally_end_frame) break;
    ShotAssembly a;
    a.hit_frame = hit_list[j].frame;
    a.receive_frame = last ? *rally_end_frame : hit_list[j + 1].frame;
    a.hitter = hit_list[j].player;

    const auto hitter_pos = anchors.position(a.hitter, a.hit_frame);
    const auto receiver_pos = anchors.position(geometry::opponent(a.hitter), a.receive_frame);
    ShotObservation shot;
    shot.track = track.slice(a.hit_frame, a.receive_frame);
    shot.hit_frame = a.hit_frame;
    shot.receive_frame = a.receive_frame;
    shot.hitter = a.hitter;
    if (!hitter_pos) {
      a.issue = "no resolved hitter position at frame " + std::to_string(a.hit_frame);
    } else if (!receiver_pos) {
      a.issue = "no resolved receiver position at frame " + std::to_string(a.receive_frame);
    } else if (shot.track.visible_count() < 3) {
      a.issue = "fewer than 3 visible track frames";
    }
    if (hitter_pos && receiver_pos) {
      shot.x_hit = geometry::anchor_3d(*hitter_pos, config.anchor_height);
      shot.x_receive = geometry::anchor_3d(*receiver_pos, config.anchor_height);
    }
    if (a.issue.empty()) a.shot = std::move(shot);
    shots.push_back(std::move(a));
  }
  return shots;
}

}  // namespace shuttle3d::recon
