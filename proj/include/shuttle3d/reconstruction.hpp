#pragma once

// Per-shot recovery of initial conditions (x0, v0, cd) by constrained
// minimisation of
//
//   L = sigma * L_r + |x(0) - x_H|^2 + |x(t_R) - x_R|^2 + d_O^2
//
// where L_r sums squared pixel residuals over the visible frames, x_H / x_R
// are the hitter and receiver anchors and d_O is the out-of-court distance of
// the extrapolated landing point.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shuttle3d/geometry.hpp"
#include "shuttle3d/physics.hpp"

namespace shuttle3d::hits {
struct Hit;
}

namespace shuttle3d::recon {

using geometry::CameraModel;
using geometry::Player;
using geometry::WorldPoint;
using physics::FlightPath;
using physics::InitialConditions;
using physics::Vec3;

inline constexpr double kMaxLaunchHeight = 3.0;
inline constexpr double kMaxLaunchSpeed = 120.0;
inline constexpr double kMinDragCoefficient = 0.05;
inline constexpr double kMaxDragCoefficient = 1.0;

struct TrackEntry {
  int frame = 0;
  double u = 0.0;
  double v = 0.0;
  bool visible = false;
};

struct ShuttleTrack {
  double fps = 30.0;
  std::vector<TrackEntry> entries;

  /// Throws InvalidInput unless fps > 0, frames strictly increase and visible
  /// entries are finite.
  void validate() const;
  std::size_t visible_count() const;
  /// Entries with hit_frame <= frame < receive_frame.
  ShuttleTrack slice(int first_frame, int end_frame) const;
};

struct ShotObservation {
  ShuttleTrack track;
  int hit_frame = 0;
  int receive_frame = 0;
  Player hitter = Player::near;
  WorldPoint x_hit = WorldPoint::Zero();
  WorldPoint x_receive = WorldPoint::Zero();

  double fps() const { return track.fps; }
  double t_receive() const;
  double time_of(int frame) const;
  void validate() const;
};

enum class LossMode { full, reprojection_only };

const char* to_string(LossMode m);
LossMode loss_mode_from_string(std::string_view s);

struct PenaltySchedule {
  double initial_weight = 1e2;
  double growth = 10.0;
  int rounds = 3;
};

struct ReconstructionConfig {
  std::optional<double> sigma_override;
  double anchor_height = geometry::kDefaultAnchorHeight;
  int multistart_count = 8;
  /// Simplex iterations per inner solve.
  int max_iterations = 2000;
  double tolerance = 1e-8;
  PenaltySchedule penalty;
  LossMode loss_mode = LossMode::full;
  /// Integration step; 0 selects 1 / (4 fps).
  double dt = 0.0;
  double t_max = physics::kDefaultMaxFlightTime;
  std::uint64_t seed = 0;

  void validate() const;
  double step_for(double fps) const { return dt > 0.0 ? dt : 1.0 / (4.0 * fps); }
};

struct LossComponents {
  double total = 0.0;
  double sigma = 0.0;
  double reprojection = 0.0;  // L_r, unweighted
  double start_anchor = 0.0;
  double end_anchor = 0.0;
  double out_of_court = 0.0;  // d_O^2
  double out_distance = 0.0;  // d_O
};

struct ReconstructionResult {
  InitialConditions ic;
  double loss_total = 0.0;
  double loss_reprojection = 0.0;
  LossComponents components;
  /// Sampled at the shot's frame times (t = 0 at the hit frame).
  FlightPath path;
  bool converged = false;
  /// Simplex iterations and objective evaluations over all starts.
  int iterations = 0;
  int evaluations = 0;
  /// Height of x(t_R) inside [0, 3].
  bool final_height_ok = true;
  std::string message;
};

/// Inverse square of the spectral norm of P.
double sigma_from_camera(const CameraModel& camera);

/// Weight applied to L_r: the override when set, otherwise sigma of the
/// unit-Frobenius camera, so it does not depend on the scale P was stored at.
double loss_sigma(const CameraModel& camera, const ReconstructionConfig& config);

/// Sum of squared pixel residuals over the visible frames of the shot.
/// Throws InvalidInput when no frame is visible.
double reprojection_loss(const CameraModel& camera, const InitialConditions& ic,
                         const ShotObservation& shot, double dt);

LossComponents total_loss(const CameraModel& camera, const InitialConditions& ic,
                          const ShotObservation& shot, const ReconstructionConfig& config);

/// Zero-drag chord guess from the anchors; cd = 0.21.
InitialConditions initial_guess(const ShotObservation& shot);

/// Exact feasibility of the launch constraints for the given shot.
bool feasible(const InitialConditions& ic, const ShotObservation& shot, double tol = 1e-9);

ReconstructionResult reconstruct_shot(const CameraModel& camera, const ShotObservation& shot,
                                      const ReconstructionConfig& config = {});

/// Path sampled at the shot's frame times [hit_frame, receive_frame).
FlightPath frame_path(const InitialConditions& ic, const ShotObservation& shot, double dt);

struct ShotAssembly {
  int hit_frame = 0;
  int receive_frame = 0;
  Player hitter = Player::near;
  std::optional<ShotObservation> shot;
  /// Why the shot cannot be reconstructed, empty otherwise.
  std::string issue;
};

/// Splits a rally at the hits. Shot j spans [hit_j, hit_{j+1}); the last hit
/// yields a shot only when `rally_end_frame` is given.
std::vector<ShotAssembly> shots_from_hits(const std::vector<hits::Hit>& hits,
                                          const ShuttleTrack& track,
                                          const geometry::PlayerAnchors& anchors,
                                          const ReconstructionConfig& config,
                                          std::optional<int> rally_end_frame = std::nullopt);

}  // namespace shuttle3d::recon
