#pragma once

// Synthetic trajectory benchmark: quarter-court grid generation, anchor
// noise, batch reconstruction and the zone / flight-time error reports.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "shuttle3d/geometry.hpp"
#include "shuttle3d/physics.hpp"
#include "shuttle3d/reconstruction.hpp"

namespace shuttle3d::bench {

using geometry::CameraModel;
using geometry::Player;
using geometry::WorldPoint;
using physics::FlightPath;
using physics::InitialConditions;

/// Pinhole camera looking from `eye` at `target`, z up, no roll.
struct CameraSpec {
  std::string id;
  WorldPoint eye = WorldPoint::Zero();
  WorldPoint target = WorldPoint::Zero();
  double focal_px = 1000.0;
  int width = 1920;
  int height = 1080;
  /// Rotation about the optical axis, degrees.
  double roll_deg = 0.0;
};

CameraModel look_at_camera(const CameraSpec& spec);

/// Three broadcast-style views from behind the near baseline.
std::vector<CameraSpec> default_cameras();

struct DatasetConfig {
  double fps = 30.0;
  /// Cell edge lengths (x, y, z) and the extent of the sampled region, which
  /// starts at the origin: the near-left quarter of the court up to 2.5 m.
  std::array<double, 3> cell{0.1, 0.2, 0.2};
  std::array<double, 3> region{3.05, 6.7, 2.5};
  /// Use every k-th cell only.
  int cell_stride = 1;
  /// Reflect every accepted shot into the other three quarters.
  bool all_quarters = false;
  int max_retries = 50;

  double speed_min = 2.0;
  double speed_max = recon::kMaxLaunchSpeed;
  double elevation_min_deg = -60.0;
  double elevation_max_deg = 80.0;
  /// Azimuth spread around the direction straight down the court.
  double azimuth_half_width_deg = 90.0;
  double cd_min = recon::kMinDragCoefficient;
  double cd_max = recon::kMaxDragCoefficient;
  double net_height = geometry::kDefaultPoleHeight;
  int min_visible = 3;
  /// Mark frames outside the image as not visible. Off by default: every
  /// frame in front of the camera is observed.
  bool clip_to_image = false;

  /// Step of the ground-truth simulation.
  double sim_dt = 1e-3;
  double t_max = physics::kDefaultMaxFlightTime;

  /// Half-width of the uniform horizontal noise on the anchors, metres.
  double anchor_noise = 0.5;
  /// Standard deviation of Gaussian noise added to the track, pixels.
  double track_noise_px = 1.0;

  std::vector<CameraSpec> cameras = default_cameras();
  std::uint64_t seed = 0;
  /// 0 = hardware concurrency.
  int threads = 0;

  void validate() const;
  std::array<int, 3> cell_counts() const;
};

struct SyntheticShot {
  std::size_t cell = 0;
  /// 0 for the generated quarter, 1..3 for reflections.
  int quarter = 0;
  std::size_t camera = 0;
  std::string camera_id;
  InitialConditions ic_true;
  /// Ground truth at the frame times of the track, t = 0 at the hit.
  FlightPath path_true;
  recon::ShuttleTrack track;
  int receive_frame = 0;
  WorldPoint hit_true = WorldPoint::Zero();
  WorldPoint receive_true = WorldPoint::Zero();
  WorldPoint hit_noisy = WorldPoint::Zero();
  WorldPoint receive_noisy = WorldPoint::Zero();
  /// Time until the shuttle reaches the ground.
  double flight_time = 0.0;
  WorldPoint landing = WorldPoint::Zero();
  /// Position inside a rally, when the shot belongs to one.
  std::optional<int> rally_index;
  std::optional<int> rally_length;

  Player hitter() const;
  recon::ShotObservation observation(bool noisy_anchors) const;
};

struct Dataset {
  DatasetConfig config;
  std::vector<SyntheticShot> shots;
  std::size_t cells_total = 0;
  std::vector<std::size_t> empty_cells;
};

Dataset generate_dataset(const DatasetConfig& config);

/// Ground truth path of `ic` at frames 0 .. receive_frame-1.
FlightPath truth_path(const InitialConditions& ic, double fps, int receive_frame, double dt);

/// Perturbs x and y of both anchors by Uniform(-magnitude, magnitude); z is
/// left unchanged.
SyntheticShot add_anchor_noise(const SyntheticShot& shot, double magnitude, std::uint64_t seed);

/// Mean 3D distance over the samples, in centimetres. Throws InvalidInput
/// when the sample times differ.
double reconstruction_error(const FlightPath& truth, const FlightPath& recon);

/// Mean pixel distance between the projections of the two paths.
double reprojection_error_px(const CameraModel& camera, const FlightPath& truth,
                             const FlightPath& recon);

enum class Band { front, middle, back };

struct Zone {
  Player side = Player::near;
  Band band = Band::front;

  bool operator==(const Zone&) const = default;
  /// 0..5 from the near baseline to the far baseline.
  int index() const;
  std::string name() const;
};

Zone zone_of(const WorldPoint& p);

struct ShotResult {
  std::size_t shot = 0;
  /// False when the reconstruction threw or produced no finite loss.
  bool ok = false;
  InitialConditions ic;
  double dt = 0.0;
  double loss = 0.0;
  bool converged = false;
  std::string message;
};

/// Reconstructs the first `limit` shots (all when 0) in parallel.
std::vector<ShotResult> reconstruct_dataset(
    const Dataset& dataset, const recon::ReconstructionConfig& config, bool noisy_anchors,
    int threads = 0, std::size_t limit = 0,
    const std::function<void(std::size_t)>& progress = nullptr);

struct ErrorStats {
  std::size_t count = 0;
  double mean_cm = 0.0;
  double std_cm = 0.0;
  double mean_px = 0.0;
  double std_px = 0.0;
};

struct FlightBin {
  double t_begin = 0.0;
  double t_end = 0.0;
  ErrorStats stats;
};

struct EvalConfig {
  double bin_width = 0.25;
  bool exclude_rally_ends = true;
};

struct ShotError {
  std::size_t shot = 0;
  double error_cm = 0.0;
  double error_px = 0.0;
};

struct EvalReport {
  /// [start zone][end zone]
  std::array<std::array<ErrorStats, 6>, 6> zones{};
  /// By start zone only.
  std::array<ErrorStats, 6> start_zones{};
  std::vector<FlightBin> bins;
  ErrorStats overall;
  std::size_t evaluated = 0;
  std::size_t excluded = 0;
  std::size_t failed = 0;
  std::vector<ShotError> per_shot;
  /// Rank correlation of bin centre against bin mean error (non-empty bins);
  /// NaN with fewer than 2 bins.
  double flight_time_spearman = 0.0;
  /// Median error of the shots in the longest-flight quartile.
  double plateau_cm = 0.0;
};

EvalReport evaluate(const Dataset& dataset, const std::vector<ShotResult>& results,
                    const EvalConfig& config = {});

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Writes zone_report.csv, zone_report_px.csv, flight_time.csv, per_shot.csv
/// and summary.json into `dir`.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace shuttle3d::bench
