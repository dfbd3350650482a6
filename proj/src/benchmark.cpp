#include "shuttle3d/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Geometry>
#include <json.hpp>

#include "shuttle3d/errors.hpp"
#include "shuttle3d/random.hpp"

namespace shuttle3d::bench {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

int resolve_threads(int threads, std::size_t work) {
  int n = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, n);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(1, work)));
}

// Runs fn(i) for i in [0, n) on a pool; the first exception is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn&& fn) {
  const int workers = resolve_threads(threads, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

// ---------------------------------------------------------------------------
// Cameras

CameraModel look_at_camera(const CameraSpec& spec) {
  const Eigen::Vector3d forward = (spec.target - spec.eye).normalized();
  const Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d right = forward.cross(up);
  if (right.norm() < 1e-9) throw InvalidInput("camera " + spec.id + " looks straight down");
  right.normalize();
  Eigen::Vector3d down = forward.cross(right);

  const double c = std::cos(spec.roll_deg * kDeg);
  const double s = std::sin(spec.roll_deg * kDeg);
  const Eigen::Vector3d r = c * right + s * down;
  const Eigen::Vector3d d = -s * right + c * down;

  Eigen::Matrix3d R;
  R.row(0) = r.transpose();
  R.row(1) = d.transpose();
  R.row(2) = forward.transpose();
  Eigen::Matrix3d K;
  K << spec.focal_px, 0.0, spec.width / 2.0, 0.0, spec.focal_px, spec.height / 2.0, 0.0, 0.0, 1.0;
  geometry::Matrix34 Rt;
  Rt.leftCols<3>() = R;
  Rt.col(3) = -R * spec.eye;
  return CameraModel(K * Rt);
}

std::vector<CameraSpec> default_cameras() {
  return {
      {"main", {3.05, -14.0, 6.0}, {3.05, 9.0, 0.0}, 1000.0, 1920, 1080, 0.0},
      {"left", {-1.0, -12.0, 7.0}, {3.05, 8.0, 0.0}, 1000.0, 1920, 1080, 0.0},
      {"high", {5.5, -13.0, 8.0}, {3.05, 8.5, 0.0}, 1000.0, 1920, 1080, 0.0},
  };
}

// ---------------------------------------------------------------------------
// Dataset

void DatasetConfig::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidInput("fps must be positive");
  for (int a = 0; a < 3; ++a) {
    if (!(cell[a] > 0.0) || !(region[a] > 0.0)) {
      throw InvalidInput("cell sizes and region extents must be positive");
    }
  }
  if (region[0] > geometry::kCourtWidth / 2.0 + 1e-9 || region[1] > geometry::kNetY + 1e-9 ||
      region[2] > recon::kMaxLaunchHeight + 1e-9) {
    throw InvalidInput("sampling region must lie inside the near-left quarter");
  }
  if (cell_stride < 1) throw InvalidInput("cell_stride must be >= 1");
  if (max_retries < 1) throw InvalidInput("max_retries must be >= 1");
  if (!(speed_min > 0.0) || speed_max < speed_min || speed_max > recon::kMaxLaunchSpeed) {
    throw InvalidInput("speed range must satisfy 0 < min <= max <= 120");
  }
  if (elevation_min_deg < -90.0 || elevation_max_deg > 90.0 ||
      elevation_max_deg < elevation_min_deg) {
    throw InvalidInput("invalid elevation range");
  }
  if (azimuth_half_width_deg < 0.0 || azimuth_half_width_deg > 90.0) {
    throw InvalidInput("azimuth half-width must be within [0, 90] degrees");
  }
  if (cd_min < recon::kMinDragCoefficient || cd_max > recon::kMaxDragCoefficient ||
      cd_max < cd_min) {
    throw InvalidInput("drag range must lie within [0.05, 1]");
  }
  if (min_visible < 3) throw InvalidInput("min_visible must be >= 3");
  if (!(sim_dt > 0.0) || !(t_max > 0.0)) throw InvalidInput("sim_dt and t_max must be positive");
  if (!(anchor_noise >= 0.0) || !(track_noise_px >= 0.0)) {
    throw InvalidInput("noise magnitudes must be non-negative");
  }
  if (cameras.empty()) throw InvalidInput("at least one camera is required");
}

std::array<int, 3> DatasetConfig::cell_counts() const {
  std::array<int, 3> n{};
  for (int a = 0; a < 3; ++a) n[a] = static_cast<int>(std::ceil(region[a] / cell[a] - 1e-9));
  return n;
}

Player SyntheticShot::hitter() const {
  return ic_true.x0.y() <= geometry::kNetY ? Player::near : Player::far;
}

recon::ShotObservation SyntheticShot::observation(bool noisy_anchors) const {
  recon::ShotObservation obs;
  obs.track = track;
  obs.hit_frame = 0;
  obs.receive_frame = receive_frame;
  obs.hitter = hitter();
  obs.x_hit = noisy_anchors ? hit_noisy : hit_true;
  obs.x_receive = noisy_anchors ? receive_noisy : receive_true;
  return obs;
}

FlightPath truth_path(const InitialConditions& ic, double fps, int receive_frame, double dt) {
  FlightPath path;
  path.dt = dt;
  physics::FlightIntegrator flight(ic, dt);
  for (int f = 0; f < receive_frame; ++f) {
    const double t = f / fps;
    path.samples.push_back({t, flight.position_at(t)});
  }
  return path;
}

SyntheticShot add_anchor_noise(const SyntheticShot& shot, double magnitude, std::uint64_t seed) {
  if (!(magnitude >= 0.0)) throw InvalidInput("noise magnitude must be non-negative");
  SyntheticShot out = shot;
  std::mt19937_64 rng(splitmix64(seed));
  std::uniform_real_distribution<double> u(-magnitude, magnitude);
  out.hit_noisy = shot.hit_true;
  out.receive_noisy = shot.receive_true;
  if (magnitude > 0.0) {
    out.hit_noisy.x() += u(rng);
    out.hit_noisy.y() += u(rng);
    out.receive_noisy.x() += u(rng);
    out.receive_noisy.y() += u(rng);
  }
  return out;
}

namespace {

InitialConditions mirrored(const InitialConditions& ic, bool in_x, bool in_y) {
  InitialConditions out = ic;
  if (in_x) {
    out.x0.x() = geometry::kCourtWidth - out.x0.x();
    out.v0.x() = -out.v0.x();
  }
  if (in_y) {
    out.x0.y() = geometry::kCourtLength - out.x0.y();
    out.v0.y() = -out.v0.y();
  }
  return out;
}

struct Flight {
  physics::LandingInfo landing;
  int receive_frame = 0;
};

// Simulates ic and applies the acceptance rules that do not depend on the
// camera. The hitter's half is the one containing x0.
std::optional<Flight> accept_flight(const InitialConditions& ic, const DatasetConfig& config) {
  physics::LandingInfo landing;
  try {
    landing = physics::extend_to_ground(ic, config.sim_dt, config.t_max);
  } catch (const NumericalError&) {
    return std::nullopt;
  }
  const bool from_near = ic.x0.y() <= geometry::kNetY;
  const bool lands_opposite =
      from_near ? landing.point.y() > geometry::kNetY : landing.point.y() < geometry::kNetY;
  if (!lands_opposite || landing.out_distance > 0.0) return std::nullopt;

  const FlightPath path = physics::integrate(ic, landing.time, config.sim_dt);
  if (!physics::crosses_net_validly(path, config.net_height)) return std::nullopt;

  Flight f;
  f.landing = landing;
  f.receive_frame = static_cast<int>(std::floor(landing.time * config.fps));
  if (f.receive_frame < config.min_visible) return std::nullopt;
  return f;
}

// Builds the shot for one camera; nullopt when too few frames are visible.
std::optional<SyntheticShot> observe(const InitialConditions& ic, const Flight& flight,
                                     const DatasetConfig& config, std::size_t cam_index,
                                     const CameraModel& camera, std::mt19937_64& rng) {
  SyntheticShot shot;
  shot.camera = cam_index;
  shot.camera_id = config.cameras[cam_index].id;
  shot.ic_true = ic;
  shot.receive_frame = flight.receive_frame;
  shot.flight_time = flight.landing.time;
  shot.landing = flight.landing.point;
  shot.path_true = truth_path(ic, config.fps, flight.receive_frame, config.sim_dt);
  physics::FlightIntegrator at_receive(ic, config.sim_dt);
  shot.hit_true = ic.x0;
  shot.receive_true = at_receive.position_at(flight.receive_frame / config.fps);

  std::normal_distribution<double> noise(0.0, 1.0);
  const CameraSpec& spec = config.cameras[cam_index];
  shot.track.fps = config.fps;
  int visible = 0;
  for (int f = 0; f < flight.receive_frame; ++f) {
    const WorldPoint& p = shot.path_true.samples[static_cast<std::size_t>(f)].pos;
    recon::TrackEntry e;
    e.frame = f;
    if (camera.depth_sign(p) > 0.0) {
      const auto uv = camera.project(p);
      e.u = uv.x();
      e.v = uv.y();
      e.visible = !config.clip_to_image ||
                  (e.u >= 0.0 && e.v >= 0.0 && e.u < spec.width && e.v < spec.height);
    }
    if (config.track_noise_px > 0.0) {
      // Always drawn so the stream does not depend on visibility.
      const double du = noise(rng) * config.track_noise_px;
      const double dv = noise(rng) * config.track_noise_px;
      if (e.visible) {
        e.u += du;
        e.v += dv;
      }
    }
    if (!e.visible) {
      e.u = 0.0;
      e.v = 0.0;
    }
    visible += e.visible ? 1 : 0;
    shot.track.entries.push_back(e);
  }
  if (visible < config.min_visible) return std::nullopt;
  return shot;
}

}  // namespace

Dataset generate_dataset(const DatasetConfig& config) {
  config.validate();
  const auto n = config.cell_counts();
  const std::size_t total = static_cast<std::size_t>(n[0]) * n[1] * n[2];
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < total; c += static_cast<std::size_t>(config.cell_stride)) {
    cells.push_back(c);
  }

  std::vector<CameraModel> cameras;
  for (const auto& spec : config.cameras) cameras.push_back(look_at_camera(spec));

  std::vector<std::vector<SyntheticShot>> per_cell(cells.size());
  parallel_for(cells.size(), config.threads, [&](std::size_t slot) {
    const std::size_t c = cells[slot];
    const int ix = static_cast<int>(c % static_cast<std::size_t>(n[0]));
    const int iy = static_cast<int>((c / static_cast<std::size_t>(n[0])) % static_cast<std::size_t>(n[1]));
    const int iz = static_cast<int>(c / (static_cast<std::size_t>(n[0]) * n[1]));
    const std::array<int, 3> idx{ix, iy, iz};

    std::mt19937_64 rng(stream_seed(config.seed, c));
    std::array<std::uniform_real_distribution<double>, 3> pos;
    for (int a = 0; a < 3; ++a) {
      const double lo = idx[a] * config.cell[a];
      const double hi = std::min((idx[a] + 1) * config.cell[a], config.region[a]);
      pos[a] = std::uniform_real_distribution<double>(lo, hi);
    }
    std::uniform_real_distribution<double> azimuth(-config.azimuth_half_width_deg * kDeg,
                                                   config.azimuth_half_width_deg * kDeg);
    std::uniform_real_distribution<double> sin_elevation(std::sin(config.elevation_min_deg * kDeg),
                                                         std::sin(config.elevation_max_deg * kDeg));
    std::uniform_real_distribution<double> speed(config.speed_min, config.speed_max);
    std::uniform_real_distribution<double> cd(config.cd_min, config.cd_max);

    for (int attempt = 0; attempt < config.max_retries; ++attempt) {
      InitialConditions ic;
      ic.x0 = {pos[0](rng), pos[1](rng), pos[2](rng)};
      const double az = azimuth(rng);
      const double se = sin_elevation(rng);
      const double ce = std::sqrt(std::max(0.0, 1.0 - se * se));
      ic.v0 = speed(rng) * Eigen::Vector3d(ce * std::sin(az), ce * std::cos(az), se);
      ic.cd = cd(rng);

      const auto flight = accept_flight(ic, config);
      if (!flight) continue;

      std::vector<SyntheticShot> shots;
      const int quarters = config.all_quarters ? 4 : 1;
      bool all_ok = true;
      for (int q = 0; q < quarters && all_ok; ++q) {
        const InitialConditions qic = mirrored(ic, (q & 1) != 0, (q & 2) != 0);
        const auto qflight = q == 0 ? flight : accept_flight(qic, config);
        if (!qflight) {
          all_ok = false;
          break;
        }
        for (std::size_t k = 0; k < cameras.size(); ++k) {
          auto shot = observe(qic, *qflight, config, k, cameras[k], rng);
          if (!shot) {
            all_ok = false;
            break;
          }
          shot->cell = c;
          shot->quarter = q;
          // The launch must satisfy the reconstruction's own constraints.
          if (!recon::feasible(qic, shot->observation(false), 1e-9)) {
            all_ok = false;
            break;
          }
          shots.push_back(std::move(*shot));
        }
      }
      if (!all_ok) continue;

      std::uniform_int_distribution<std::uint64_t> seed_draw;
      for (auto& s : shots) s = add_anchor_noise(s, config.anchor_noise, seed_draw(rng));
      per_cell[slot] = std::move(shots);
      return;
    }
  });

  Dataset out;
  out.config = config;
  out.cells_total = cells.size();
  for (std::size_t slot = 0; slot < cells.size(); ++slot) {
    if (per_cell[slot].empty()) {
      out.empty_cells.push_back(cells[slot]);
      continue;
    }
    for (auto& s : per_cell[slot]) out.shots.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Errors and zones

namespace {

void check_aligned(const FlightPath& a, const FlightPath& b) {
  if (a.samples.size() != b.samples.size()) {
    throw InvalidInput("paths have different sample counts");
  }
  if (a.samples.empty()) throw InvalidInput("paths are empty");
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    if (std::abs(a.samples[i].t - b.samples[i].t) > 1e-9) {
      throw InvalidInput("paths are sampled at different times");
    }
  }
}

}  // namespace

double reconstruction_error(const FlightPath& truth, const FlightPath& recon) {
  check_aligned(truth, recon);
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.samples.size(); ++i) {
    sum += (truth.samples[i].pos - recon.samples[i].pos).norm();
  }
  return 100.0 * sum / static_cast<double>(truth.samples.size());
}

double reprojection_error_px(const CameraModel& camera, const FlightPath& truth,
                             const FlightPath& recon) {
  check_aligned(truth, recon);
  double sum = 0.0;
  for (std::size_t i = 0; i < truth.samples.size(); ++i) {
    sum += (camera.project(truth.samples[i].pos) - camera.project(recon.samples[i].pos)).norm();
  }
  return sum / static_cast<double>(truth.samples.size());
}

int Zone::index() const {
  const int b = static_cast<int>(band);
  return side == Player::near ? 2 - b : 3 + b;
}

std::string Zone::name() const {
  static const char* bands[] = {"front", "middle", "back"};
  return std::string(geometry::to_string(side)) + "-" + bands[static_cast<int>(band)];
}

Zone zone_of(const WorldPoint& p) {
  if (!(p.y() >= 0.0 && p.y() <= geometry::kCourtLength)) {
    throw InvalidInput("zone_of needs 0 <= y <= 13.4");
  }
  Zone z;
  z.side = p.y() <= geometry::kNetY ? Player::near : Player::far;
  const double d = std::abs(geometry::kNetY - p.y());
  const double third = geometry::kNetY / 3.0;
  z.band = d <= third ? Band::front : (d <= 2.0 * third ? Band::middle : Band::back);
  return z;
}

// ---------------------------------------------------------------------------
// Batch reconstruction and evaluation

std::vector<ShotResult> reconstruct_dataset(const Dataset& dataset,
                                            const recon::ReconstructionConfig& config,
                                            bool noisy_anchors, int threads, std::size_t limit,
                                            const std::function<void(std::size_t)>& progress) {
  config.validate();
  const std::size_t n =
      limit > 0 ? std::min(limit, dataset.shots.size()) : dataset.shots.size();
  std::vector<CameraModel> cameras;
  for (const auto& spec : dataset.config.cameras) cameras.push_back(look_at_camera(spec));

  std::vector<ShotResult> results(n);
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(n, threads, [&](std::size_t i) {
    const SyntheticShot& shot = dataset.shots[i];
    ShotResult r;
    r.shot = i;
    recon::ReconstructionConfig cfg = config;
    cfg.seed = stream_seed(config.seed, i);
    r.dt = cfg.step_for(shot.track.fps);
    try {
      const auto res = recon::reconstruct_shot(cameras.at(shot.camera),
                                               shot.observation(noisy_anchors), cfg);
      r.ic = res.ic;
      r.loss = res.loss_total;
      r.converged = res.converged;
      r.message = res.message;
      r.ok = std::isfinite(res.loss_total);
    } catch (const Error& e) {
      r.ok = false;
      r.message = e.what();
    }
    results[i] = std::move(r);
    const std::size_t finished = ++done;
    if (progress) {
      std::lock_guard lock(progress_mutex);
      progress(finished);
    }
  });
  return results;
}

namespace {

struct Accumulator {
  std::size_t n = 0;
  double sum_cm = 0.0;
  double sq_cm = 0.0;
  double sum_px = 0.0;
  double sq_px = 0.0;

  void add(double cm, double px) {
    ++n;
    sum_cm += cm;
    sq_cm += cm * cm;
    sum_px += px;
    sq_px += px * px;
  }

  ErrorStats stats() const {
    ErrorStats s;
    s.count = n;
    if (n == 0) return s;
    const double dn = static_cast<double>(n);
    s.mean_cm = sum_cm / dn;
    s.mean_px = sum_px / dn;
    s.std_cm = std::sqrt(std::max(0.0, sq_cm / dn - s.mean_cm * s.mean_cm));
    s.std_px = std::sqrt(std::max(0.0, sq_px / dn - s.mean_px * s.mean_px));
    return s;
  }
};

}  // namespace

EvalReport evaluate(const Dataset& dataset, const std::vector<ShotResult>& results,
                    const EvalConfig& config) {
  if (!(config.bin_width > 0.0)) throw InvalidInput("bin width must be positive");
  std::vector<CameraModel> cameras;
  for (const auto& spec : dataset.config.cameras) cameras.push_back(look_at_camera(spec));

  EvalReport report;
  std::array<std::array<Accumulator, 6>, 6> zones{};
  std::array<Accumulator, 6> starts{};
  std::vector<Accumulator> bins;
  Accumulator overall;

  for (const auto& r : results) {
    if (r.shot >= dataset.shots.size()) throw InvalidInput("result refers to an unknown shot");
    const SyntheticShot& shot = dataset.shots[r.shot];
    if (config.exclude_rally_ends && shot.rally_index && shot.rally_length &&
        (*shot.rally_index == 0 || *shot.rally_index + 1 == *shot.rally_length)) {
      ++report.excluded;
      continue;
    }
    if (!r.ok) {
      ++report.failed;
      continue;
    }
    const FlightPath recon_path = truth_path(r.ic, shot.track.fps, shot.receive_frame, r.dt);
    const double cm = reconstruction_error(shot.path_true, recon_path);
    const double px = reprojection_error_px(cameras.at(shot.camera), shot.path_true, recon_path);
    report.per_shot.push_back({r.shot, cm, px});

    const int zs = zone_of(shot.ic_true.x0).index();
    const int ze = zone_of(shot.landing).index();
    zones[static_cast<std::size_t>(zs)][static_cast<std::size_t>(ze)].add(cm, px);
    starts[static_cast<std::size_t>(zs)].add(cm, px);
    const auto bin = static_cast<std::size_t>(std::floor(shot.flight_time / config.bin_width));
    if (bins.size() <= bin) bins.resize(bin + 1);
    bins[bin].add(cm, px);
    overall.add(cm, px);
  }

  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) report.zones[a][b] = zones[a][b].stats();
    report.start_zones[a] = starts[a].stats();
  }
  for (std::size_t b = 0; b < bins.size(); ++b) {
    report.bins.push_back({b * config.bin_width, (b + 1) * config.bin_width, bins[b].stats()});
  }
  report.overall = overall.stats();
  report.evaluated = overall.n;

  std::vector<double> centres;
  std::vector<double> means;
  for (const auto& b : report.bins) {
    if (b.stats.count == 0) continue;
    centres.push_back((b.t_begin + b.t_end) / 2.0);
    means.push_back(b.stats.mean_cm);
  }
  report.flight_time_spearman =
      centres.size() >= 2 ? spearman(centres, means) : std::numeric_limits<double>::quiet_NaN();

  std::vector<std::pair<double, double>> by_time;  // (flight time, error)
  for (const auto& e : report.per_shot) {
    by_time.emplace_back(dataset.shots[e.shot].flight_time, e.error_cm);
  }
  std::stable_sort(by_time.begin(), by_time.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  if (!by_time.empty()) {
    std::vector<double> tail;
    for (std::size_t i = (3 * by_time.size()) / 4; i < by_time.size(); ++i) {
      tail.push_back(by_time[i].second);
    }
    std::sort(tail.begin(), tail.end());
    const std::size_t m = tail.size();
    report.plateau_cm = m % 2 == 1 ? tail[m / 2] : (tail[m / 2 - 1] + tail[m / 2]) / 2.0;
  }
  return report;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidInput("spearman needs equal-length inputs");
  if (x.size() < 2) throw InvalidInput("spearman needs at least 2 points");
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / static_cast<double>(rx.size());
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / static_cast<double>(ry.size());
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------------------
// Report files

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw InvalidInput("cannot write " + p.string());
  out << std::setprecision(10);
  return out;
}

nlohmann::json stats_json(const ErrorStats& s) {
  return {{"count", s.count}, {"mean_cm", s.mean_cm}, {"std_cm", s.std_cm},
          {"mean_px", s.mean_px}, {"std_px", s.std_px}};
}

Zone zone_from_index(int i) {
  Zone z;
  z.side = i < 3 ? Player::near : Player::far;
  z.band = static_cast<Band>(i < 3 ? 2 - i : i - 3);
  return z;
}

}  // namespace

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const bool pixels : {false, true}) {
    auto out = open_out(dir / (pixels ? "zone_report_px.csv" : "zone_report.csv"));
    out << "start\\end";
    for (int b = 0; b < 6; ++b) out << ',' << zone_from_index(b).name();
    out << '\n';
    for (int a = 0; a < 6; ++a) {
      out << zone_from_index(a).name();
      for (int b = 0; b < 6; ++b) {
        const auto& s = report.zones[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        out << ',';
        if (s.count > 0) out << (pixels ? s.mean_px : s.mean_cm);
      }
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "flight_time.csv");
    out << "t_begin,t_end,count,mean_cm,std_cm,mean_px,std_px\n";
    for (const auto& b : report.bins) {
      out << b.t_begin << ',' << b.t_end << ',' << b.stats.count << ',' << b.stats.mean_cm << ','
          << b.stats.std_cm << ',' << b.stats.mean_px << ',' << b.stats.std_px << '\n';
    }
  }
  {
    auto out = open_out(dir / "per_shot.csv");
    out << "shot,error_cm,error_px\n";
    for (const auto& s : report.per_shot) {
      out << s.shot << ',' << s.error_cm << ',' << s.error_px << '\n';
    }
  }
  nlohmann::json j;
  j["overall"] = stats_json(report.overall);
  j["evaluated"] = report.evaluated;
  j["excluded"] = report.excluded;
  j["failed"] = report.failed;
  j["flight_time_spearman"] = report.flight_time_spearman;
  j["plateau_cm"] = report.plateau_cm;
  nlohmann::json starts = nlohmann::json::object();
  nlohmann::json matrix = nlohmann::json::object();
  for (int a = 0; a < 6; ++a) {
    const std::string name = zone_from_index(a).name();
    starts[name] = stats_json(report.start_zones[static_cast<std::size_t>(a)]);
    nlohmann::json row = nlohmann::json::object();
    for (int b = 0; b < 6; ++b) {
      row[zone_from_index(b).name()] =
          stats_json(report.zones[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]);
    }
    matrix[name] = row;
  }
  j["start_zones"] = starts;
  j["zones"] = matrix;
  nlohmann::json bins = nlohmann::json::array();
  for (const auto& b : report.bins) {
    nlohmann::json e = stats_json(b.stats);
    e["t_begin"] = b.t_begin;
    e["t_end"] = b.t_end;
    bins.push_back(e);
  }
  j["flight_time_bins"] = bins;
  auto out = open_out(dir / "summary.json");
  out << j.dump(2) << '\n';
}

}  // namespace shuttle3d::bench
