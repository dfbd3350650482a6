#include "shuttle3d/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "shuttle3d/errors.hpp"

namespace shuttle3d::io {

std::string format_number(double v) {
  if (!std::isfinite(v)) {
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

// ---------------------------------------------------------------------------
// CSV plumbing

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> cells;
};

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw InvalidInput(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (*b == '+') ++b;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

bool parse_int(const std::string& s, long long& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

// Reads the data rows of a CSV with `columns` fields. A first line whose
// first cell is not numeric is taken as the header.
std::vector<CsvRow> read_csv(const fs::path& path, std::size_t columns, bool header_required) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<CsvRow> rows;
  std::string line;
  std::size_t n = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (first) {
      first = false;
      double dummy = 0.0;
      const bool numeric = !cells.empty() && parse_double(cells[0], dummy);
      if (!numeric) continue;
      if (header_required) fail(path, n, "missing header");
    }
    if (cells.size() != columns) {
      fail(path, n, "expected " + std::to_string(columns) + " fields, got " +
                        std::to_string(cells.size()));
    }
    rows.push_back({n, std::move(cells)});
  }
  return rows;
}

double number_at(const fs::path& path, const CsvRow& row, std::size_t i) {
  double v = 0.0;
  if (!parse_double(row.cells[i], v) || !std::isfinite(v)) {
    fail(path, row.line, "invalid number '" + row.cells[i] + "'");
  }
  return v;
}

int int_at(const fs::path& path, const CsvRow& row, std::size_t i) {
  long long v = 0;
  if (!parse_int(row.cells[i], v) || v < std::numeric_limits<int>::min() ||
      v > std::numeric_limits<int>::max()) {
    fail(path, row.line, "invalid integer '" + row.cells[i] + "'");
  }
  return static_cast<int>(v);
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  return out;
}

// ---------------------------------------------------------------------------
// JSON helpers

template <int N>
Eigen::Matrix<double, N, 1> vec_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != N) {
    throw InvalidInput(std::string(what) + " must be an array of " + std::to_string(N) +
                       " numbers");
  }
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) {
      throw InvalidInput(std::string(what) + " must contain numbers");
    }
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

template <typename V>
json vec_json(const V& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const char* section) {
  if (!j.is_object()) throw InvalidInput(std::string(section) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) {
      throw InvalidInput("unknown key '" + key + "' in " + section + " configuration");
    }
  }
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw InvalidInput(std::string("invalid value for '") + key + "'");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Annotation and camera

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInput("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

CourtAnnotation read_annotation(const fs::path& path) {
  const json j = read_json(path);
  if (!j.is_object() || !j.contains("corners") || !j.contains("poles")) {
    throw InvalidInput(path.string() + ": expected 'corners' and 'poles'");
  }
  const json& c = j["corners"];
  const json& p = j["poles"];
  if (!c.is_array() || c.size() != 4) throw InvalidInput(path.string() + ": need 4 corners");
  if (!p.is_array() || p.size() != 2) throw InvalidInput(path.string() + ": need 2 pole tips");
  CourtAnnotation a;
  for (std::size_t i = 0; i < 4; ++i) a.corners[i] = vec_from<2>(c[i], "corner");
  for (std::size_t i = 0; i < 2; ++i) a.poles[i] = vec_from<2>(p[i], "pole");
  return a;
}

void write_annotation(const fs::path& path, const CourtAnnotation& a) {
  json j;
  j["corners"] = json::array();
  for (const auto& c : a.corners) j["corners"].push_back(vec_json(c));
  j["poles"] = json::array();
  for (const auto& p : a.poles) j["poles"].push_back(vec_json(p));
  write_json(path, j);
}

geometry::CameraModel read_camera(const fs::path& path) {
  const json j = read_json(path);
  if (!j.is_object() || !j.contains("P") || !j["P"].is_array() || j["P"].size() != 3) {
    throw InvalidInput(path.string() + ": expected 'P' with 3 rows");
  }
  geometry::Matrix34 P;
  for (std::size_t r = 0; r < 3; ++r) {
    P.row(static_cast<Eigen::Index>(r)) = vec_from<4>(j["P"][r], "camera row").transpose();
  }
  return geometry::CameraModel(P);
}

void write_camera(const fs::path& path, const geometry::CameraModel& camera) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(vec_json(camera.matrix().row(r)));
  write_json(path, json{{"P", rows}});
}

// ---------------------------------------------------------------------------
// Row formats

geometry::PlayerAnchors read_keypoints(const fs::path& path) {
  std::map<int, std::map<int, geometry::ImagePoint>> by_frame;
  for (const auto& row : read_csv(path, 4, false)) {
    const int frame = int_at(path, row, 0);
    const int pose = int_at(path, row, 1);
    const geometry::ImagePoint foot(number_at(path, row, 2), number_at(path, row, 3));
    if (!by_frame[frame].emplace(pose, foot).second) {
      fail(path, row.line, "duplicate pose id " + std::to_string(pose));
    }
  }
  geometry::PlayerAnchors anchors;
  for (const auto& [frame, poses] : by_frame) {
    geometry::FrameCandidates fc;
    fc.frame = frame;
    for (const auto& [id, foot] : poses) fc.feet.push_back(foot);
    anchors.candidates.push_back(std::move(fc));
  }
  return anchors;
}

void write_keypoints(const fs::path& path, const geometry::PlayerAnchors& anchors) {
  auto out = open_out(path);
  out << "frame,pose_id,foot_u,foot_v\n";
  for (const auto& fc : anchors.candidates) {
    for (std::size_t i = 0; i < fc.feet.size(); ++i) {
      out << fc.frame << ',' << i << ',' << format_number(fc.feet[i].x()) << ','
          << format_number(fc.feet[i].y()) << '\n';
    }
  }
}

physics::FlightPath read_trajectory(const fs::path& path) {
  physics::FlightPath p;
  for (const auto& row : read_csv(path, 4, true)) {
    p.samples.push_back({number_at(path, row, 0),
                         {number_at(path, row, 1), number_at(path, row, 2),
                          number_at(path, row, 3)}});
  }
  if (p.samples.size() >= 2) p.dt = p.samples[1].t - p.samples[0].t;
  return p;
}

void write_trajectory(const fs::path& path, const physics::FlightPath& path_data) {
  auto out = open_out(path);
  out << "t,x,y,z\n";
  for (const auto& s : path_data.samples) {
    out << format_number(s.t) << ',' << format_number(s.pos.x()) << ','
        << format_number(s.pos.y()) << ',' << format_number(s.pos.z()) << '\n';
  }
}

recon::ShuttleTrack read_track(const fs::path& path, double fps) {
  recon::ShuttleTrack track;
  track.fps = fps;
  for (const auto& row : read_csv(path, 4, false)) {
    recon::TrackEntry e;
    e.frame = int_at(path, row, 0);
    e.u = number_at(path, row, 1);
    e.v = number_at(path, row, 2);
    const int vis = int_at(path, row, 3);
    if (vis != 0 && vis != 1) fail(path, row.line, "visible must be 0 or 1");
    e.visible = vis == 1;
    if (!track.entries.empty() && e.frame <= track.entries.back().frame) {
      fail(path, row.line, "frames must be strictly increasing");
    }
    track.entries.push_back(e);
  }
  track.validate();
  return track;
}

void write_track(const fs::path& path, const recon::ShuttleTrack& track) {
  auto out = open_out(path);
  out << "frame,u,v,visible\n";
  for (const auto& e : track.entries) {
    out << e.frame << ',' << format_number(e.u) << ',' << format_number(e.v) << ','
        << (e.visible ? 1 : 0) << '\n';
  }
}

hits::ScoreSequence read_scores(const fs::path& path, double fps) {
  hits::ScoreSequence s;
  s.fps = fps;
  const auto rows = read_csv(path, 4, false);
  if (rows.empty()) throw InvalidInput(path.string() + ": no score rows");
  for (const auto& row : rows) {
    const int frame = int_at(path, row, 0);
    if (s.scores.empty()) {
      s.first_frame = frame;
    } else if (frame != s.first_frame + static_cast<int>(s.scores.size())) {
      fail(path, row.line, "score frames must be consecutive");
    }
    hits::FrameScores f{number_at(path, row, 1), number_at(path, row, 2),
                        number_at(path, row, 3)};
    if (f.no_hit < 0.0 || f.near < 0.0 || f.far < 0.0) {
      fail(path, row.line, "scores must be non-negative");
    }
    s.scores.push_back(f);
  }
  s.validate();
  return s;
}

void write_scores(const fs::path& path, const hits::ScoreSequence& scores) {
  auto out = open_out(path);
  out << "frame,s1,s2,s3\n";
  for (std::size_t i = 0; i < scores.scores.size(); ++i) {
    const auto& f = scores.scores[i];
    out << scores.first_frame + static_cast<int>(i) << ',' << format_number(f.no_hit) << ','
        << format_number(f.near) << ',' << format_number(f.far) << '\n';
  }
}

hits::HitList read_hits(const fs::path& path) {
  hits::HitList out;
  for (const auto& row : read_csv(path, 2, false)) {
    hits::Hit h;
    h.frame = int_at(path, row, 0);
    try {
      h.player = geometry::player_from_string(row.cells[1]);
    } catch (const InvalidInput& e) {
      fail(path, row.line, e.what());
    }
    out.push_back(h);
  }
  return out;
}

void write_hits(const fs::path& path, const hits::HitList& hits) {
  auto out = open_out(path);
  out << "frame,player\n";
  for (const auto& h : hits) out << h.frame << ',' << geometry::to_string(h.player) << '\n';
}

// ---------------------------------------------------------------------------
// JSON documents

json to_json(const physics::InitialConditions& ic) {
  return {{"x0", vec_json(ic.x0)}, {"v0", vec_json(ic.v0)}, {"cd", ic.cd}};
}

physics::InitialConditions ic_from_json(const json& j) {
  if (!j.is_object() || !j.contains("x0") || !j.contains("v0") || !j.contains("cd") ||
      !j["cd"].is_number()) {
    throw InvalidInput("initial conditions need x0, v0 and cd");
  }
  physics::InitialConditions ic;
  ic.x0 = vec_from<3>(j["x0"], "x0");
  ic.v0 = vec_from<3>(j["v0"], "v0");
  ic.cd = j["cd"].get<double>();
  return ic;
}

json shot_result_json(const recon::ShotAssembly& assembly,
                      const recon::ReconstructionResult* result, const std::string& error) {
  json j;
  j["hit_frame"] = assembly.hit_frame;
  j["receive_frame"] = assembly.receive_frame;
  j["hitter"] = geometry::to_string(assembly.hitter);
  j["ok"] = result != nullptr && error.empty();
  if (!assembly.issue.empty()) j["issue"] = assembly.issue;
  if (!error.empty()) j["error"] = error;
  if (result == nullptr) return j;
  j["ic"] = to_json(result->ic);
  const auto& c = result->components;
  j["loss"] = {{"total", c.total},
               {"sigma", c.sigma},
               {"reprojection", c.reprojection},
               {"start_anchor", c.start_anchor},
               {"end_anchor", c.end_anchor},
               {"out_of_court", c.out_of_court},
               {"out_distance", c.out_distance}};
  j["converged"] = result->converged;
  j["iterations"] = result->iterations;
  j["evaluations"] = result->evaluations;
  j["final_height_ok"] = result->final_height_ok;
  if (!result->message.empty()) j["message"] = result->message;
  json path = json::array();
  for (const auto& s : result->path.samples) {
    path.push_back({s.t, s.pos.x(), s.pos.y(), s.pos.z()});
  }
  j["path"] = path;
  return j;
}

json detection_json(const court::CourtDetection& d) {
  json j;
  j["success"] = d.success;
  j["score"] = d.score;
  j["corners"] = json::array();
  for (const auto& c : d.corners) j["corners"].push_back(vec_json(c));
  json h = json::array();
  for (int r = 0; r < 3; ++r) h.push_back(vec_json(d.homography.matrix().row(r)));
  j["homography"] = h;
  j["candidates_total"] = d.candidates_total;
  j["candidates_scored"] = d.candidates_scored;
  return j;
}

court::CourtDetection detection_from_json(const json& j) {
  court::CourtDetection d;
  try {
    d.success = j.at("success").get<bool>();
    d.score = j.at("score").get<double>();
    const json& c = j.at("corners");
    if (!c.is_array() || c.size() != 4) throw InvalidInput("detection needs 4 corners");
    for (std::size_t i = 0; i < 4; ++i) d.corners[i] = vec_from<2>(c[i], "corner");
    const json& h = j.at("homography");
    if (!h.is_array() || h.size() != 3) throw InvalidInput("homography needs 3 rows");
    Eigen::Matrix3d H;
    for (std::size_t r = 0; r < 3; ++r) {
      H.row(static_cast<Eigen::Index>(r)) = vec_from<3>(h[r], "homography row").transpose();
    }
    d.homography = geometry::Homography(H);
    d.candidates_total = j.at("candidates_total").get<std::size_t>();
    d.candidates_scored = j.at("candidates_scored").get<std::size_t>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed detection: ") + e.what());
  }
  return d;
}

// ---------------------------------------------------------------------------
// Configuration

void apply(const json& j, recon::ReconstructionConfig& c) {
  check_keys(j,
             {"sigma_override", "anchor_height", "multistart_count", "max_iterations",
              "tolerance", "penalty", "loss_mode", "dt", "t_max", "seed"},
             "reconstruction");
  if (j.contains("sigma_override")) {
    if (j["sigma_override"].is_null()) {
      c.sigma_override.reset();
    } else {
      double s = 0.0;
      read_field(j, "sigma_override", s);
      c.sigma_override = s;
    }
  }
  read_field(j, "anchor_height", c.anchor_height);
  read_field(j, "multistart_count", c.multistart_count);
  read_field(j, "max_iterations", c.max_iterations);
  read_field(j, "tolerance", c.tolerance);
  if (j.contains("penalty")) {
    const json& p = j["penalty"];
    check_keys(p, {"initial_weight", "growth", "rounds"}, "penalty");
    read_field(p, "initial_weight", c.penalty.initial_weight);
    read_field(p, "growth", c.penalty.growth);
    read_field(p, "rounds", c.penalty.rounds);
  }
  if (j.contains("loss_mode")) {
    std::string m;
    read_field(j, "loss_mode", m);
    c.loss_mode = recon::loss_mode_from_string(m);
  }
  read_field(j, "dt", c.dt);
  read_field(j, "t_max", c.t_max);
  read_field(j, "seed", c.seed);
  c.validate();
}

json to_json(const recon::ReconstructionConfig& c) {
  json j;
  j["sigma_override"] = c.sigma_override ? json(*c.sigma_override) : json(nullptr);
  j["anchor_height"] = c.anchor_height;
  j["multistart_count"] = c.multistart_count;
  j["max_iterations"] = c.max_iterations;
  j["tolerance"] = c.tolerance;
  j["penalty"] = {{"initial_weight", c.penalty.initial_weight},
                  {"growth", c.penalty.growth},
                  {"rounds", c.penalty.rounds}};
  j["loss_mode"] = recon::to_string(c.loss_mode);
  j["dt"] = c.dt;
  j["t_max"] = c.t_max;
  j["seed"] = c.seed;
  return j;
}

namespace {

json camera_spec_json(const bench::CameraSpec& s) {
  return {{"id", s.id},         {"eye", vec_json(s.eye)},   {"target", vec_json(s.target)},
          {"focal_px", s.focal_px}, {"width", s.width},     {"height", s.height},
          {"roll_deg", s.roll_deg}};
}

bench::CameraSpec camera_spec_from(const json& j) {
  check_keys(j, {"id", "eye", "target", "focal_px", "width", "height", "roll_deg", "P"}, "camera");
  bench::CameraSpec s;
  read_field(j, "id", s.id);
  if (j.contains("eye")) s.eye = vec_from<3>(j["eye"], "eye");
  if (j.contains("target")) s.target = vec_from<3>(j["target"], "target");
  read_field(j, "focal_px", s.focal_px);
  read_field(j, "width", s.width);
  read_field(j, "height", s.height);
  read_field(j, "roll_deg", s.roll_deg);
  if (s.id.empty()) throw InvalidInput("camera id must not be empty");
  if (!(s.focal_px > 0.0) || s.width <= 0 || s.height <= 0) {
    throw InvalidInput("camera " + s.id + " needs positive focal length and size");
  }
  return s;
}

std::array<double, 3> triple_from(const json& j, const char* what) {
  const Eigen::Vector3d v = vec_from<3>(j, what);
  return {v.x(), v.y(), v.z()};
}

}  // namespace

void apply(const json& j, bench::DatasetConfig& c) {
  check_keys(j,
             {"fps", "cell", "region", "cell_stride", "all_quarters", "max_retries", "speed_min",
              "speed_max", "elevation_min_deg", "elevation_max_deg", "azimuth_half_width_deg",
              "cd_min", "cd_max", "net_height", "min_visible", "clip_to_image", "sim_dt",
              "t_max", "anchor_noise", "track_noise_px", "cameras", "seed", "threads"},
             "dataset");
  read_field(j, "fps", c.fps);
  if (j.contains("cell")) c.cell = triple_from(j["cell"], "cell");
  if (j.contains("region")) c.region = triple_from(j["region"], "region");
  read_field(j, "cell_stride", c.cell_stride);
  read_field(j, "all_quarters", c.all_quarters);
  read_field(j, "max_retries", c.max_retries);
  read_field(j, "speed_min", c.speed_min);
  read_field(j, "speed_max", c.speed_max);
  read_field(j, "elevation_min_deg", c.elevation_min_deg);
  read_field(j, "elevation_max_deg", c.elevation_max_deg);
  read_field(j, "azimuth_half_width_deg", c.azimuth_half_width_deg);
  read_field(j, "cd_min", c.cd_min);
  read_field(j, "cd_max", c.cd_max);
  read_field(j, "net_height", c.net_height);
  read_field(j, "min_visible", c.min_visible);
  read_field(j, "clip_to_image", c.clip_to_image);
  read_field(j, "sim_dt", c.sim_dt);
  read_field(j, "t_max", c.t_max);
  read_field(j, "anchor_noise", c.anchor_noise);
  read_field(j, "track_noise_px", c.track_noise_px);
  if (j.contains("cameras")) {
    if (!j["cameras"].is_array()) throw InvalidInput("cameras must be an array");
    c.cameras.clear();
    for (const auto& cam : j["cameras"]) c.cameras.push_back(camera_spec_from(cam));
  }
  read_field(j, "seed", c.seed);
  read_field(j, "threads", c.threads);
  c.validate();
}

json to_json(const bench::DatasetConfig& c) {
  json j;
  j["fps"] = c.fps;
  j["cell"] = c.cell;
  j["region"] = c.region;
  j["cell_stride"] = c.cell_stride;
  j["all_quarters"] = c.all_quarters;
  j["max_retries"] = c.max_retries;
  j["speed_min"] = c.speed_min;
  j["speed_max"] = c.speed_max;
  j["elevation_min_deg"] = c.elevation_min_deg;
  j["elevation_max_deg"] = c.elevation_max_deg;
  j["azimuth_half_width_deg"] = c.azimuth_half_width_deg;
  j["cd_min"] = c.cd_min;
  j["cd_max"] = c.cd_max;
  j["net_height"] = c.net_height;
  j["min_visible"] = c.min_visible;
  j["clip_to_image"] = c.clip_to_image;
  j["sim_dt"] = c.sim_dt;
  j["t_max"] = c.t_max;
  j["anchor_noise"] = c.anchor_noise;
  j["track_noise_px"] = c.track_noise_px;
  j["cameras"] = json::array();
  for (const auto& cam : c.cameras) j["cameras"].push_back(camera_spec_json(cam));
  j["seed"] = c.seed;
  // Thread count does not affect the output and is left out on purpose.
  return j;
}

void apply(const json& j, court::DetectionConfig& c) {
  check_keys(j, {"threshold", "hough", "fit", "method", "epsilon"}, "court detection");
  if (j.contains("threshold")) {
    const json& t = j["threshold"];
    check_keys(t, {"luminance", "chroma"}, "threshold");
    read_field(t, "luminance", c.threshold.luminance);
    read_field(t, "chroma", c.threshold.chroma);
  }
  if (j.contains("hough")) {
    const json& h = j["hough"];
    check_keys(h,
               {"rho_step", "theta_step_deg", "vote_fraction", "max_lines", "refine_band",
                "merge_rho", "merge_theta_deg"},
               "hough");
    read_field(h, "rho_step", c.hough.rho_step);
    read_field(h, "theta_step_deg", c.hough.theta_step_deg);
    read_field(h, "vote_fraction", c.hough.vote_fraction);
    read_field(h, "max_lines", c.hough.max_lines);
    read_field(h, "refine_band", c.hough.refine_band);
    read_field(h, "merge_rho", c.hough.merge_rho);
    read_field(h, "merge_theta_deg", c.hough.merge_theta_deg);
  }
  if (j.contains("fit")) {
    const json& f = j["fit"];
    check_keys(f,
               {"sample_spacing", "tolerance_px", "success_threshold", "min_area_fraction",
                "prune_small"},
               "fit");
    read_field(f, "sample_spacing", c.fit.sample_spacing);
    read_field(f, "tolerance_px", c.fit.tolerance_px);
    read_field(f, "success_threshold", c.fit.success_threshold);
    read_field(f, "min_area_fraction", c.fit.min_area_fraction);
    read_field(f, "prune_small", c.fit.prune_small);
  }
  if (j.contains("method")) {
    std::string m;
    read_field(j, "method", m);
    if (m == "graph") {
      c.method = court::PartitionMethod::graph;
    } else if (m == "farin") {
      c.method = court::PartitionMethod::farin;
    } else {
      throw InvalidInput("partition method must be 'graph' or 'farin'");
    }
  }
  read_field(j, "epsilon", c.epsilon);
  if (!(c.epsilon > 0.0)) throw InvalidInput("partition epsilon must be positive");
}

// ---------------------------------------------------------------------------
// Datasets

namespace {

std::string track_name(std::size_t i) {
  std::ostringstream ss;
  ss << "tracks/" << std::setw(6) << std::setfill('0') << i << ".csv";
  return ss.str();
}

}  // namespace

void save_dataset(const bench::Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir / "tracks");
  json config = to_json(dataset.config);
  json cams = json::array();
  for (const auto& spec : dataset.config.cameras) {
    json rows = json::array();
    const auto P = bench::look_at_camera(spec).matrix();
    for (int r = 0; r < 3; ++r) rows.push_back(vec_json(P.row(r)));
    cams.push_back({{"id", spec.id}, {"P", rows}});
  }
  json meta;
  meta["config"] = config;
  meta["camera_matrices"] = cams;
  meta["cells_total"] = dataset.cells_total;
  meta["empty_cells"] = dataset.empty_cells;
  meta["shots"] = dataset.shots.size();
  write_json(dir / "config.json", meta);

  auto out = open_out(dir / "manifest.jsonl");
  for (std::size_t i = 0; i < dataset.shots.size(); ++i) {
    const auto& s = dataset.shots[i];
    json j;
    j["index"] = i;
    j["cell"] = s.cell;
    j["quarter"] = s.quarter;
    j["camera"] = s.camera;
    j["camera_id"] = s.camera_id;
    j["ic"] = to_json(s.ic_true);
    j["receive_frame"] = s.receive_frame;
    j["flight_time"] = s.flight_time;
    j["landing"] = vec_json(s.landing);
    j["hit_true"] = vec_json(s.hit_true);
    j["receive_true"] = vec_json(s.receive_true);
    j["hit_noisy"] = vec_json(s.hit_noisy);
    j["receive_noisy"] = vec_json(s.receive_noisy);
    if (s.rally_index) j["rally_index"] = *s.rally_index;
    if (s.rally_length) j["rally_length"] = *s.rally_length;
    j["track"] = track_name(i);
    out << j.dump() << '\n';
    write_track(dir / track_name(i), s.track);
  }
}

bench::Dataset load_dataset(const fs::path& dir) {
  const json meta = read_json(dir / "config.json");
  bench::Dataset ds;
  try {
    apply(meta.at("config"), ds.config);
    ds.cells_total = meta.at("cells_total").get<std::size_t>();
    ds.empty_cells = meta.at("empty_cells").get<std::vector<std::size_t>>();
  } catch (const json::exception& e) {
    throw InvalidInput("malformed dataset config: " + std::string(e.what()));
  }

  const fs::path manifest = dir / "manifest.jsonl";
  std::ifstream in(manifest);
  if (!in) throw InvalidInput("cannot open " + manifest.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      bench::SyntheticShot s;
      s.cell = j.at("cell").get<std::size_t>();
      s.quarter = j.at("quarter").get<int>();
      s.camera = j.at("camera").get<std::size_t>();
      s.camera_id = j.at("camera_id").get<std::string>();
      if (s.camera >= ds.config.cameras.size()) throw InvalidInput("unknown camera index");
      s.ic_true = ic_from_json(j.at("ic"));
      s.receive_frame = j.at("receive_frame").get<int>();
      s.flight_time = j.at("flight_time").get<double>();
      s.landing = vec_from<3>(j.at("landing"), "landing");
      s.hit_true = vec_from<3>(j.at("hit_true"), "hit_true");
      s.receive_true = vec_from<3>(j.at("receive_true"), "receive_true");
      s.hit_noisy = vec_from<3>(j.at("hit_noisy"), "hit_noisy");
      s.receive_noisy = vec_from<3>(j.at("receive_noisy"), "receive_noisy");
      if (j.contains("rally_index")) s.rally_index = j["rally_index"].get<int>();
      if (j.contains("rally_length")) s.rally_length = j["rally_length"].get<int>();
      s.track = read_track(dir / j.at("track").get<std::string>(), ds.config.fps);
      s.path_true =
          bench::truth_path(s.ic_true, ds.config.fps, s.receive_frame, ds.config.sim_dt);
      ds.shots.push_back(std::move(s));
    } catch (const json::exception& e) {
      fail(manifest, n, e.what());
    } catch (const InvalidInput& e) {
      fail(manifest, n, e.what());
    }
  }
  return ds;
}

void write_results(const fs::path& path, const std::vector<bench::ShotResult>& results) {
  auto out = open_out(path);
  for (const auto& r : results) {
    json j;
    j["shot"] = r.shot;
    j["ok"] = r.ok;
    j["ic"] = to_json(r.ic);
    j["dt"] = r.dt;
    j["loss"] = r.ok ? json(r.loss) : json(nullptr);
    j["converged"] = r.converged;
    if (!r.message.empty()) j["message"] = r.message;
    out << j.dump() << '\n';
  }
}

std::vector<bench::ShotResult> read_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<bench::ShotResult> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      bench::ShotResult r;
      r.shot = j.at("shot").get<std::size_t>();
      r.ok = j.at("ok").get<bool>();
      r.ic = ic_from_json(j.at("ic"));
      r.dt = j.at("dt").get<double>();
      r.loss = j.at("loss").is_null() ? std::numeric_limits<double>::infinity()
                                      : j.at("loss").get<double>();
      r.converged = j.at("converged").get<bool>();
      if (j.contains("message")) r.message = j["message"].get<std::string>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(path, n, e.what());
    } catch (const InvalidInput& e) {
      fail(path, n, e.what());
    }
  }
  return out;
}

}  // namespace shuttle3d::io
