// shuttle3d command-line front end.
//
// Exit codes: 0 success (including "no court found"), 2 invalid input or
// usage, 3 numerical / degenerate geometry failure.

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shuttle3d/benchmark.hpp"
#include "shuttle3d/court_detection.hpp"
#include "shuttle3d/errors.hpp"
#include "shuttle3d/geometry.hpp"
#include "shuttle3d/hit_segmentation.hpp"
#include "shuttle3d/image.hpp"
#include "shuttle3d/io.hpp"
#include "shuttle3d/physics.hpp"
#include "shuttle3d/random.hpp"
#include "shuttle3d/reconstruction.hpp"

namespace {

using namespace shuttle3d;
namespace fs = std::filesystem;
using io::json;

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<double> fps;
  int threads = 0;
};

Eigen::Vector3d parse_vec3(const std::string& text, const char* name) {
  std::stringstream ss(text);
  std::string part;
  std::vector<double> v;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidInput(std::string("--") + name + " must be three comma-separated numbers");
    }
  }
  if (v.size() != 3) throw InvalidInput(std::string("--") + name + " needs exactly 3 values");
  return {v[0], v[1], v[2]};
}

json config_section(const Common& c, const char* key) {
  if (c.config_path.empty()) return json::object();
  const json j = io::read_json(c.config_path);
  if (!j.is_object()) throw InvalidInput("--config must hold a JSON object");
  for (const auto& [k, v] : j.items()) {
    static const char* known[] = {"reconstruction", "dataset", "court", "players", "evaluation"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return k == s; }) ==
        std::end(known)) {
      throw InvalidInput("unknown section '" + k + "' in --config");
    }
  }
  return j.contains(key) ? j[key] : json::object();
}

double fps_or(const Common& c, double fallback) {
  const double fps = c.fps.value_or(fallback);
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidInput("--fps must be positive");
  return fps;
}

recon::ReconstructionConfig reconstruction_config(const Common& c) {
  recon::ReconstructionConfig rc;
  io::apply(config_section(c, "reconstruction"), rc);
  if (c.seed) rc.seed = *c.seed;
  return rc;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string x0;
  std::string v0;
  double cd = physics::kDefaultDragCoefficient;
  double duration = 1.0;
  double dt = 1e-3;
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  physics::InitialConditions ic;
  ic.x0 = parse_vec3(a.x0, "x0");
  ic.v0 = parse_vec3(a.v0, "v0");
  ic.cd = a.cd;
  ic.validate();
  if (!(a.duration > 0.0)) throw InvalidInput("--duration must be positive");
  const auto path = physics::integrate(ic, a.duration, a.dt);
  if (a.out.empty() || a.out == "-") {
    std::cout << "t,x,y,z\n";
    for (const auto& s : path.samples) {
      std::cout << io::format_number(s.t) << ',' << io::format_number(s.pos.x()) << ','
                << io::format_number(s.pos.y()) << ',' << io::format_number(s.pos.z()) << '\n';
    }
  } else {
    io::write_trajectory(a.out, path);
  }
  return 0;
}

struct CalibrateArgs {
  std::string corners;
  std::string out;
  double pole_height = geometry::kDefaultPoleHeight;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const auto ann = io::read_annotation(a.corners);
  const auto model = geometry::standard_court_model(a.pole_height);
  const auto refs = model.reference_points();
  std::vector<geometry::Correspondence> pairs;
  for (std::size_t i = 0; i < 4; ++i) pairs.push_back({refs[i], ann.corners[i]});
  for (std::size_t i = 0; i < 2; ++i) pairs.push_back({refs[4 + i], ann.poles[i]});
  const auto camera = geometry::calibrate_dlt(pairs);
  io::write_camera(a.out, camera);
  return 0;
}

struct DetectArgs {
  std::string image;
  std::string out;
  std::string baseline;
};

int cmd_detect_court(const Common& c, const DetectArgs& a) {
  court::DetectionConfig cfg;
  io::apply(config_section(c, "court"), cfg);
  if (!a.baseline.empty()) {
    if (a.baseline != "farin") throw InvalidInput("--baseline accepts only 'farin'");
    cfg.method = court::PartitionMethod::farin;
  }
  const auto img = court::read_ppm(a.image);
  const auto det = court::detect_court(img, geometry::standard_court_model(), cfg);
  json j = io::detection_json(det);
  j["method"] = cfg.method == court::PartitionMethod::graph ? "graph" : "farin";
  io::write_json(a.out, j);
  return 0;
}

struct SegmentArgs {
  std::string scores;
  std::string out;
  std::string method = "dp";
};

int cmd_segment_hits(const Common& c, const SegmentArgs& a) {
  const auto scores = io::read_scores(a.scores, fps_or(c, 30.0));
  hits::HitList out;
  if (a.method == "dp") {
    out = hits::optimize_hits(scores).hits;
  } else if (a.method == "naive") {
    out = hits::naive_postprocess(scores);
  } else {
    throw InvalidInput("--method must be 'dp' or 'naive'");
  }
  io::write_hits(a.out, out);
  return 0;
}

struct ReconstructArgs {
  std::string track;
  std::string hits;
  std::string keypoints;
  std::string camera;
  std::string corners;
  std::string out;
  std::optional<int> rally_end;
};

int cmd_reconstruct(const Common& c, const ReconstructArgs& a) {
  const double fps = fps_or(c, 30.0);
  auto rc = reconstruction_config(c);
  double relaxation = geometry::kDefaultRelaxation;
  const json players = config_section(c, "players");
  if (players.contains("relaxation")) relaxation = players["relaxation"].get<double>();

  const auto camera = io::read_camera(a.camera);
  const auto ann = io::read_annotation(a.corners);
  const auto model = geometry::standard_court_model();
  const auto h = geometry::homography_from_corners(ann.corners, model);
  const auto anchors = geometry::assign_players(io::read_keypoints(a.keypoints), h, relaxation);
  const auto hit_list = io::read_hits(a.hits);
  const auto track = io::read_track(a.track, fps);
  const auto shots = recon::shots_from_hits(hit_list, track, anchors, rc, a.rally_end);

  fs::create_directories(a.out);
  json summary = json::array();
  for (std::size_t j = 0; j < shots.size(); ++j) {
    const auto& s = shots[j];
    std::optional<recon::ReconstructionResult> result;
    std::string error;
    if (s.shot) {
      recon::ReconstructionConfig cfg = rc;
      cfg.seed = stream_seed(rc.seed, j);
      try {
        result = recon::reconstruct_shot(camera, *s.shot, cfg);
      } catch (const Error& e) {
        error = e.what();
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "shot_%03zu", j);
    const json doc = io::shot_result_json(s, result ? &*result : nullptr, error);
    io::write_json(fs::path(a.out) / (std::string(name) + ".json"), doc);
    if (result) {
      io::write_trajectory(fs::path(a.out) / (std::string(name) + "_trajectory.csv"),
                           result->path);
    }
    summary.push_back({{"shot", j},
                       {"file", std::string(name) + ".json"},
                       {"ok", doc["ok"]},
                       {"hit_frame", s.hit_frame},
                       {"receive_frame", s.receive_frame}});
  }
  io::write_json(fs::path(a.out) / "shots.json", summary);
  return 0;
}

struct GenArgs {
  std::string out;
  std::optional<int> stride;
};

int cmd_gen_dataset(const Common& c, const GenArgs& a) {
  bench::DatasetConfig cfg;
  io::apply(config_section(c, "dataset"), cfg);
  if (c.seed) cfg.seed = *c.seed;
  if (c.fps) cfg.fps = fps_or(c, cfg.fps);
  if (a.stride) cfg.cell_stride = *a.stride;
  cfg.threads = c.threads;
  cfg.validate();
  const auto ds = bench::generate_dataset(cfg);
  io::save_dataset(ds, a.out);
  std::cerr << "generated " << ds.shots.size() << " shots from " << ds.cells_total << " cells ("
            << ds.empty_cells.size() << " empty)\n";
  return 0;
}

struct ReconDatasetArgs {
  std::string dataset;
  std::string out;
  std::string loss = "full";
  std::size_t limit = 0;
  std::string anchors = "noisy";
};

int cmd_reconstruct_dataset(const Common& c, const ReconDatasetArgs& a) {
  auto rc = reconstruction_config(c);
  rc.loss_mode = recon::loss_mode_from_string(a.loss);
  if (a.anchors != "noisy" && a.anchors != "true") {
    throw InvalidInput("--anchors must be 'noisy' or 'true'");
  }
  const auto ds = io::load_dataset(a.dataset);
  const auto results =
      bench::reconstruct_dataset(ds, rc, a.anchors == "noisy", c.threads, a.limit);
  fs::create_directories(a.out);
  io::write_results(fs::path(a.out) / "results.jsonl", results);
  json meta;
  meta["reconstruction"] = io::to_json(rc);
  meta["anchors"] = a.anchors;
  meta["shots"] = results.size();
  io::write_json(fs::path(a.out) / "run.json", meta);
  return 0;
}

struct EvaluateArgs {
  std::string dataset;
  std::string results;
  std::string out;
};

int cmd_evaluate(const Common& c, const EvaluateArgs& a) {
  bench::EvalConfig cfg;
  const json e = config_section(c, "evaluation");
  if (e.contains("bin_width")) cfg.bin_width = e["bin_width"].get<double>();
  if (e.contains("exclude_rally_ends")) cfg.exclude_rally_ends = e["exclude_rally_ends"].get<bool>();
  const auto ds = io::load_dataset(a.dataset);
  fs::path results = a.results;
  if (fs::is_directory(results)) results /= "results.jsonl";
  const auto report = bench::evaluate(ds, io::read_results(results), cfg);
  bench::write_report(report, a.out);
  return 0;
}

void add_common(CLI::App* sub, Common& c, bool fps, bool seed, bool threads) {
  sub->add_option("--config", c.config_path, "JSON file overriding module defaults")
      ->check(CLI::ExistingFile);
  if (fps) sub->add_option("--fps", c.fps, "Frame rate (frames per second)");
  if (seed) sub->add_option("--seed", c.seed, "64-bit random seed");
  if (threads) sub->add_option("--threads", c.threads, "Worker threads (0 = auto)")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monocular 3D shuttlecock trajectory reconstruction"};
  app.require_subcommand(1);
  Common common;

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "Integrate a flight and write t,x,y,z");
  s_sim->add_option("--x0", sim.x0, "Launch position x,y,z")->required();
  s_sim->add_option("--v0", sim.v0, "Launch velocity vx,vy,vz")->required();
  s_sim->add_option("--cd", sim.cd, "Drag coefficient");
  s_sim->add_option("--duration", sim.duration, "Seconds to simulate");
  s_sim->add_option("--dt", sim.dt, "Integration step");
  s_sim->add_option("--out,-o", sim.out, "Output CSV (stdout when omitted)");
  add_common(s_sim, common, false, false, false);

  CalibrateArgs cal;
  auto* s_cal = app.add_subcommand("calibrate", "Camera matrix from court corners and pole tips");
  s_cal->add_option("--corners", cal.corners, "Annotation JSON")->required();
  s_cal->add_option("--out,-o", cal.out, "Camera JSON")->required();
  s_cal->add_option("--pole-height", cal.pole_height, "Net pole height in metres");
  add_common(s_cal, common, false, false, false);

  DetectArgs det;
  auto* s_det = app.add_subcommand("detect-court", "Detect the court in a PPM image");
  s_det->add_option("--image", det.image, "Binary PPM (P6)")->required();
  s_det->add_option("--out,-o", det.out, "Detection JSON")->required();
  s_det->add_option("--baseline", det.baseline, "Use the fixed slope-band partition ('farin')");
  add_common(s_det, common, false, false, false);

  SegmentArgs seg;
  auto* s_seg = app.add_subcommand("segment-hits", "Hit frames from per-frame scores");
  s_seg->add_option("--scores", seg.scores, "Scores CSV")->required();
  s_seg->add_option("--out,-o", seg.out, "Hits CSV")->required();
  s_seg->add_option("--method", seg.method, "dp or naive");
  add_common(s_seg, common, true, false, false);

  ReconstructArgs rec;
  auto* s_rec = app.add_subcommand("reconstruct", "Reconstruct every shot of a rally");
  s_rec->add_option("--track", rec.track, "Track CSV")->required();
  s_rec->add_option("--hits", rec.hits, "Hits CSV")->required();
  s_rec->add_option("--keypoints", rec.keypoints, "Keypoints CSV")->required();
  s_rec->add_option("--camera", rec.camera, "Camera JSON")->required();
  s_rec->add_option("--corners", rec.corners, "Court annotation JSON")->required();
  s_rec->add_option("--out,-o", rec.out, "Output directory")->required();
  s_rec->add_option("--rally-end", rec.rally_end, "Frame closing the last shot");
  add_common(s_rec, common, true, true, false);

  GenArgs gen;
  auto* s_gen = app.add_subcommand("gen-dataset", "Generate the synthetic benchmark");
  s_gen->add_option("--out,-o", gen.out, "Output directory")->required();
  s_gen->add_option("--stride", gen.stride, "Use every k-th grid cell");
  add_common(s_gen, common, true, true, true);

  ReconDatasetArgs rds;
  auto* s_rds = app.add_subcommand("reconstruct-dataset", "Reconstruct a synthetic dataset");
  s_rds->add_option("--dataset", rds.dataset, "Dataset directory")->required();
  s_rds->add_option("--out,-o", rds.out, "Results directory")->required();
  s_rds->add_option("--loss", rds.loss, "full or reprojection-only");
  s_rds->add_option("--limit", rds.limit, "Only the first N shots");
  s_rds->add_option("--anchors", rds.anchors, "noisy or true");
  add_common(s_rds, common, false, true, true);

  EvaluateArgs ev;
  auto* s_ev = app.add_subcommand("evaluate", "Zone and flight-time error reports");
  s_ev->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  s_ev->add_option("--results", ev.results, "Results directory or results.jsonl")->required();
  s_ev->add_option("--out,-o", ev.out, "Report directory")->required();
  add_common(s_ev, common, false, false, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*s_sim) return cmd_simulate(sim);
    if (*s_cal) return cmd_calibrate(cal);
    if (*s_det) return cmd_detect_court(common, det);
    if (*s_seg) return cmd_segment_hits(common, seg);
    if (*s_rec) return cmd_reconstruct(common, rec);
    if (*s_gen) return cmd_gen_dataset(common, gen);
    if (*s_rds) return cmd_reconstruct_dataset(common, rds);
    if (*s_ev) return cmd_evaluate(common, ev);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const io::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
