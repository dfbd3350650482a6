#pragma once

// File formats. Readers throw InvalidInput naming the file and, for row
// formats, the offending line. Numbers are written in shortest round-trip
// form, so write-then-read reproduces the in-memory values exactly.

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shuttle3d/benchmark.hpp"
#include "shuttle3d/court_detection.hpp"
#include "shuttle3d/geometry.hpp"
#include "shuttle3d/hit_segmentation.hpp"
#include "shuttle3d/physics.hpp"
#include "shuttle3d/reconstruction.hpp"

namespace shuttle3d::io {

namespace fs = std::filesystem;
using nlohmann::json;

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

// --- court annotation / camera --------------------------------------------

struct CourtAnnotation {
  std::array<geometry::ImagePoint, 4> corners{};
  std::array<geometry::ImagePoint, 2> poles{};
};

CourtAnnotation read_annotation(const fs::path& path);
void write_annotation(const fs::path& path, const CourtAnnotation& a);

geometry::CameraModel read_camera(const fs::path& path);
void write_camera(const fs::path& path, const geometry::CameraModel& camera);

// --- row formats -----------------------------------------------------------

/// `frame,pose_id,foot_u,foot_v`; candidates grouped by frame, sorted.
geometry::PlayerAnchors read_keypoints(const fs::path& path);
void write_keypoints(const fs::path& path, const geometry::PlayerAnchors& anchors);

/// `t,x,y,z` with header.
physics::FlightPath read_trajectory(const fs::path& path);
void write_trajectory(const fs::path& path, const physics::FlightPath& path_data);

/// `frame,u,v,visible`.
recon::ShuttleTrack read_track(const fs::path& path, double fps);
void write_track(const fs::path& path, const recon::ShuttleTrack& track);

/// `frame,s1,s2,s3` with consecutive frames.
hits::ScoreSequence read_scores(const fs::path& path, double fps);
void write_scores(const fs::path& path, const hits::ScoreSequence& scores);

/// `frame,player`.
hits::HitList read_hits(const fs::path& path);
void write_hits(const fs::path& path, const hits::HitList& hits);

// --- JSON documents ----------------------------------------------------------

json to_json(const physics::InitialConditions& ic);
physics::InitialConditions ic_from_json(const json& j);

json shot_result_json(const recon::ShotAssembly& assembly,
                      const recon::ReconstructionResult* result, const std::string& error);

json detection_json(const court::CourtDetection& d);
court::CourtDetection detection_from_json(const json& j);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

// --- configuration overrides ----------------------------------------------
// Each applies the keys present in `j` and rejects unknown keys.

void apply(const json& j, recon::ReconstructionConfig& config);
void apply(const json& j, bench::DatasetConfig& config);
void apply(const json& j, court::DetectionConfig& config);
json to_json(const bench::DatasetConfig& config);
json to_json(const recon::ReconstructionConfig& config);

// --- datasets and batch results ---------------------------------------------

/// config.json, manifest.jsonl and tracks/NNNNNN.csv under `dir`.
void save_dataset(const bench::Dataset& dataset, const fs::path& dir);
bench::Dataset load_dataset(const fs::path& dir);

void write_results(const fs::path& path, const std::vector<bench::ShotResult>& results);
std::vector<bench::ShotResult> read_results(const fs::path& path);

}  // namespace shuttle3d::io
