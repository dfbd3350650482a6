#pragma once

// Single-frame court detection: white-pixel thresholding, Hough lines, a
// horizontal/vertical split of the lines and a combinatorial search for the
// outer court rectangle.

#include <array>
#include <cstddef>
#include <vector>

#include "shuttle3d/geometry.hpp"
#include "shuttle3d/image.hpp"

namespace shuttle3d::court {

using geometry::CourtModel;
using geometry::Homography;
using geometry::ImagePoint;

struct ThresholdConfig {
  int luminance = 180;
  int chroma = 40;
};

/// 1 where min(R,G,B) >= luminance and max - min <= chroma, else 0.
GrayImage threshold_white(const RgbImage& img, const ThresholdConfig& config = {});

/// Line x cos(theta) + y sin(theta) = rho, theta in [0, pi).
struct DetectedLine {
  double rho = 0.0;
  double theta = 0.0;
  int support = 0;

  /// Direction angle of the line itself in [0, pi).
  double direction() const;
};

struct HoughConfig {
  double rho_step = 1.0;    // pixels
  double theta_step_deg = 1.0;
  /// Vote threshold as a fraction of the image diagonal.
  double vote_fraction = 0.25;
  int max_lines = 40;
  /// Half-width of the band of pixels used to refine each peak.
  double refine_band = 2.0;
  /// Peaks closer than this to a stronger line are dropped after refinement.
  double merge_rho = 4.0;
  double merge_theta_deg = 2.0;
};

std::vector<DetectedLine> hough_lines(const GrayImage& mask, const HoughConfig& config = {});

struct LinePartition {
  std::vector<DetectedLine> horizontal;
  std::vector<DetectedLine> vertical;
  /// Lines no rule assigned (Farin bands only).
  std::vector<DetectedLine> discarded;
};

inline constexpr double kDefaultPartitionEpsilon = 1e-2;

/// Angle between two lines folded into [0, pi/2].
double line_angle(const DetectedLine& a, const DetectedLine& b);

/// (|angle(a, b) - pi/2| + eps)^-2
double partition_weight(const DetectedLine& a, const DetectedLine& b,
                        double eps = kDefaultPartitionEpsilon);

/// Sum of weights across the two sides; `side[i]` is 0 or 1.
double cut_weight(const std::vector<DetectedLine>& lines, const std::vector<int>& side,
                  double eps = kDefaultPartitionEpsilon);

/// Greedy max-weight bipartition: seeded with the heaviest edge, lines
/// inserted by decreasing total weight, then local search over single moves
/// and one-for-one exchanges. The best two-arc split of the line orientations
/// is searched the same way and kept when its cut is larger. Returns the side
/// of every line.
std::vector<int> greedy_bipartition(const std::vector<DetectedLine>& lines,
                                    double eps = kDefaultPartitionEpsilon);

/// Graph-based split; the part holding the most nearly image-horizontal line
/// becomes L_H. Throws InvalidInput for fewer than 2 lines.
LinePartition partition_lines(const std::vector<DetectedLine>& lines,
                              double eps = kDefaultPartitionEpsilon);

/// Fixed slope bands: |slope| <= 25 deg horizontal, 60..120 deg vertical.
LinePartition farin_partition(const std::vector<DetectedLine>& lines);

struct FitConfig {
  double sample_spacing = 2.0;
  double tolerance_px = 2.0;
  double success_threshold = 0.7;
  /// Skip corner quadrilaterals smaller than this fraction of the image.
  double min_area_fraction = 0.05;
  bool prune_small = true;
};

struct CourtDetection {
  std::array<ImagePoint, 4> corners{};
  Homography homography;  // image -> court plane
  double score = 0.0;
  bool success = false;
  std::size_t candidates_total = 0;
  std::size_t candidates_scored = 0;
};

/// Intersection of two lines; non-finite when parallel.
ImagePoint intersect(const DetectedLine& a, const DetectedLine& b);

/// Exhaustive search over pairs of horizontals x pairs of verticals for the
/// outer court rectangle, scored by mask coverage of all projected model lines.
/// Throws InvalidInput with fewer than 2 lines per side and DegenerateGeometry
/// when no candidate can be scored.
CourtDetection fit_court(const LinePartition& partition, const CourtModel& model,
                         const GrayImage& mask, const FitConfig& config = {});

enum class PartitionMethod { graph, farin };

struct DetectionConfig {
  ThresholdConfig threshold;
  HoughConfig hough;
  FitConfig fit;
  PartitionMethod method = PartitionMethod::graph;
  double epsilon = kDefaultPartitionEpsilon;
};

/// Full pipeline; reports success = false instead of throwing when no court
/// can be fitted.
CourtDetection detect_court(const RgbImage& img, const CourtModel& model,
                            const DetectionConfig& config = {});

/// IoU of two court quadrilaterals given in corner order. Throws InvalidInput
/// for self-intersecting quadrilaterals.
double detection_iou(const std::array<ImagePoint, 4>& detected,
                     const std::array<ImagePoint, 4>& truth);

struct RenderStyle {
  Rgb background{40, 110, 60};
  Rgb line{245, 245, 245};
  double line_width = 3.0;
};

/// Draws the court lines as seen by `camera`.
RgbImage render_court(const geometry::CameraModel& camera, const CourtModel& model, int width,
                      int height, const RenderStyle& style = {});

/// Image positions of the model's outer corners.
std::array<ImagePoint, 4> project_corners(const geometry::CameraModel& camera,
                                          const CourtModel& model);

}  // namespace shuttle3d::court
