#pragma once

// World and court conventions, the metric court model, camera calibration,
// the court-plane homography and player localisation.
//
// World frame: origin at the near-left court corner, x across the court width
// [0, 6.1], y along the court length [0, 13.4], z up. The net plane is y = 6.7.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace shuttle3d::geometry {

using WorldPoint = Eigen::Vector3d;
using ImagePoint = Eigen::Vector2d;
/// (x, y) metres on the court plane z = 0.
using CourtPoint = Eigen::Vector2d;
using Matrix34 = Eigen::Matrix<double, 3, 4>;

inline constexpr double kCourtWidth = 6.1;
inline constexpr double kCourtLength = 13.4;
inline constexpr double kNetY = 6.7;
inline constexpr double kDefaultPoleHeight = 1.55;
inline constexpr double kDefaultAnchorHeight = 2.0;
inline constexpr double kDefaultRelaxation = 0.5;

enum class Player { near, far, unknown };

const char* to_string(Player p);
/// Parses "near" / "far" / "unknown"; throws InvalidInput otherwise.
Player player_from_string(std::string_view s);
Player opponent(Player p);

struct Segment {
  WorldPoint a;
  WorldPoint b;
};

/// Painted lines of a badminton court plus the two net pole tips.
///
/// Corner order everywhere in the library: near-left, near-right, far-left,
/// far-right, i.e. (0,0), (6.1,0), (0,13.4), (6.1,13.4).
struct CourtModel {
  std::vector<Segment> lines;
  std::array<WorldPoint, 2> pole_tips;
  std::array<WorldPoint, 4> corners;

  /// 4 corners followed by the 2 pole tips, the DLT reference set.
  std::array<WorldPoint, 6> reference_points() const;
};

CourtModel standard_court_model(double pole_height = kDefaultPoleHeight);

/// 3x4 projective camera. Stored exactly as given; projection is invariant to
/// the overall scale.
class CameraModel {
 public:
  /// Throws InvalidInput for non-finite entries or rank < 3.
  explicit CameraModel(const Matrix34& P);

  const Matrix34& matrix() const { return P_; }

  /// Unit Frobenius norm, sign chosen so that points in front of the camera
  /// have positive homogeneous scale.
  CameraModel normalized() const;

  /// Signed depth up to a positive factor: > 0 in front of the camera.
  double depth_sign(const WorldPoint& p) const;

  /// Throws NumericalError when the homogeneous scale vanishes.
  ImagePoint project(const WorldPoint& p) const;

 private:
  Matrix34 P_;
};

inline ImagePoint project(const CameraModel& camera, const WorldPoint& p) {
  return camera.project(p);
}

struct Correspondence {
  WorldPoint world;
  ImagePoint image;
};

/// Normalised DLT from >= 6 non-coplanar correspondences. The result has unit
/// Frobenius norm. Throws InvalidInput for < 6 points and DegenerateGeometry
/// when the linear system is rank deficient.
CameraModel calibrate_dlt(std::span<const Correspondence> correspondences);

/// Image to court-plane mapping.
class Homography {
 public:
  Homography() : H_(Eigen::Matrix3d::Identity()) {}
  explicit Homography(const Eigen::Matrix3d& H);

  const Eigen::Matrix3d& matrix() const { return H_; }
  Homography inverse() const;
  /// Throws NumericalError for points mapped to infinity.
  Eigen::Vector2d apply(const Eigen::Vector2d& p) const;

 private:
  Eigen::Matrix3d H_;
};

/// Least-squares homography (exact for 4 points) mapping `from` onto `to`.
Homography estimate_homography(std::span<const Eigen::Vector2d> from,
                               std::span<const Eigen::Vector2d> to);

/// Homography taking the 4 image corners onto the model's outer corners.
/// Throws DegenerateGeometry when any three corners are collinear.
Homography homography_from_corners(const std::array<ImagePoint, 4>& image_corners,
                                   const CourtModel& model);

inline CourtPoint image_to_court(const Homography& h, const ImagePoint& p) {
  return h.apply(p);
}

/// Foot candidates of one frame.
struct FrameCandidates {
  int frame = 0;
  std::vector<ImagePoint> feet;
};

struct PlayerAnchors {
  /// Sorted by frame.
  std::vector<FrameCandidates> candidates;
  std::map<int, CourtPoint> near;
  std::map<int, CourtPoint> far;

  std::optional<CourtPoint> position(Player side, int frame) const;
};

/// Resolves near and far players per frame from the foot candidates.
///
/// Candidates whose court position lies inside the court expanded by
/// `relaxation` are kept. Kept candidates on the near half (y <= 6.7) yield the
/// near player (smallest y), those on the far half the far player (largest y).
/// A side without a kept candidate falls back to the candidate nearest to
/// that side's last resolved position, restricted to the side's relaxed half.
PlayerAnchors assign_players(const PlayerAnchors& anchors, const Homography& h,
                             double relaxation = kDefaultRelaxation);

inline WorldPoint anchor_3d(const CourtPoint& court_pos,
                            double anchor_height = kDefaultAnchorHeight) {
  return {court_pos.x(), court_pos.y(), anchor_height};
}

inline bool inside_court(const CourtPoint& p, double margin = 0.0) {
  return p.x() >= -margin && p.x() <= kCourtWidth + margin && p.y() >= -margin &&
         p.y() <= kCourtLength + margin;
}

}  // namespace shuttle3d::geometry
