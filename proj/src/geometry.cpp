#include "shuttle3d/geometry.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "shuttle3d/errors.hpp"

namespace shuttle3d::geometry {

const char* to_string(Player p) {
  switch (p) {
    case Player::near:
      return "near";
    case Player::far:
      return "far";
    case Player::unknown:
      return "unknown";
  }
  return "unknown";
}

Player player_from_string(std::string_view s) {
  if (s == "near") return Player::near;
  if (s == "far") return Player::far;
  if (s == "unknown") return Player::unknown;
  throw InvalidInput("unknown player label '" + std::string(s) + "'");
}

Player opponent(Player p) {
  switch (p) {
    case Player::near:
      return Player::far;
    case Player::far:
      return Player::near;
    case Player::unknown:
      break;
  }
  return Player::unknown;
}

std::array<WorldPoint, 6> CourtModel::reference_points() const {
  return {corners[0], corners[1], corners[2], corners[3], pole_tips[0], pole_tips[1]};
}

CourtModel standard_court_model(double pole_height) {
  if (!(pole_height > 0.0)) throw InvalidInput("pole height must be positive");

  constexpr double W = kCourtWidth;
  constexpr double L = kCourtLength;
  constexpr double kSinglesInset = 0.46;
  constexpr double kShortService = 1.98;  // from the net
  constexpr double kLongServiceInset = 0.76;
  constexpr double kCentreX = W / 2.0;

  auto across = [=](double y) { return Segment{WorldPoint(0.0, y, 0.0), WorldPoint(W, y, 0.0)}; };
  auto along = [](double x, double y0, double y1) {
    return Segment{WorldPoint(x, y0, 0.0), WorldPoint(x, y1, 0.0)};
  };

  CourtModel model;
  model.lines = {
      across(0.0),
      across(L),
      across(kLongServiceInset),
      across(L - kLongServiceInset),
      across(kNetY - kShortService),
      across(kNetY + kShortService),
      along(0.0, 0.0, L),
      along(W, 0.0, L),
      along(kSinglesInset, 0.0, L),
      along(W - kSinglesInset, 0.0, L),
      along(kCentreX, 0.0, kNetY - kShortService),
      along(kCentreX, kNetY + kShortService, L),
  };
  model.pole_tips = {WorldPoint{0.0, kNetY, pole_height}, WorldPoint{W, kNetY, pole_height}};
  model.corners = {WorldPoint{0.0, 0.0, 0.0}, WorldPoint{W, 0.0, 0.0}, WorldPoint{0.0, L, 0.0},
                   WorldPoint{W, L, 0.0}};
  return model;
}

// ---------------------------------------------------------------------------
// CameraModel

CameraModel::CameraModel(const Matrix34& P) : P_(P) {
  if (!P_.allFinite()) throw InvalidInput("camera matrix has non-finite entries");
  Eigen::JacobiSVD<Matrix34> svd(P_);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(2) <= 1e-12 * s(0)) {
    throw InvalidInput("camera matrix must have rank 3");
  }
}

CameraModel CameraModel::normalized() const {
  Matrix34 P = P_ / P_.norm();
  if (P.leftCols<3>().determinant() < 0.0) P = -P;
  return CameraModel(P);
}

double CameraModel::depth_sign(const WorldPoint& p) const {
  const double w = P_.row(2).head<3>().dot(p) + P_(2, 3);
  const double det = P_.leftCols<3>().determinant();
  return det < 0.0 ? -w : w;
}

ImagePoint CameraModel::project(const WorldPoint& p) const {
  const Eigen::Vector3d h = P_.leftCols<3>() * p + P_.col(3);
  const double scale = P_.row(2).norm() * (1.0 + p.norm());
  if (!(std::abs(h.z()) > 1e-14 * scale)) {
    throw NumericalError("point projects to infinity");
  }
  return {h.x() / h.z(), h.y() / h.z()};
}

// ---------------------------------------------------------------------------
// DLT

namespace {

// Similarity moving the centroid to the origin with RMS distance sqrt(dim).
template <int Dim>
Eigen::Matrix<double, Dim + 1, Dim + 1> isotropic_normalization(
    std::span<const Eigen::Matrix<double, Dim, 1>> pts) {
  Eigen::Matrix<double, Dim, 1> centroid = Eigen::Matrix<double, Dim, 1>::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double sq = 0.0;
  for (const auto& p : pts) sq += (p - centroid).squaredNorm();
  const double rms = std::sqrt(sq / static_cast<double>(pts.size()));
  const double s = rms > 0.0 ? std::sqrt(static_cast<double>(Dim)) / rms : 1.0;

  Eigen::Matrix<double, Dim + 1, Dim + 1> T = Eigen::Matrix<double, Dim + 1, Dim + 1>::Identity();
  T.template topLeftCorner<Dim, Dim>() *= s;
  T.template topRightCorner<Dim, 1>() = -s * centroid;
  return T;
}

bool nearly_collinear(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                      const Eigen::Vector2d& c) {
  const Eigen::Vector2d ab = b - a;
  const Eigen::Vector2d ac = c - a;
  const double cross = ab.x() * ac.y() - ab.y() * ac.x();
  return std::abs(cross) <= 1e-9 * ab.norm() * ac.norm();
}

}  // namespace

CameraModel calibrate_dlt(std::span<const Correspondence> correspondences) {
  const std::size_t n = correspondences.size();
  if (n < 6) {
    throw InvalidInput("DLT needs at least 6 correspondences, got " + std::to_string(n));
  }

  std::vector<Eigen::Vector3d> world(n);
  std::vector<Eigen::Vector2d> image(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!correspondences[i].world.allFinite() || !correspondences[i].image.allFinite()) {
      throw InvalidInput("non-finite correspondence");
    }
    world[i] = correspondences[i].world;
    image[i] = correspondences[i].image;
  }
  const Eigen::Matrix4d Tw = isotropic_normalization<3>(std::span<const Eigen::Vector3d>(world));
  const Eigen::Matrix3d Ti = isotropic_normalization<2>(std::span<const Eigen::Vector2d>(image));

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), 12);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector4d X = Tw * world[i].homogeneous();
    const Eigen::Vector3d x = Ti * image[i].homogeneous();
    const auto r = static_cast<Eigen::Index>(2 * i);
    A.block<1, 4>(r, 0) = X.transpose();
    A.block<1, 4>(r, 8) = -x.x() * X.transpose();
    A.block<1, 4>(r + 1, 4) = X.transpose();
    A.block<1, 4>(r + 1, 8) = -x.y() * X.transpose();
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  const Eigen::VectorXd& s = svd.singularValues();
  // 12 unknowns up to scale: the solution space must be one-dimensional.
  if (s(10) <= 1e-9 * s(0)) {
    throw DegenerateGeometry("DLT system is rank deficient (coplanar or repeated points?)");
  }
  const Eigen::VectorXd p = svd.matrixV().col(11);
  Matrix34 Pn;
  Pn << p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7), p(8), p(9), p(10), p(11);

  const Matrix34 P = Ti.inverse() * Pn * Tw;
  try {
    return CameraModel(P).normalized();
  } catch (const InvalidInput& e) {
    throw DegenerateGeometry(std::string("DLT produced an invalid camera: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Homography

Homography::Homography(const Eigen::Matrix3d& H) : H_(H) {
  if (!H_.allFinite()) throw InvalidInput("homography has non-finite entries");
  const double norm = H_.norm();
  if (!(norm > 0.0) || std::abs(H_.determinant()) <= 1e-14 * norm * norm * norm) {
    throw DegenerateGeometry("homography is singular");
  }
  if (std::abs(H_(2, 2)) > 1e-12 * norm) {
    H_ /= H_(2, 2);
  } else {
    H_ /= norm;
  }
}

Homography Homography::inverse() const { return Homography(H_.inverse()); }

Eigen::Vector2d Homography::apply(const Eigen::Vector2d& p) const {
  const Eigen::Vector3d h = H_ * p.homogeneous();
  const double scale = H_.row(2).norm() * (1.0 + p.norm());
  if (!(std::abs(h.z()) > 1e-14 * scale)) {
    throw NumericalError("point maps to infinity under the homography");
  }
  return h.hnormalized();
}

Homography estimate_homography(std::span<const Eigen::Vector2d> from,
                               std::span<const Eigen::Vector2d> to) {
  if (from.size() != to.size() || from.size() < 4) {
    throw InvalidInput("homography needs at least 4 point pairs");
  }
  const std::size_t n = from.size();
  const Eigen::Matrix3d Tf = isotropic_normalization<2>(from);
  const Eigen::Matrix3d Tt = isotropic_normalization<2>(to);

  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(2 * n), 9);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d X = Tf * from[i].homogeneous();
    const Eigen::Vector3d x = Tt * to[i].homogeneous();
    const auto r = static_cast<Eigen::Index>(2 * i);
    A.block<1, 3>(r, 0) = X.transpose();
    A.block<1, 3>(r, 6) = -x.x() * X.transpose();
    A.block<1, 3>(r + 1, 3) = X.transpose();
    A.block<1, 3>(r + 1, 6) = -x.y() * X.transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  if (svd.singularValues()(7) <= 1e-10 * svd.singularValues()(0)) {
    throw DegenerateGeometry("homography system is rank deficient");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d Hn;
  Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  return Homography(Tt.inverse() * Hn * Tf);
}

Homography homography_from_corners(const std::array<ImagePoint, 4>& image_corners,
                                   const CourtModel& model) {
  for (const auto& c : image_corners) {
    if (!c.allFinite()) throw InvalidInput("non-finite court corner");
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      for (int k = j + 1; k < 4; ++k) {
        if (nearly_collinear(image_corners[i], image_corners[j], image_corners[k])) {
          throw DegenerateGeometry("three court corners are collinear");
        }
      }
    }
  }
  std::array<Eigen::Vector2d, 4> court;
  for (int i = 0; i < 4; ++i) court[i] = model.corners[i].head<2>();
  return estimate_homography(image_corners, court);
}

// ---------------------------------------------------------------------------
// Players

std::optional<CourtPoint> PlayerAnchors::position(Player side, int frame) const {
  const auto& m = side == Player::near ? near : far;
  if (side == Player::unknown) return std::nullopt;
  if (auto it = m.find(frame); it != m.end()) return it->second;
  return std::nullopt;
}

PlayerAnchors assign_players(const PlayerAnchors& anchors, const Homography& h,
                             double relaxation) {
  PlayerAnchors out;
  out.candidates = anchors.candidates;

  std::optional<CourtPoint> last_near;
  std::optional<CourtPoint> last_far;

  for (const auto& fc : anchors.candidates) {
    std::vector<CourtPoint> positions;
    positions.reserve(fc.feet.size());
    for (const auto& foot : fc.feet) {
      try {
        positions.push_back(h.apply(foot));
      } catch (const NumericalError&) {
        positions.emplace_back(std::numeric_limits<double>::quiet_NaN(),
                               std::numeric_limits<double>::quiet_NaN());
      }
    }

    std::optional<std::size_t> near_idx;
    std::optional<std::size_t> far_idx;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const CourtPoint& p = positions[i];
      if (!p.allFinite() || !inside_court(p, relaxation)) continue;
      if (p.y() <= kNetY) {
        if (!near_idx || p.y() < positions[*near_idx].y()) near_idx = i;
      } else {
        if (!far_idx || p.y() > positions[*far_idx].y()) far_idx = i;
      }
    }

    auto nearest_to = [&](const CourtPoint& last, auto&& on_side,
                          std::optional<std::size_t> taken) -> std::optional<std::size_t> {
      std::optional<std::size_t> best;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < positions.size(); ++i) {
        if (taken && *taken == i) continue;
        const CourtPoint& p = positions[i];
        if (!p.allFinite() || !on_side(p)) continue;
        const double d = (p - last).norm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      return best;
    };

    if (!near_idx && last_near) {
      near_idx = nearest_to(
          *last_near, [&](const CourtPoint& p) { return p.y() <= kNetY + relaxation; }, far_idx);
    }
    if (!far_idx && last_far) {
      far_idx = nearest_to(
          *last_far, [&](const CourtPoint& p) { return p.y() >= kNetY - relaxation; }, near_idx);
    }
    if (near_idx && far_idx && positions[*near_idx].y() > positions[*far_idx].y()) {
      // Only reachable through the fallback; keep the in-court assignment.
      const bool near_in = inside_court(positions[*near_idx], relaxation) &&
                           positions[*near_idx].y() <= kNetY;
      if (near_in) {
        far_idx.reset();
      } else {
        near_idx.reset();
      }
    }

    if (near_idx) {
      last_near = positions[*near_idx];
      out.near[fc.frame] = *last_near;
    }
    if (far_idx) {
      last_far = positions[*far_idx];
      out.far[fc.frame] = *last_far;
    }
  }
  return out;
}

}  // namespace shuttle3d::geometry
