#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Geometry>

#include "shuttle3d/errors.hpp"
#include "shuttle3d/geometry.hpp"

namespace {

using namespace shuttle3d;
using namespace shuttle3d::geometry;

// K [R | -R c] with the camera centre behind the near baseline, looking at the
// court centre. Built here rather than through the benchmark helpers.
Matrix34 synthetic_camera(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(-4, 10), uy(-20, -6), uz(2, 12), uf(600, 2500),
      ut(-2, 2);
  const Eigen::Vector3d c{ux(rng), uy(rng), uz(rng)};
  const Eigen::Vector3d target{3.05 + ut(rng), 6.7 + ut(rng), 0.5 * ut(rng)};
  const Eigen::Vector3d f = (target - c).normalized();
  const Eigen::Vector3d r = f.cross(Eigen::Vector3d::UnitZ()).normalized();
  const Eigen::Vector3d d = f.cross(r);
  Eigen::Matrix3d R;
  R.row(0) = r;
  R.row(1) = d;
  R.row(2) = f;
  const double focal = uf(rng);
  Eigen::Matrix3d K;
  K << focal, 0.0, 960 + 50 * ut(rng), 0.0, focal, 540 + 50 * ut(rng), 0.0, 0.0, 1.0;
  Matrix34 Rt;
  Rt.leftCols<3>() = R;
  Rt.col(3) = -R * c;
  return K * Rt;
}

ImagePoint pinhole(const Matrix34& P, const WorldPoint& p) {
  const Eigen::Vector3d h = P * p.homogeneous();
  return {h.x() / h.z(), h.y() / h.z()};
}

std::vector<Correspondence> reference_correspondences(const Matrix34& P) {
  std::vector<Correspondence> out;
  for (const auto& q : standard_court_model().reference_points())
    out.push_back({q, pinhole(P, q)});
  return out;
}

TEST(CourtModel, CornersAndPoles) {
  const auto m = standard_court_model(1.55);
  EXPECT_EQ(m.corners[0], WorldPoint(0, 0, 0));
  EXPECT_EQ(m.corners[1], WorldPoint(6.1, 0, 0));
  EXPECT_EQ(m.corners[2], WorldPoint(0, 13.4, 0));
  EXPECT_EQ(m.corners[3], WorldPoint(6.1, 13.4, 0));
  EXPECT_EQ(m.pole_tips[0], WorldPoint(0, 6.7, 1.55));
  EXPECT_EQ(m.pole_tips[1], WorldPoint(6.1, 6.7, 1.55));
  const auto refs = m.reference_points();
  EXPECT_EQ(refs[3], m.corners[3]);
  EXPECT_EQ(refs[5], m.pole_tips[1]);
}

TEST(CourtModel, PoleHeightFollowsArgument) {
  for (double h : {0.5, 1.55, 2.0}) {
    const auto m = standard_court_model(h);
    EXPECT_EQ(m.pole_tips[0].z(), h);
    EXPECT_EQ(m.pole_tips[1].z(), h);
  }
  EXPECT_THROW(standard_court_model(0.0), InvalidInput);
}

TEST(CourtModel, QuarterCourt) {
  EXPECT_DOUBLE_EQ(kCourtWidth / 2, 3.05);
  EXPECT_DOUBLE_EQ(kCourtLength / 2, 6.7);
  EXPECT_DOUBLE_EQ(kNetY, 6.7);
}

bool has_line(const CourtModel& m, const WorldPoint& a, const WorldPoint& b) {
  return std::any_of(m.lines.begin(), m.lines.end(), [&](const Segment& s) {
    return ((s.a - a).norm() < 1e-9 && (s.b - b).norm() < 1e-9) ||
           ((s.a - b).norm() < 1e-9 && (s.b - a).norm() < 1e-9);
  });
}

TEST(CourtModel, ContainsPaintedLines) {
  const auto m = standard_court_model();
  EXPECT_TRUE(has_line(m, {0, 0, 0}, {6.1, 0, 0}));
  EXPECT_TRUE(has_line(m, {0, 13.4, 0}, {6.1, 13.4, 0}));
  EXPECT_TRUE(has_line(m, {0, 0, 0}, {0, 13.4, 0}));
  EXPECT_TRUE(has_line(m, {0.46, 0, 0}, {0.46, 13.4, 0}));
  EXPECT_TRUE(has_line(m, {5.64, 0, 0}, {5.64, 13.4, 0}));
  EXPECT_TRUE(has_line(m, {0, 4.72, 0}, {6.1, 4.72, 0}));
  EXPECT_TRUE(has_line(m, {0, 8.68, 0}, {6.1, 8.68, 0}));
  EXPECT_TRUE(has_line(m, {0, 0.76, 0}, {6.1, 0.76, 0}));
  EXPECT_TRUE(has_line(m, {0, 12.64, 0}, {6.1, 12.64, 0}));
  EXPECT_TRUE(has_line(m, {3.05, 0, 0}, {3.05, 4.72, 0}));
  EXPECT_TRUE(has_line(m, {3.05, 8.68, 0}, {3.05, 13.4, 0}));
}

TEST(CourtModel, PointSymmetric) {
  const auto m = standard_court_model();
  for (const auto& s : m.lines) {
    const WorldPoint a{6.1 - s.a.x(), 13.4 - s.a.y(), 0};
    const WorldPoint b{6.1 - s.b.x(), 13.4 - s.b.y(), 0};
    EXPECT_TRUE(has_line(m, a, b)) << s.a.transpose() << " -> " << s.b.transpose();
  }
}

TEST(Project, CanonicalCamera) {
  Matrix34 P = Matrix34::Zero();
  P.leftCols<3>().setIdentity();
  const CameraModel cam(P);
  const auto q = project(cam, {1, 2, 4});
  EXPECT_DOUBLE_EQ(q.x(), 0.25);
  EXPECT_DOUBLE_EQ(q.y(), 0.5);
}

TEST(Project, ScaleInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> uc(-5, 5);
  for (int i = 0; i < 20; ++i) {
    const Matrix34 P = synthetic_camera(rng);
    const double c = uc(rng);
    if (std::abs(c) < 1e-3) continue;
    const CameraModel a(P), b(c * P);
    for (const auto& q : standard_court_model().reference_points())
      EXPECT_LT((a.project(q) - b.project(q)).norm(), 1e-9);
  }
}

TEST(Project, PointAtInfinity) {
  Matrix34 P = Matrix34::Zero();
  P.leftCols<3>().setIdentity();
  EXPECT_THROW(CameraModel(P).project({1, 2, 0}), NumericalError);
}

TEST(CameraModel, RejectsRankDeficient) {
  Matrix34 P = Matrix34::Zero();
  P(0, 0) = 1;
  P(1, 1) = 1;
  EXPECT_THROW(CameraModel{P}, InvalidInput);
}

TEST(CameraModel, NormalizedHasPositiveDepth) {
  std::mt19937_64 rng(2);
  const Matrix34 P = synthetic_camera(rng);
  const auto n = CameraModel(-3.0 * P).normalized();
  EXPECT_NEAR(n.matrix().norm(), 1.0, 1e-12);
  EXPECT_GT(n.depth_sign({3.05, 6.7, 0}), 0.0);
}

TEST(Dlt, RecoversSyntheticCameraUpToScale) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const Matrix34 P = synthetic_camera(rng);
    const auto corr = reference_correspondences(P);
    const auto cam = calibrate_dlt(corr);
    const Matrix34& Q = cam.matrix();
    const double c = (P.cwiseProduct(Q)).sum() / Q.squaredNorm();
    const double rel = (c * Q - P).cwiseAbs().maxCoeff() / P.cwiseAbs().maxCoeff();
    EXPECT_LT(rel, 1e-8);
    for (const auto& k : corr) EXPECT_LT((cam.project(k.world) - k.image).norm(), 1e-6);
  }
}

TEST(Dlt, ManyPoints) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ux(0, 6.1), uy(0, 13.4), uz(0, 3);
  const Matrix34 P = synthetic_camera(rng);
  std::vector<Correspondence> corr;
  for (int i = 0; i < 30; ++i) {
    const WorldPoint q{ux(rng), uy(rng), uz(rng)};
    corr.push_back({q, pinhole(P, q)});
  }
  const auto cam = calibrate_dlt(corr);
  for (int i = 0; i < 50; ++i) {
    const WorldPoint q{ux(rng), uy(rng), uz(rng)};
    EXPECT_LT((cam.project(q) - pinhole(P, q)).norm(), 1e-6);
  }
}

TEST(Dlt, Preconditions) {
  std::mt19937_64 rng(4);
  const Matrix34 P = synthetic_camera(rng);
  auto corr = reference_correspondences(P);
  corr.pop_back();
  EXPECT_THROW(calibrate_dlt(corr), InvalidInput);

  // Coplanar: all on the ground.
  std::vector<Correspondence> flat;
  for (double x : {0.0, 2.0, 6.1})
    for (double y : {0.0, 6.7, 13.4}) flat.push_back({{x, y, 0}, pinhole(P, {x, y, 0})});
  EXPECT_THROW(calibrate_dlt(flat), DegenerateGeometry);
}

TEST(Homography, IdentityCorners) {
  const auto m = standard_court_model();
  std::array<ImagePoint, 4> img;
  for (int i = 0; i < 4; ++i) img[i] = m.corners[i].head<2>();
  const auto h = homography_from_corners(img, m);
  const Eigen::Matrix3d H = h.matrix() / h.matrix()(2, 2);
  EXPECT_LT((H - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Homography, InterpolatesCorners) {
  std::mt19937_64 rng(5);
  const auto m = standard_court_model();
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix34 P = synthetic_camera(rng);
    std::array<ImagePoint, 4> img;
    for (int i = 0; i < 4; ++i) img[i] = pinhole(P, m.corners[i]);
    const auto h = homography_from_corners(img, m);
    for (int i = 0; i < 4; ++i)
      EXPECT_LT((image_to_court(h, img[i]) - m.corners[i].head<2>()).norm(), 1e-9 * 13.4);
  }
}

TEST(Homography, RecoversGroundPlaneRestriction) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ux(-1, 7), uy(-1, 14);
  const auto m = standard_court_model();
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix34 P = synthetic_camera(rng);
    Eigen::Matrix3d G;  // court plane -> image
    G << P.col(0), P.col(1), P.col(3);
    const Eigen::Matrix3d truth = G.inverse();
    std::array<ImagePoint, 4> img;
    for (int i = 0; i < 4; ++i) img[i] = pinhole(P, m.corners[i]);
    const auto h = homography_from_corners(img, m);
    const Eigen::Matrix3d A = truth / truth.norm();
    Eigen::Matrix3d B = h.matrix() / h.matrix().norm();
    if ((A - B).norm() > (A + B).norm()) B = -B;
    EXPECT_LT((A - B).cwiseAbs().maxCoeff(), 1e-8);

    for (int i = 0; i < 20; ++i) {
      const WorldPoint q{ux(rng), uy(rng), 0};
      EXPECT_LT((image_to_court(h, pinhole(P, q)) - q.head<2>()).norm(), 1e-8);
    }
    const auto mid = image_to_court(h, pinhole(P, {3.05, 0, 0}));
    EXPECT_NEAR(mid.x(), 3.05, 1e-8);
    EXPECT_NEAR(mid.y(), 0.0, 1e-8);
  }
}

TEST(Homography, CollinearCornersRejected) {
  const auto m = standard_court_model();
  std::array<ImagePoint, 4> img{ImagePoint{0, 0}, ImagePoint{1, 1}, ImagePoint{2, 2},
                                ImagePoint{0, 5}};
  EXPECT_THROW(homography_from_corners(img, m), DegenerateGeometry);
}

TEST(Homography, InverseRoundTrip) {
  Eigen::Matrix3d H;
  H << 1.2, 0.1, 3, -0.2, 0.9, 1, 1e-3, 2e-3, 1;
  const Homography h(H);
  const Eigen::Vector2d p{12.0, -7.5};
  EXPECT_LT((h.inverse().apply(h.apply(p)) - p).norm(), 1e-10);
}

PlayerAnchors frames(std::vector<std::vector<ImagePoint>> per_frame) {
  PlayerAnchors a;
  for (std::size_t i = 0; i < per_frame.size(); ++i)
    a.candidates.push_back({static_cast<int>(i), per_frame[i]});
  return a;
}

TEST(AssignPlayers, NearAndFarBySide) {
  const auto r = assign_players(frames({{{3, 11}, {3, 2}}}), Homography{});
  ASSERT_TRUE(r.position(Player::near, 0));
  ASSERT_TRUE(r.position(Player::far, 0));
  EXPECT_EQ(*r.position(Player::near, 0), CourtPoint(3, 2));
  EXPECT_EQ(*r.position(Player::far, 0), CourtPoint(3, 11));
}

TEST(AssignPlayers, RelaxedBoundary) {
  const auto r = assign_players(frames({{{3, -0.2}}}), Homography{}, 0.5);
  ASSERT_TRUE(r.position(Player::near, 0));
  EXPECT_EQ(*r.position(Player::near, 0), CourtPoint(3, -0.2));
  const auto strict = assign_players(frames({{{3, -0.2}}}), Homography{}, 0.0);
  EXPECT_FALSE(strict.position(Player::near, 0));
}

TEST(AssignPlayers, FallsBackToNearestToLast) {
  const std::vector<ImagePoint> off{{7, 10.1}, {8, 12}};
  const auto r = assign_players(frames({{{3, 2}, {3, 10}}, {{3, 2}, off[0], off[1]}}),
                                Homography{});
  ASSERT_TRUE(r.position(Player::far, 1));
  // Exhaustive nearest-to-(3, 10).
  const auto best = *std::min_element(off.begin(), off.end(), [](auto& a, auto& b) {
    return (a - CourtPoint(3, 10)).norm() < (b - CourtPoint(3, 10)).norm();
  });
  EXPECT_EQ(*r.position(Player::far, 1), best);
  EXPECT_EQ(best, CourtPoint(7, 10.1));
}

TEST(AssignPlayers, UnresolvedWithoutHistory) {
  const auto r = assign_players(frames({{{9, 12}}, {}}), Homography{});
  EXPECT_FALSE(r.position(Player::far, 0));
  EXPECT_FALSE(r.position(Player::near, 0));
  EXPECT_FALSE(r.position(Player::near, 1));
}

TEST(AssignPlayers, NearNeverBeyondFar) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ux(-2, 8), uy(-2, 15.4);
  std::uniform_int_distribution<int> un(0, 4);
  std::vector<std::vector<ImagePoint>> per_frame(300);
  for (auto& f : per_frame) {
    const int n = un(rng);
    for (int i = 0; i < n; ++i) f.push_back({ux(rng), uy(rng)});
  }
  const auto r = assign_players(frames(per_frame), Homography{});
  for (const auto& [frame, near] : r.near) {
    EXPECT_LE(near.y(), kNetY + kDefaultRelaxation);
    const auto far = r.position(Player::far, frame);
    if (far) EXPECT_LE(near.y(), far->y());
  }
  for (const auto& [frame, far] : r.far) EXPECT_GE(far.y(), kNetY - kDefaultRelaxation);
}

TEST(AssignPlayers, ThroughHomography) {
  std::mt19937_64 rng(12);
  const auto m = standard_court_model();
  const Matrix34 P = synthetic_camera(rng);
  std::array<ImagePoint, 4> img;
  for (int i = 0; i < 4; ++i) img[i] = pinhole(P, m.corners[i]);
  const auto h = homography_from_corners(img, m);
  const auto r = assign_players(frames({{pinhole(P, {1, 12, 0}), pinhole(P, {4, 1.5, 0})}}), h);
  EXPECT_LT((*r.position(Player::near, 0) - CourtPoint(4, 1.5)).norm(), 1e-8);
  EXPECT_LT((*r.position(Player::far, 0) - CourtPoint(1, 12)).norm(), 1e-8);
}

TEST(Anchor3d, Height) {
  EXPECT_EQ(anchor_3d({3.0, 2.0}, 2.0), WorldPoint(3, 2, 2));
  EXPECT_EQ(anchor_3d({0, 0}, 0.0), WorldPoint(0, 0, 0));
  EXPECT_EQ(anchor_3d({1, 5}).z(), 2.0);
}

TEST(Player, Strings) {
  EXPECT_EQ(player_from_string("near"), Player::near);
  EXPECT_EQ(player_from_string("far"), Player::far);
  EXPECT_STREQ(to_string(Player::far), "far");
  EXPECT_EQ(opponent(Player::near), Player::far);
  EXPECT_THROW(player_from_string("middle"), InvalidInput);
}

}  // namespace
