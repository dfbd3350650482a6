#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "shuttle3d/errors.hpp"
#include "shuttle3d/hit_segmentation.hpp"

namespace {

using namespace shuttle3d;
using namespace shuttle3d::hits;

ScoreSequence background(int frames, double fps) {
  ScoreSequence s;
  s.fps = fps;
  s.scores.assign(frames, FrameScores{1, 0, 0});
  return s;
}

ScoreSequence random_scores(std::mt19937_64& rng, int max_frames = 60) {
  ScoreSequence s;
  s.fps = std::uniform_int_distribution<int>(1, 12)(rng);
  // One-frame spacing makes the exhaustive oracle exponential; keep it short.
  const int cap = s.fps <= 2 ? std::min(max_frames, 40) : max_frames;
  const int F = std::uniform_int_distribution<int>(1, cap)(rng);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < F; ++i) s.scores.push_back({u(rng), u(rng), u(rng)});
  return s;
}

TEST(Tau, Examples) {
  auto s = background(10, 10);
  s.scores[4] = {0, 1, 0};
  EXPECT_DOUBLE_EQ(tau(s), 0.05);
  EXPECT_EQ(tau(background(7, 3)), 0.0);
  ScoreSequence c;
  c.scores.assign(9, FrameScores{0, 0.4, 0.6});
  EXPECT_DOUBLE_EQ(tau(c), 0.5);
}

TEST(Budget, SpacingAndCount) {
  EXPECT_EQ(min_hit_spacing(10), 5);
  EXPECT_EQ(min_hit_spacing(25), 13);
  EXPECT_EQ(min_hit_spacing(1), 1);
  EXPECT_EQ(hit_budget(10, 10), 1);
  EXPECT_EQ(hit_budget(11, 10), 2);
  EXPECT_EQ(hit_budget(5, 30), 1);
  EXPECT_EQ(hit_budget(90, 30), 3);
}

TEST(OptimizeHits, SinglePeak) {
  auto s = background(10, 10);
  s.scores[4] = {0, 1, 0};
  const auto r = optimize_hits(s);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0], (Hit{4, Player::near}));
  EXPECT_DOUBLE_EQ(r.objective, 0.95);
  EXPECT_EQ(r.objective, oracle::best_hit_objective(s));
}

TEST(OptimizeHits, AlternationForbidsSamePlayerPair) {
  auto s = background(20, 10);
  s.scores[2] = {0, 1, 0};
  s.scores[8] = {0, 1, 0};
  const auto r = optimize_hits(s);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0], (Hit{2, Player::near}));
  EXPECT_DOUBLE_EQ(tau(s), 0.05);
  EXPECT_DOUBLE_EQ(r.objective, 0.95);
  EXPECT_EQ(r.objective, oracle::best_hit_objective(s));
}

TEST(OptimizeHits, NoHitScores) {
  const auto r = optimize_hits(background(50, 25));
  EXPECT_TRUE(r.hits.empty());
  EXPECT_EQ(r.objective, 0.0);
}

TEST(OptimizeHits, TieBreaksTowardsNear) {
  auto s = background(10, 10);
  s.scores[3] = {0, 1, 1};
  const auto r = optimize_hits(s);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0], (Hit{3, Player::near}));
}

TEST(OptimizeHits, FirstFrameOffset) {
  auto s = background(10, 10);
  s.first_frame = 100;
  s.scores[4] = {0, 0, 1};
  const auto r = optimize_hits(s);
  ASSERT_EQ(r.hits.size(), 1u);
  EXPECT_EQ(r.hits[0], (Hit{104, Player::far}));
}

TEST(OptimizeHits, MatchesExhaustiveSearch) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_scores(rng);
    const auto r = optimize_hits(s);
    ASSERT_TRUE(satisfies_constraints(s, r.hits));
    EXPECT_EQ(r.objective, oracle::best_hit_objective(s))
        << "F=" << s.size() << " fps=" << s.fps;
    EXPECT_EQ(r.objective, hit_objective(s, r.hits, tau(s)));
  }
}

TEST(OptimizeHits, FeasibleOnPeakyInputs) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    ScoreSequence s;
    s.fps = std::uniform_real_distribution<double>(5, 60)(rng);
    const int F = std::uniform_int_distribution<int>(1, 400)(rng);
    for (int i = 0; i < F; ++i) {
      const double p = u(rng);
      s.scores.push_back(p < 0.05 ? FrameScores{0.1, u(rng), u(rng)} : FrameScores{1, 0.01, 0.01});
    }
    EXPECT_TRUE(satisfies_constraints(s, optimize_hits(s).hits));
  }
}

// Drops hits until the naive output satisfies every constraint.
HitList make_feasible(const ScoreSequence& s, HitList h) {
  HitList out;
  for (const auto& x : h)
    if (out.empty() || (x.player != out.back().player &&
                        x.frame - out.back().frame >= min_hit_spacing(s.fps)))
      out.push_back(x);
  out.resize(std::min<std::size_t>(out.size(), hit_budget(s.size(), s.fps)));
  return out;
}

TEST(OptimizeHits, DominatesNaive) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const auto s = random_scores(rng);
    const auto naive = make_feasible(s, naive_postprocess(s));
    ASSERT_TRUE(satisfies_constraints(s, naive));
    EXPECT_GE(optimize_hits(s).objective, hit_objective(s, naive, tau(s)));
  }
}

TEST(OptimizeHits, ScoreScaling) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scores(rng);
    const auto base = optimize_hits(s);
    for (double c : {0.25, 2.0, 8.0}) {
      auto scaled = s;
      for (auto& f : scaled.scores) {
        f.no_hit *= c;
        f.near *= c;
        f.far *= c;
      }
      const auto r = optimize_hits(scaled);
      EXPECT_EQ(r.hits, base.hits);
      EXPECT_DOUBLE_EQ(tau(scaled), c * tau(s));
      EXPECT_NEAR(r.objective, c * base.objective, 1e-12 * (1 + std::abs(c * base.objective)));
    }
  }
}

TEST(NaivePostprocess, EarlierHitKept) {
  auto s = background(20, 10);
  s.scores[3] = {0, 1, 0};
  s.scores[6] = {0, 0, 1};
  const auto h = naive_postprocess(s);
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0], (Hit{3, Player::near}));
}

TEST(NaivePostprocess, SingleAndRepeatedPlayer) {
  auto s = background(30, 10);
  s.scores[12] = {0, 0, 1};
  EXPECT_EQ(naive_postprocess(s), (HitList{{12, Player::far}}));
  s.scores[2] = {0, 0, 1};
  const auto h = naive_postprocess(s);
  // Two far hits in a row survive; the optimiser would not allow it.
  EXPECT_EQ(h, (HitList{{2, Player::far}, {12, Player::far}}));
  EXPECT_FALSE(satisfies_constraints(s, h));
  EXPECT_TRUE(satisfies_constraints(s, optimize_hits(s).hits));
}

recon::ShuttleTrack track_from(const std::vector<double>& u, double fps = 10) {
  recon::ShuttleTrack t;
  t.fps = fps;
  for (std::size_t i = 0; i < u.size(); ++i)
    t.entries.push_back({static_cast<int>(i), u[i], 300.0 + 2.0 * i, true});
  return t;
}

TEST(DerivativeBaseline, StraightLine) {
  std::vector<double> u;
  for (int i = 0; i < 40; ++i) u.push_back(5.0 + 3.0 * i);
  for (double th : {0.01, 1.0, 10.0}) EXPECT_TRUE(derivative_baseline(track_from(u), th).empty());
}

TEST(DerivativeBaseline, SingleReversal) {
  for (int k : {5, 13, 27}) {
    std::vector<double> u;
    for (int i = 0; i < 40; ++i) u.push_back(i <= k ? 4.0 * i : 8.0 * k - 4.0 * i);
    const auto h = derivative_baseline(track_from(u), 1.0);
    ASSERT_EQ(h.size(), 1u);
    EXPECT_EQ(h[0].frame, k);
    EXPECT_EQ(h[0].player, geometry::Player::unknown);
  }
}

TEST(DerivativeBaseline, PlayerFromHomography) {
  std::vector<double> u;
  for (int i = 0; i < 20; ++i) u.push_back(i <= 8 ? 1.0 * i : 16.0 - 1.0 * i);
  auto t = track_from(u);
  for (auto& e : t.entries) e.v = 10.0;  // court y = 10 under the identity map
  const auto h = derivative_baseline(t, 0.5, geometry::Homography{});
  ASSERT_EQ(h.size(), 1u);
  EXPECT_EQ(h[0].player, geometry::Player::far);
}

TEST(DerivativeBaseline, GapsAreNotBridged) {
  auto t = track_from({0, 1, 2, 3, 50, 51, 52, 53});
  t.entries[4].visible = false;
  // The jump sits next to the hidden frame, so no run sees it.
  EXPECT_TRUE(derivative_baseline(t, 1.0).empty());
  auto short_runs = track_from({0, 1, 0, 1, 0});
  short_runs.entries[2].visible = false;
  EXPECT_THROW(derivative_baseline(short_runs, 1.0), InvalidInput);
}

TEST(DerivativeBaseline, TuningPicksBestThreshold) {
  std::vector<LabeledTrack> labeled;
  for (int k : {8, 15, 22}) {
    std::vector<double> u;
    for (int i = 0; i < 40; ++i) u.push_back(i <= k ? 3.0 * i : 6.0 * k - 3.0 * i);
    // Mild wobble that a too-low threshold would report.
    for (int i = 30; i < 40; i += 2) u[i] += 0.4;
    labeled.push_back({track_from(u), {{k, geometry::Player::near}}});
  }
  const auto r = tune_derivative_threshold(labeled, {0.1, 1.0, 2.0, 10.0});
  EXPECT_EQ(r.threshold, 1.0);
  EXPECT_DOUBLE_EQ(r.mean_accuracy, 1.0);
}

TEST(HitMetrics, WorkedExample) {
  const HitList g{{10, Player::near}, {55, Player::far}};
  const HitList p{{10, Player::near}, {55, Player::near}};
  const auto m = hit_metrics(g, p, 0);
  EXPECT_EQ(m.matched, 1u);
  EXPECT_DOUBLE_EQ(m.accuracy, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(m.recall, 0.5);
  EXPECT_DOUBLE_EQ(m.precision, 0.5);
  EXPECT_DOUBLE_EQ(m.f1, 0.5);
}

TEST(HitMetrics, EmptySetConventions) {
  const HitList g{{10, Player::near}};
  const auto same = hit_metrics(g, g);
  EXPECT_EQ(same.accuracy, 1.0);
  EXPECT_EQ(same.recall, 1.0);
  EXPECT_EQ(same.precision, 1.0);
  EXPECT_EQ(same.f1, 1.0);
  const auto none = hit_metrics(g, {});
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.accuracy, 0.0);
  EXPECT_EQ(none.precision, 1.0);
  EXPECT_EQ(none.f1, 0.0);
  const auto extra = hit_metrics({}, g);
  EXPECT_EQ(extra.recall, 1.0);
  EXPECT_EQ(extra.precision, 0.0);
}

TEST(HitMetrics, Tolerance) {
  const HitList g{{10, Player::near}, {40, Player::far}};
  const HitList p{{12, Player::near}, {39, Player::far}};
  EXPECT_EQ(hit_metrics(g, p, 0).matched, 0u);
  EXPECT_EQ(hit_metrics(g, p, 1).matched, 1u);
  EXPECT_EQ(hit_metrics(g, p, 2).matched, 2u);
  EXPECT_THROW(hit_metrics(g, p, -1), InvalidInput);
}

TEST(HitMetrics, Algebra) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> n(0, 8), frame(0, 60), who(0, 1), tol(0, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    HitList g, p;
    for (int i = n(rng); i > 0; --i) g.push_back({frame(rng), who(rng) ? Player::near : Player::far});
    for (int i = n(rng); i > 0; --i) p.push_back({frame(rng), who(rng) ? Player::near : Player::far});
    const auto m = hit_metrics(g, p, tol(rng));
    const double matched = static_cast<double>(m.matched);
    if (!g.empty()) EXPECT_NEAR(m.recall * g.size(), matched, 1e-12);
    if (!p.empty()) EXPECT_NEAR(m.precision * p.size(), matched, 1e-12);
    EXPECT_LE(m.accuracy, std::min(m.recall, m.precision) + 1e-12);
    EXPECT_LE(m.matched, std::min(g.size(), p.size()));
  }
}

TEST(ScoreSequence, Validation) {
  ScoreSequence s;
  EXPECT_THROW(optimize_hits(s), InvalidInput);
  s = background(5, 10);
  s.scores[2].near = -0.1;
  EXPECT_THROW(optimize_hits(s), InvalidInput);
  s = background(5, 0);
  EXPECT_THROW(naive_postprocess(s), InvalidInput);
}

}  // namespace
