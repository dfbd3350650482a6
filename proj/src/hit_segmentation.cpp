#include "shuttle3d/hit_segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "shuttle3d/errors.hpp"

namespace shuttle3d::hits {

void ScoreSequence::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidInput("fps must be positive");
  if (scores.empty()) throw InvalidInput("score sequence is empty");
  for (const auto& s : scores) {
    if (!(s.no_hit >= 0.0) || !(s.near >= 0.0) || !(s.far >= 0.0) || !std::isfinite(s.no_hit) ||
        !std::isfinite(s.near) || !std::isfinite(s.far)) {
      throw InvalidInput("scores must be finite and non-negative");
    }
  }
}

int min_hit_spacing(double fps) { return std::max(1, static_cast<int>(std::ceil(fps / 2.0))); }

int hit_budget(std::size_t frames, double fps) {
  return static_cast<int>(std::ceil(static_cast<double>(frames) / fps - 1e-12));
}

double tau(const ScoreSequence& scores) {
  if (scores.scores.empty()) throw InvalidInput("score sequence is empty");
  double sum = 0.0;
  for (const auto& s : scores.scores) sum += (s.near + s.far) / 2.0;
  return sum / static_cast<double>(scores.scores.size());
}

namespace {

double score_of(const FrameScores& s, Player p) { return p == Player::near ? s.near : s.far; }

}  // namespace

double hit_objective(const ScoreSequence& scores, const HitList& hits, double tau_value) {
  double total = 0.0;
  for (const auto& h : hits) {
    const auto idx = h.frame - scores.first_frame;
    if (idx < 0 || static_cast<std::size_t>(idx) >= scores.size()) {
      throw InvalidInput("hit frame " + std::to_string(h.frame) + " outside the score sequence");
    }
    total += score_of(scores.scores[static_cast<std::size_t>(idx)], h.player) - tau_value;
  }
  return total;
}

bool satisfies_constraints(const ScoreSequence& scores, const HitList& hits) {
  if (static_cast<int>(hits.size()) > hit_budget(scores.size(), scores.fps)) return false;
  const int gap = min_hit_spacing(scores.fps);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].player == Player::unknown) return false;
    const int idx = hits[i].frame - scores.first_frame;
    if (idx < 0 || static_cast<std::size_t>(idx) >= scores.size()) return false;
    if (i > 0) {
      if (hits[i].frame - hits[i - 1].frame < gap) return false;
      if (hits[i].player == hits[i - 1].player) return false;
    }
  }
  return true;
}

OptimizedHits optimize_hits(const ScoreSequence& scores) {
  scores.validate();
  const std::size_t F = scores.size();
  const int gap = min_hit_spacing(scores.fps);
  const int budget = hit_budget(F, scores.fps);
  const double t = tau(scores);

  // best[i][r][p]: best (value, hit count) using frames >= i with at most r
  // more hits, p = last player (0 none, 1 near, 2 far).
  struct Cell {
    double value = 0.0;
    int count = 0;
  };
  const auto R = static_cast<std::size_t>(budget + 1);
  std::vector<Cell> best((F + 1) * R * 3);
  auto at = [&](std::size_t i, std::size_t r, std::size_t p) -> Cell& {
    return best[(i * R + r) * 3 + p];
  };
  auto better = [](const Cell& a, const Cell& b) {
    const double eps = 1e-12 * (1.0 + std::abs(a.value) + std::abs(b.value));
    if (a.value > b.value + eps) return true;
    if (a.value < b.value - eps) return false;
    return a.count < b.count;
  };
  auto same = [&](const Cell& a, const Cell& b) { return !better(a, b) && !better(b, a); };
  auto take = [&](std::size_t i, std::size_t r, std::size_t q) {
    const std::size_t next = std::min(F, i + static_cast<std::size_t>(gap));
    const Cell& tail = at(next, r - 1, q);
    const Player player = q == 1 ? Player::near : Player::far;
    return Cell{score_of(scores.scores[i], player) - t + tail.value, tail.count + 1};
  };

  for (std::size_t i = F; i-- > 0;) {
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t p = 0; p < 3; ++p) {
        Cell c = at(i + 1, r, p);
        if (r > 0) {
          for (std::size_t q = 1; q <= 2; ++q) {
            if (q == p) continue;
            const Cell option = take(i, r, q);
            if (better(option, c)) c = option;
          }
        }
        at(i, r, p) = c;
      }
    }
  }

  OptimizedHits out;
  std::size_t r = R - 1;
  std::size_t p = 0;
  std::size_t i = 0;
  while (i < F && r > 0) {
    const Cell& target = at(i, r, p);
    bool took = false;
    for (std::size_t q = 1; q <= 2 && !took; ++q) {
      if (q == p) continue;
      if (same(take(i, r, q), target)) {
        out.hits.push_back({scores.first_frame + static_cast<int>(i),
                            q == 1 ? Player::near : Player::far});
        p = q;
        --r;
        i = std::min(F, i + static_cast<std::size_t>(gap));
        took = true;
      }
    }
    if (!took) ++i;
  }
  out.objective = hit_objective(scores, out.hits, t);
  return out;
}

HitList naive_postprocess(const ScoreSequence& scores) {
  scores.validate();
  const int gap = min_hit_spacing(scores.fps);
  HitList out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const FrameScores& s = scores.scores[i];
    Player label;
    if (s.near > s.no_hit && s.near >= s.far) {
      label = Player::near;
    } else if (s.far > s.no_hit && s.far > s.near) {
      label = Player::far;
    } else {
      continue;
    }
    const int frame = scores.first_frame + static_cast<int>(i);
    if (!out.empty() && frame - out.back().frame < gap) continue;
    out.push_back({frame, label});
  }
  return out;
}

HitList derivative_baseline(const recon::ShuttleTrack& track, double threshold,
                            const std::optional<geometry::Homography>& homography) {
  track.validate();
  const auto& e = track.entries;

  struct Candidate {
    std::size_t index;
    double strength;
  };
  std::vector<Candidate> candidates;
  bool any_run = false;

  std::size_t start = 0;
  while (start < e.size()) {
    if (!e[start].visible) {
      ++start;
      continue;
    }
    std::size_t end = start + 1;
    while (end < e.size() && e[end].visible && e[end].frame == e[end - 1].frame + 1) ++end;
    if (end - start >= 3) {
      any_run = true;
      std::vector<double> d(end - start, 0.0);
      for (std::size_t k = start + 1; k + 1 < end; ++k) {
        const double du = e[k + 1].u - 2.0 * e[k].u + e[k - 1].u;
        const double dv = e[k + 1].v - 2.0 * e[k].v + e[k - 1].v;
        d[k - start] = std::max(std::abs(du), std::abs(dv));
      }
      for (std::size_t k = start + 1; k + 1 < end; ++k) {
        const double here = d[k - start];
        if (!(here > threshold)) continue;
        const bool left_ok = k - 1 == start || here >= d[k - 1 - start];
        const bool right_ok = k + 2 == end || here > d[k + 1 - start];
        if (left_ok && right_ok) candidates.push_back({k, here});
      }
    }
    start = end;
  }
  if (!any_run) throw InvalidInput("derivative baseline needs 3 consecutive visible frames");

  const int gap = min_hit_spacing(track.fps);
  HitList out;
  for (const auto& c : candidates) {
    const auto& entry = e[c.index];
    if (!out.empty() && entry.frame - out.back().frame < gap) continue;
    Player player = Player::unknown;
    if (homography) {
      try {
        const auto court = homography->apply({entry.u, entry.v});
        player = court.y() <= geometry::kNetY ? Player::near : Player::far;
      } catch (const NumericalError&) {
      }
    }
    out.push_back({entry.frame, player});
  }
  return out;
}

HitMetrics hit_metrics(const HitList& truth, const HitList& predicted, int tolerance_frames) {
  if (tolerance_frames < 0) throw InvalidInput("matching tolerance must be non-negative");
  HitList g = truth;
  HitList p = predicted;
  auto by_frame = [](const Hit& a, const Hit& b) { return a.frame < b.frame; };
  std::stable_sort(g.begin(), g.end(), by_frame);
  std::stable_sort(p.begin(), p.end(), by_frame);

  std::vector<bool> used(p.size(), false);
  std::size_t m = 0;
  for (const auto& gt : g) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (used[j] || p[j].player != gt.player) continue;
      if (std::abs(p[j].frame - gt.frame) <= tolerance_frames) {
        used[j] = true;
        ++m;
        break;
      }
    }
  }

  HitMetrics out;
  out.matched = m;
  const double dm = static_cast<double>(m);
  const double ng = static_cast<double>(g.size());
  const double np = static_cast<double>(p.size());
  const double uni = ng + np - dm;
  out.accuracy = uni > 0.0 ? dm / uni : 1.0;
  out.recall = g.empty() ? 1.0 : dm / ng;
  out.precision = p.empty() ? 1.0 : dm / np;
  const double s = out.precision + out.recall;
  out.f1 = s > 0.0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

ThresholdTuning tune_derivative_threshold(const std::vector<LabeledTrack>& labeled,
                                          const std::vector<double>& candidates,
                                          int tolerance_frames,
                                          const std::optional<geometry::Homography>& homography) {
  if (labeled.empty() || candidates.empty()) {
    throw InvalidInput("threshold tuning needs labeled tracks and candidate thresholds");
  }
  ThresholdTuning best{candidates.front(), -1.0};
  for (const double threshold : candidates) {
    double sum = 0.0;
    for (const auto& item : labeled) {
      HitList truth = item.truth;
      if (!homography) {
        for (auto& h : truth) h.player = Player::unknown;
      }
      sum += hit_metrics(truth, derivative_baseline(item.track, threshold, homography),
                         tolerance_frames)
                 .accuracy;
    }
    const double mean = sum / static_cast<double>(labeled.size());
    if (mean > best.mean_accuracy) best = {threshold, mean};
  }
  return best;
}

}  // namespace shuttle3d::hits
