#include "shuttle3d/court_detection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "shuttle3d/errors.hpp"

namespace shuttle3d::court {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_pi(double a) {
  a = std::fmod(a, kPi);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

// Line in normal form with theta in [0, pi).
DetectedLine canonical(double rho, double theta, int support) {
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0.0) theta += 2.0 * kPi;
  if (theta >= kPi) {
    theta -= kPi;
    rho = -rho;
  }
  if (theta >= kPi) theta = 0.0;
  return {rho, theta, support};
}

// Angular difference between the normal directions, in [0, pi/2], together
// with the rho of `b` expressed in `a`'s orientation.
struct Alignment {
  double dtheta;
  double drho;
};

Alignment align(const DetectedLine& a, const DetectedLine& b) {
  double d = std::abs(a.theta - b.theta);
  double rho_b = b.rho;
  if (d > kPi / 2.0) {
    d = kPi - d;
    rho_b = -rho_b;
  }
  return {d, std::abs(a.rho - rho_b)};
}

}  // namespace

GrayImage threshold_white(const RgbImage& img, const ThresholdConfig& config) {
  GrayImage mask(img.width, img.height, 0);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Rgb c = img.at(x, y);
      const int lo = std::min({c.r, c.g, c.b});
      const int hi = std::max({c.r, c.g, c.b});
      mask.at(x, y) = (lo >= config.luminance && hi - lo <= config.chroma) ? 1 : 0;
    }
  }
  return mask;
}

double DetectedLine::direction() const { return wrap_pi(theta + kPi / 2.0); }

// ---------------------------------------------------------------------------
// Hough

std::vector<DetectedLine> hough_lines(const GrayImage& mask, const HoughConfig& config) {
  if (!(config.rho_step > 0.0) || !(config.theta_step_deg > 0.0)) {
    throw InvalidInput("Hough resolution must be positive");
  }
  const int n_theta = std::max(1, static_cast<int>(std::lround(180.0 / config.theta_step_deg)));
  const double theta_step = kPi / n_theta;
  const double diag = std::hypot(mask.width, mask.height);
  const int rho_half = static_cast<int>(std::ceil(diag / config.rho_step)) + 1;
  const int n_rho = 2 * rho_half + 1;

  std::vector<double> cos_t(static_cast<std::size_t>(n_theta));
  std::vector<double> sin_t(static_cast<std::size_t>(n_theta));
  for (int k = 0; k < n_theta; ++k) {
    cos_t[static_cast<std::size_t>(k)] = std::cos(k * theta_step) / config.rho_step;
    sin_t[static_cast<std::size_t>(k)] = std::sin(k * theta_step) / config.rho_step;
  }

  std::vector<Eigen::Vector2d> points;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) points.emplace_back(x, y);
    }
  }
  if (points.empty()) return {};

  std::vector<int> acc(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_rho), 0);
  auto cell = [&](int k, int r) -> int& {
    return acc[static_cast<std::size_t>(k) * static_cast<std::size_t>(n_rho) +
               static_cast<std::size_t>(r)];
  };
  for (const auto& p : points) {
    for (int k = 0; k < n_theta; ++k) {
      const double r = p.x() * cos_t[static_cast<std::size_t>(k)] +
                       p.y() * sin_t[static_cast<std::size_t>(k)];
      ++cell(k, static_cast<int>(std::lround(r)) + rho_half);
    }
  }

  const int threshold = std::max(1, static_cast<int>(std::ceil(config.vote_fraction * diag)));

  // 3x3 non-maximum suppression; theta wraps with rho mirrored.
  auto neighbour = [&](int k, int r) -> int {
    if (k < 0) {
      k += n_theta;
      r = n_rho - 1 - r;
    } else if (k >= n_theta) {
      k -= n_theta;
      r = n_rho - 1 - r;
    }
    if (r < 0 || r >= n_rho) return 0;
    return cell(k, r);
  };
  struct Peak {
    int k;
    int r;
    int votes;
  };
  std::vector<Peak> peaks;
  for (int k = 0; k < n_theta; ++k) {
    for (int r = 0; r < n_rho; ++r) {
      const int v = cell(k, r);
      if (v < threshold) continue;
      bool is_max = true;
      for (int dk = -1; dk <= 1 && is_max; ++dk) {
        for (int dr = -1; dr <= 1; ++dr) {
          if (dk == 0 && dr == 0) continue;
          const int nv = neighbour(k + dk, r + dr);
          // Plateaus keep only their first cell in scan order.
          const bool earlier = dk < 0 || (dk == 0 && dr < 0);
          if (nv > v || (earlier && nv == v)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) peaks.push_back({k, r, v});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& a, const Peak& b) { return a.votes > b.votes; });

  std::vector<DetectedLine> lines;
  for (const auto& pk : peaks) {
    if (static_cast<int>(lines.size()) >= config.max_lines) break;
    const double theta = pk.k * theta_step;
    const double rho = (pk.r - rho_half) * config.rho_step;
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    // Total least squares over the pixels in the band around the peak line.
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    std::size_t n = 0;
    for (const auto& p : points) {
      if (std::abs(p.x() * c + p.y() * s - rho) <= config.refine_band) {
        mean += p;
        ++n;
      }
    }
    DetectedLine line = canonical(rho, theta, pk.votes);
    if (n >= 2) {
      mean /= static_cast<double>(n);
      Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
      for (const auto& p : points) {
        if (std::abs(p.x() * c + p.y() * s - rho) <= config.refine_band) {
          const Eigen::Vector2d d = p - mean;
          cov += d * d.transpose();
        }
      }
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
      const Eigen::Vector2d normal = eig.eigenvectors().col(0);
      const DetectedLine refined =
          canonical(normal.dot(mean), std::atan2(normal.y(), normal.x()), pk.votes);
      const Alignment a = align(line, refined);
      if (a.dtheta <= 2.0 * theta_step && a.drho <= 2.0 * config.rho_step + config.refine_band) {
        line = refined;
      }
    }

    bool duplicate = false;
    for (const auto& kept : lines) {
      const Alignment a = align(kept, line);
      if (a.dtheta < config.merge_theta_deg * kPi / 180.0 && a.drho < config.merge_rho) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) lines.push_back(line);
  }
  return lines;
}

// ---------------------------------------------------------------------------
// Partition

double line_angle(const DetectedLine& a, const DetectedLine& b) { return align(a, b).dtheta; }

double partition_weight(const DetectedLine& a, const DetectedLine& b, double eps) {
  const double d = std::abs(line_angle(a, b) - kPi / 2.0) + eps;
  return 1.0 / (d * d);
}

double cut_weight(const std::vector<DetectedLine>& lines, const std::vector<int>& side,
                  double eps) {
  double total = 0.0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (side[i] != side[j]) total += partition_weight(lines[i], lines[j], eps);
    }
  }
  return total;
}

std::vector<int> greedy_bipartition(const std::vector<DetectedLine>& lines, double eps) {
  const std::size_t n = lines.size();
  if (n < 2) throw InvalidInput("partition needs at least 2 lines");

  std::vector<double> w(n * n, 0.0);
  std::vector<double> degree(n, 0.0);
  std::size_t seed_a = 0;
  std::size_t seed_b = 1;
  double heaviest = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double wij = partition_weight(lines[i], lines[j], eps);
      w[i * n + j] = w[j * n + i] = wij;
      degree[i] += wij;
      degree[j] += wij;
      if (wij > heaviest) {
        heaviest = wij;
        seed_a = i;
        seed_b = j;
      }
    }
  }

  std::vector<int> side(n, -1);
  side[seed_a] = 0;
  side[seed_b] = 1;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return degree[a] > degree[b]; });
  for (const std::size_t v : order) {
    if (side[v] >= 0) continue;
    double to0 = 0.0;
    double to1 = 0.0;
    for (std::size_t u = 0; u < n; ++u) {
      if (side[u] == 0) to0 += w[v * n + u];
      if (side[u] == 1) to1 += w[v * n + u];
    }
    // Joining side 0 cuts the edges towards side 1.
    side[v] = to1 >= to0 ? 0 : 1;
  }

  auto cut_of = [&](const std::vector<int>& sd) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (sd[i] != sd[j]) c += w[i * n + j];
    return c;
  };

  // Local search: single moves, then the best exchange of one line from each
  // side, until neither improves the cut. Never empties a side.
  auto local_search = [&](std::vector<int>& sd) {
    auto move_gain = [&](std::size_t v) {
      double gain = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        if (u == v) continue;
        gain += sd[u] == sd[v] ? w[v * n + u] : -w[v * n + u];
      }
      return gain;
    };
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t v = 0; v < n; ++v) {
        if (std::count(sd.begin(), sd.end(), sd[v]) == 1) continue;
        if (move_gain(v) > 1e-12 * degree[v]) {
          sd[v] = 1 - sd[v];
          improved = true;
        }
      }
      if (improved) continue;
      double best = 0.0;
      std::size_t best_a = 0;
      std::size_t best_b = 0;
      for (std::size_t a = 0; a < n; ++a) {
        if (sd[a] != 0) continue;
        const double ga = move_gain(a);
        for (std::size_t b = 0; b < n; ++b) {
          if (sd[b] != 1) continue;
          const double delta = ga + move_gain(b) + 2.0 * w[a * n + b];
          if (delta > best && delta > 1e-12 * (degree[a] + degree[b])) {
            best = delta;
            best_a = a;
            best_b = b;
          }
        }
      }
      if (best > 0.0) {
        sd[best_a] = 1;
        sd[best_b] = 0;
        improved = true;
      }
    }
  };
  local_search(side);

  // Second start: the best split of the orientation circle into two arcs.
  // Insertion order can trap the search when both clusters are wide; the arc
  // split is where clustered optima live.
  std::vector<std::size_t> by_angle(n);
  std::iota(by_angle.begin(), by_angle.end(), 0);
  std::stable_sort(by_angle.begin(), by_angle.end(), [&](std::size_t a, std::size_t b) {
    return lines[a].theta < lines[b].theta;
  });
  std::vector<int> arc(n);
  std::vector<int> best_arc;
  double best_arc_cut = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j <= n - (i == 0 ? 1 : 0); ++j) {
      for (std::size_t k = 0; k < n; ++k) arc[by_angle[k]] = (k >= i && k < j) ? 0 : 1;
      const double c = cut_of(arc);
      if (c > best_arc_cut) {
        best_arc_cut = c;
        best_arc = arc;
      }
    }
  }
  local_search(best_arc);
  const double greedy_cut = cut_of(side);
  if (cut_of(best_arc) > greedy_cut + 1e-12 * greedy_cut) return best_arc;
  return side;
}

LinePartition partition_lines(const std::vector<DetectedLine>& lines, double eps) {
  const std::vector<int> side = greedy_bipartition(lines, eps);
  std::size_t most_horizontal = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (std::abs(lines[i].theta - kPi / 2.0) < std::abs(lines[most_horizontal].theta - kPi / 2.0)) {
      most_horizontal = i;
    }
  }
  const int h_side = side[most_horizontal];
  LinePartition out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    (side[i] == h_side ? out.horizontal : out.vertical).push_back(lines[i]);
  }
  return out;
}

LinePartition farin_partition(const std::vector<DetectedLine>& lines) {
  LinePartition out;
  for (const auto& l : lines) {
    const double deg = l.direction() * 180.0 / kPi;
    if (deg <= 25.0 || deg >= 155.0) {
      out.horizontal.push_back(l);
    } else if (deg >= 60.0 && deg <= 120.0) {
      out.vertical.push_back(l);
    } else {
      out.discarded.push_back(l);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Layout fit

ImagePoint intersect(const DetectedLine& a, const DetectedLine& b) {
  const double a1 = std::cos(a.theta);
  const double b1 = std::sin(a.theta);
  const double a2 = std::cos(b.theta);
  const double b2 = std::sin(b.theta);
  const double det = a1 * b2 - a2 * b1;
  if (std::abs(det) < 1e-9) {
    return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  }
  return {(a.rho * b2 - b.rho * b1) / det, (a1 * b.rho - a2 * a.rho) / det};
}

namespace {

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// Polygon order for canonical corners: near-left, near-right, far-right, far-left.
std::array<Eigen::Vector2d, 4> ring(const std::array<ImagePoint, 4>& c) {
  return {c[0], c[1], c[3], c[2]};
}

double signed_area(const std::vector<Eigen::Vector2d>& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    a += cross2(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * a;
}

bool convex(const std::array<Eigen::Vector2d, 4>& q) {
  int sign = 0;
  for (int i = 0; i < 4; ++i) {
    const double c = cross2(q[(i + 1) % 4] - q[i], q[(i + 2) % 4] - q[(i + 1) % 4]);
    const int s = c > 0.0 ? 1 : (c < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return sign != 0;
}

bool segments_cross(const Eigen::Vector2d& p1, const Eigen::Vector2d& p2,
                    const Eigen::Vector2d& q1, const Eigen::Vector2d& q2) {
  const double d1 = cross2(q2 - q1, p1 - q1);
  const double d2 = cross2(q2 - q1, p2 - q1);
  const double d3 = cross2(p2 - p1, q1 - p1);
  const double d4 = cross2(p2 - p1, q2 - p1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool self_intersecting(const std::array<Eigen::Vector2d, 4>& q) {
  return segments_cross(q[0], q[1], q[2], q[3]) || segments_cross(q[1], q[2], q[3], q[0]);
}

// Sutherland-Hodgman: clip `subject` by the convex CCW polygon `clip`.
std::vector<Eigen::Vector2d> clip_polygon(std::vector<Eigen::Vector2d> subject,
                                          const std::vector<Eigen::Vector2d>& clip) {
  for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    const Eigen::Vector2d a = clip[i];
    const Eigen::Vector2d b = clip[(i + 1) % clip.size()];
    auto inside = [&](const Eigen::Vector2d& p) { return cross2(b - a, p - a) >= 0.0; };
    std::vector<Eigen::Vector2d> out;
    for (std::size_t j = 0; j < subject.size(); ++j) {
      const Eigen::Vector2d& cur = subject[j];
      const Eigen::Vector2d& prev = subject[(j + subject.size() - 1) % subject.size()];
      const bool in_cur = inside(cur);
      const bool in_prev = inside(prev);
      if (in_cur != in_prev) {
        const double da = cross2(b - a, prev - a);
        const double db = cross2(b - a, cur - a);
        out.push_back(prev + (cur - prev) * (da / (da - db)));
      }
      if (in_cur) out.push_back(cur);
    }
    subject = std::move(out);
  }
  return subject;
}

// Splits a simple quadrilateral into convex CCW pieces.
std::vector<std::vector<Eigen::Vector2d>> convex_pieces(std::array<Eigen::Vector2d, 4> q) {
  std::vector<Eigen::Vector2d> poly(q.begin(), q.end());
  if (signed_area(poly) < 0.0) {
    std::reverse(poly.begin(), poly.end());
    std::copy(poly.begin(), poly.end(), q.begin());
  }
  if (convex(q)) return {poly};
  // A simple non-convex quadrilateral has exactly one reflex vertex; the
  // diagonal from it splits it into two triangles.
  int reflex = 0;
  for (int i = 0; i < 4; ++i) {
    const Eigen::Vector2d& prev = q[(i + 3) % 4];
    const Eigen::Vector2d& next = q[(i + 1) % 4];
    if (cross2(q[i] - prev, next - q[i]) < 0.0) reflex = i;
  }
  const auto at = [&](int k) { return q[(reflex + k) % 4]; };
  return {{at(0), at(1), at(2)}, {at(0), at(2), at(3)}};
}

// Pixels within `radius` of any mask pixel.
GrayImage dilate(const GrayImage& mask, double radius) {
  GrayImage out(mask.width, mask.height, 0);
  const int r = static_cast<int>(std::floor(radius));
  std::vector<std::pair<int, int>> offsets;
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) offsets.emplace_back(dx, dy);
    }
  }
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      for (const auto& [dx, dy] : offsets) {
        if (out.contains(x + dx, y + dy)) out.at(x + dx, y + dy) = 1;
      }
    }
  }
  return out;
}

}  // namespace

CourtDetection fit_court(const LinePartition& partition, const CourtModel& model,
                         const GrayImage& mask, const FitConfig& config) {
  const auto& H = partition.horizontal;
  const auto& V = partition.vertical;
  if (H.size() < 2 || V.size() < 2) {
    throw InvalidInput("court fit needs at least 2 horizontal and 2 vertical lines");
  }
  const GrayImage support = dilate(mask, config.tolerance_px);
  const double min_area =
      config.prune_small ? config.min_area_fraction * mask.width * mask.height : 0.0;

  CourtDetection best;
  best.score = -1.0;
  best.candidates_total = (H.size() * (H.size() - 1) / 2) * (V.size() * (V.size() - 1) / 2);

  std::array<Eigen::Vector2d, 4> court_corners;
  for (int i = 0; i < 4; ++i) court_corners[i] = model.corners[i].head<2>();

  for (std::size_t h1 = 0; h1 < H.size(); ++h1) {
    for (std::size_t h2 = h1 + 1; h2 < H.size(); ++h2) {
      for (std::size_t v1 = 0; v1 < V.size(); ++v1) {
        for (std::size_t v2 = v1 + 1; v2 < V.size(); ++v2) {
          const ImagePoint a = intersect(H[h1], V[v1]);
          const ImagePoint b = intersect(H[h1], V[v2]);
          const ImagePoint c = intersect(H[h2], V[v1]);
          const ImagePoint d = intersect(H[h2], V[v2]);
          if (!a.allFinite() || !b.allFinite() || !c.allFinite() || !d.allFinite()) continue;

          // Near is lower in the image, left has the smaller u.
          const bool h1_near = (a.y() + b.y()) > (c.y() + d.y());
          const bool v1_left = (a.x() + c.x()) < (b.x() + d.x());
          const ImagePoint& near_v1 = h1_near ? a : c;
          const ImagePoint& near_v2 = h1_near ? b : d;
          const ImagePoint& far_v1 = h1_near ? c : a;
          const ImagePoint& far_v2 = h1_near ? d : b;
          const std::array<ImagePoint, 4> corners =
              v1_left ? std::array<ImagePoint, 4>{near_v1, near_v2, far_v1, far_v2}
                      : std::array<ImagePoint, 4>{near_v2, near_v1, far_v2, far_v1};

          const auto quad = ring(corners);
          if (!convex(quad)) continue;
          std::vector<Eigen::Vector2d> poly(quad.begin(), quad.end());
          if (std::abs(signed_area(poly)) < min_area) continue;

          Homography to_court;
          Homography to_image;
          try {
            to_court = geometry::estimate_homography(corners, court_corners);
            to_image = to_court.inverse();
          } catch (const Error&) {
            continue;
          }

          std::size_t samples = 0;
          std::size_t hits = 0;
          bool bad = false;
          for (const auto& seg : model.lines) {
            ImagePoint p;
            ImagePoint q;
            try {
              p = to_image.apply(seg.a.head<2>());
              q = to_image.apply(seg.b.head<2>());
            } catch (const Error&) {
              bad = true;
              break;
            }
            const double len = (q - p).norm();
            const auto n = static_cast<std::size_t>(std::floor(len / config.sample_spacing)) + 1;
            for (std::size_t k = 0; k < n; ++k) {
              const double t = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
              const ImagePoint s = p + t * (q - p);
              const auto x = static_cast<int>(std::lround(s.x()));
              const auto y = static_cast<int>(std::lround(s.y()));
              ++samples;
              if (support.contains(x, y) && support.at(x, y)) ++hits;
            }
          }
          if (bad || samples == 0) continue;
          ++best.candidates_scored;
          const double score = static_cast<double>(hits) / static_cast<double>(samples);
          if (score > best.score) {
            best.score = score;
            best.corners = corners;
            best.homography = to_court;
          }
        }
      }
    }
  }
  if (best.candidates_scored == 0) {
    throw DegenerateGeometry("no court candidate could be scored");
  }
  best.success = best.score >= config.success_threshold;
  return best;
}

CourtDetection detect_court(const RgbImage& img, const CourtModel& model,
                            const DetectionConfig& config) {
  const GrayImage mask = threshold_white(img, config.threshold);
  const std::vector<DetectedLine> lines = hough_lines(mask, config.hough);
  CourtDetection failed;
  if (lines.size() < 4) return failed;
  const LinePartition partition = config.method == PartitionMethod::graph
                                      ? partition_lines(lines, config.epsilon)
                                      : farin_partition(lines);
  if (partition.horizontal.size() < 2 || partition.vertical.size() < 2) return failed;
  try {
    return fit_court(partition, model, mask, config.fit);
  } catch (const DegenerateGeometry&) {
    return failed;
  }
}

double detection_iou(const std::array<ImagePoint, 4>& detected,
                     const std::array<ImagePoint, 4>& truth) {
  const auto a = ring(detected);
  const auto b = ring(truth);
  for (const auto& p : a) {
    if (!p.allFinite()) throw InvalidInput("non-finite corner");
  }
  for (const auto& p : b) {
    if (!p.allFinite()) throw InvalidInput("non-finite corner");
  }
  if (self_intersecting(a) || self_intersecting(b)) {
    throw InvalidInput("court quadrilateral is self-intersecting");
  }
  std::vector<Eigen::Vector2d> subject(a.begin(), a.end());
  if (signed_area(subject) < 0.0) std::reverse(subject.begin(), subject.end());
  const double area_a = std::abs(signed_area(subject));
  const double area_b = std::abs(signed_area({b.begin(), b.end()}));

  double inter = 0.0;
  for (const auto& piece : convex_pieces(b)) {
    const auto clipped = clip_polygon(subject, piece);
    if (clipped.size() >= 3) inter += std::abs(signed_area(clipped));
  }
  const double uni = area_a + area_b - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Rendering

std::array<ImagePoint, 4> project_corners(const geometry::CameraModel& camera,
                                          const CourtModel& model) {
  std::array<ImagePoint, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = camera.project(model.corners[i]);
  return out;
}

RgbImage render_court(const geometry::CameraModel& camera, const CourtModel& model, int width,
                      int height, const RenderStyle& style) {
  RgbImage img(width, height, style.background);
  const double half = style.line_width / 2.0;
  for (const auto& seg : model.lines) {
    if (camera.depth_sign(seg.a) <= 0.0 || camera.depth_sign(seg.b) <= 0.0) continue;
    const ImagePoint p = camera.project(seg.a);
    const ImagePoint q = camera.project(seg.b);
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(p.x(), q.x()) - half - 1)));
    const int x1 =
        std::min(width - 1, static_cast<int>(std::ceil(std::max(p.x(), q.x()) + half + 1)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(p.y(), q.y()) - half - 1)));
    const int y1 =
        std::min(height - 1, static_cast<int>(std::ceil(std::max(p.y(), q.y()) + half + 1)));
    const Eigen::Vector2d d = q - p;
    const double len2 = d.squaredNorm();
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Eigen::Vector2d px(x, y);
        const double t = len2 > 0.0 ? std::clamp((px - p).dot(d) / len2, 0.0, 1.0) : 0.0;
        if ((px - (p + t * d)).norm() <= half) img.set(x, y, style.line);
      }
    }
  }
  return img;
}

}  // namespace shuttle3d::court
