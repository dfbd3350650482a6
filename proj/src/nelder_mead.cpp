#include "shuttle3d/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "shuttle3d/errors.hpp"

namespace shuttle3d::optim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Run {
  Eigen::VectorXd x;
  double value;
  int evaluations;
  int iterations;
  bool converged;
};

Run simplex_run(const std::function<double(const Eigen::VectorXd&)>& eval,
                const Eigen::VectorXd& start, double start_value,
                const Eigen::VectorXd& step, const NelderMeadOptions& opt) {
  const auto n = start.size();
  const double dn = static_cast<double>(n);
  const double alpha = 1.0;
  const double beta = 1.0 + 2.0 / dn;
  const double gamma = 0.75 - 1.0 / (2.0 * dn);
  const double delta = 1.0 - 1.0 / dn;

  std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), start);
  std::vector<double> vals(static_cast<std::size_t>(n + 1), start_value);
  int evals = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    auto& p = pts[static_cast<std::size_t>(i + 1)];
    p(i) += step(i);
    vals[static_cast<std::size_t>(i + 1)] = eval(p);
    ++evals;
  }

  std::vector<std::size_t> order(pts.size());
  bool converged = false;
  int iterations = 0;
  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[order.size() - 2];

    const double f_spread = vals[worst] - vals[best];
    double diameter = 0.0;
    for (const auto& p : pts) diameter = std::max(diameter, (p - pts[best]).lpNorm<Eigen::Infinity>());
    if (std::isfinite(f_spread) &&
        f_spread <= opt.f_tolerance * (1.0 + std::abs(vals[best])) &&
        diameter <= opt.x_tolerance * (1.0 + pts[best].lpNorm<Eigen::Infinity>())) {
      converged = true;
      break;
    }
    if (iterations >= opt.max_iterations) break;
    ++iterations;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) centroid += pts[order[i]];
    centroid /= dn;

    const Eigen::VectorXd xr = centroid + alpha * (centroid - pts[worst]);
    const double fr = eval(xr);
    ++evals;

    if (fr < vals[best]) {
      const Eigen::VectorXd xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      ++evals;
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second_worst]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + gamma * (xr - centroid))
                                       : Eigen::VectorXd(centroid - gamma * (centroid - pts[worst]));
    const double fc = eval(xc);
    ++evals;
    if ((outside && fc <= fr) || (!outside && fc < vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + delta * (pts[i] - pts[best]);
      vals[i] = eval(pts[i]);
      ++evals;
    }
  }

  const auto it = std::min_element(vals.begin(), vals.end());
  const auto idx = static_cast<std::size_t>(std::distance(vals.begin(), it));
  return {pts[idx], vals[idx], evals, iterations, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& step,
                             const NelderMeadOptions& options) {
  if (options.max_iterations < 1 || options.restarts < 0) {
    throw InvalidInput("nelder_mead: max_iterations must be >= 1 and restarts >= 0");
  }
  if (start.size() == 0 || step.size() != start.size()) {
    throw InvalidInput("nelder_mead: start and step must have equal, non-zero size");
  }
  auto eval = [&](const Eigen::VectorXd& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : kInf;
  };

  NelderMeadResult result;
  result.x = start;
  result.value = eval(start);
  result.evaluations = 1;

  for (int round = 0; round <= options.restarts; ++round) {
    const double before = result.value;
    const Run run = simplex_run(eval, result.x, result.value, step, options);
    result.evaluations += run.evaluations;
    result.iterations += run.iterations;
    if (run.value <= result.value) {
      result.x = run.x;
      result.value = run.value;
    }
    result.converged = run.converged;
    if (!run.converged) break;
    if (round > 0 && before - result.value <= options.f_tolerance * (1.0 + std::abs(result.value))) {
      break;
    }
  }
  return result;
}

}  // namespace shuttle3d::optim
