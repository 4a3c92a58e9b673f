#include "mvr/karcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mvr {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

int largest_positive_weight_index(const WeightVector& a) {
  int best = -1;
  double bw = 0.0;
  for (std::size_t j = 0; j < a.weights.size(); ++j) {
    if (a.weights[j] > bw) {
      bw = a.weights[j];
      best = static_cast<int>(j);
    }
  }
  if (best < 0) throw InvalidValue("weight vector has no positive entry");
  return best;
}

double spread_from(const ManifoldPoint& m,
                   const std::vector<ManifoldPoint>& points,
                   const WeightVector& a) {
  double r = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j)
    if (a.weights[j] != 0.0) r = std::max(r, dist(m, points[j]));
  return r;
}

struct CircleCandidate {
  double angle;
  double objective;
};

/// All local minimizers of the circle mean objective, found exactly.
///
/// Between antipodes of the data points the objective is a single quadratic
/// in the (lifted) angle, so each arc contributes at most one interior
/// stationary point; the arc endpoints (kinks from the wrapped distance) are
/// candidates as well, which matters for negative weights.
std::vector<CircleCandidate> circle_mean_candidates(
    const std::vector<ManifoldPoint>& points, const WeightVector& a) {
  const double a0 = a.sum();
  std::vector<double> breaks;
  for (std::size_t j = 0; j < points.size(); ++j)
    if (a.weights[j] != 0.0) breaks.push_back(wrap_angle(points[j].x(0) + kPi));
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto objective = [&](double m) {
    double f = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
      if (a.weights[j] == 0.0) continue;
      const double d = wrap_angle(points[j].x(0) - m);
      f += a.weights[j] * d * d;
    }
    return f;
  };
  const auto field = [&](double m) {
    double w = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (a.weights[j] != 0.0)
        w += a.weights[j] * wrap_angle(points[j].x(0) - m);
    return w;
  };

  std::vector<CircleCandidate> cands;
  const std::size_t nb = breaks.size();
  for (std::size_t l = 0; l < nb; ++l) {
    const double lo = breaks[l];
    double hi = breaks[(l + 1) % nb];
    if (nb == 1) hi = lo + 2.0 * kPi;
    else if (hi <= lo) hi += 2.0 * kPi;
    if (hi - lo < 1e-14) continue;
    const double mid = 0.5 * (lo + hi);
    // Interior stationary point of this arc's quadratic branch.
    const double mstar = mid + field(wrap_angle(mid)) / a0;
    if (mstar > lo + 1e-14 && mstar < hi - 1e-14) {
      const double ang = wrap_angle(mstar);
      cands.push_back({ang, objective(ang)});
    }
  }
  // Kink candidates (antipodes of data points).
  for (double b : breaks) cands.push_back({b, objective(b)});
  return cands;
}

ManifoldPoint iterative_mean(const std::vector<ManifoldPoint>& points,
                             const WeightVector& a, const MeanOptions& opts) {
  ManifoldPoint m = opts.init ? *opts.init
                              : points[largest_positive_weight_index(a)];
  const double aplus = a.positive_sum();
  const double tol = opts.grad_tol * std::max(1.0, spread_from(m, points, a));

  // Zero-weight points contribute nothing; drop them once.
  std::vector<ManifoldPoint> active;
  std::vector<double> aw;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (a.weights[j] == 0.0) continue;
    active.push_back(points[j]);
    aw.push_back(a.weights[j]);
  }

  std::vector<TangentVector> logs;
  std::vector<double> lnorms;
  const auto compute_logs = [&](const ManifoldPoint& at, double& f_out) {
    std::vector<double> ns;
    auto ls = log_batch(at, active, opts.antipodal, &ns);
    double f = 0.0;
    for (std::size_t j = 0; j < ls.size(); ++j) f += aw[j] * ns[j] * ns[j];
    f_out = f;
    lnorms = std::move(ns);
    return ls;
  };

  double f_cur = 0.0;
  logs = compute_logs(m, f_cur);

  for (int it = 0; it < opts.max_iters; ++it) {
    TangentVector w = zero_tangent(m);
    for (std::size_t j = 0; j < logs.size(); ++j) w.v += aw[j] * logs[j].v;
    if (norm(w) <= tol) return m;

    double step = 1.0 / aplus;
    ManifoldPoint cand = m;
    double f_cand = f_cur;
    std::vector<TangentVector> cand_logs;
    bool accepted = false;
    // Halve only on a clear increase; machine-precision plateaus near the
    // optimum must not stall progress on the gradient norm.
    const double slack = 1e-12 * (1.0 + std::abs(f_cur));
    for (int h = 0; h < 60; ++h) {
      TangentVector sv = w;
      sv.v *= step;
      cand = exp_map(m, sv);
      cand_logs = compute_logs(cand, f_cand);
      if (f_cand <= f_cur + slack) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) throw NoConvergence("weighted_mean: step search stalled");
    m = std::move(cand);
    logs = std::move(cand_logs);
    f_cur = f_cand;
  }
  throw NoConvergence("weighted_mean: gradient tolerance not reached");
}

}  // namespace

double WeightVector::sum() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double WeightVector::positive_sum() const {
  double s = 0.0;
  for (double w : weights)
    if (w > 0.0) s += w;
  return s;
}

double WeightVector::negative_sum() const {
  double s = 0.0;
  for (double w : weights)
    if (w < 0.0) s -= w;
  return s;
}

void WeightVector::validate() const {
  for (double w : weights)
    if (!std::isfinite(w)) throw InvalidValue("weight vector has a non-finite entry");
  if (!(sum() > 0.0))
    throw InvalidValue("weight vector must have strictly positive sum");
}

TangentVector mean_vector_field(const std::vector<ManifoldPoint>& points,
                                const WeightVector& a, const ManifoldPoint& m,
                                AntipodalPolicy policy) {
  if (points.size() != a.weights.size())
    throw InvalidValue("mean_vector_field: points/weights size mismatch");
  TangentVector w = zero_tangent(m);
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (a.weights[j] == 0.0) continue;
    const TangentVector l = log_map(m, points[j], policy);
    w.v += a.weights[j] * l.v;
  }
  return w;
}

double mean_objective(const std::vector<ManifoldPoint>& points,
                      const WeightVector& a, const ManifoldPoint& m) {
  double f = 0.0;
  for (std::size_t j = 0; j < points.size(); ++j) {
    if (a.weights[j] == 0.0) continue;
    const double d = dist(m, points[j]);
    f += a.weights[j] * d * d;
  }
  return f;
}

ManifoldPoint weighted_mean(const std::vector<ManifoldPoint>& points,
                            const WeightVector& a, const MeanOptions& opts) {
  if (points.empty()) throw InvalidValue("weighted_mean: no points");
  if (points.size() != a.weights.size())
    throw InvalidValue("weighted_mean: points/weights size mismatch");
  a.validate();
  for (std::size_t j = 1; j < points.size(); ++j)
    if (points[j].kind != points[0].kind)
      throw KindMismatch("weighted_mean: points on different manifolds");

  switch (points[0].kind.tag) {
    case ManifoldTag::Euclidean: {
      SmallVec acc = SmallVec::Zero(points[0].kind.ambient_size());
      for (std::size_t j = 0; j < points.size(); ++j)
        acc += a.weights[j] * points[j].x;
      ManifoldPoint m{points[0].kind, acc / a.sum()};
      return m;
    }
    case ManifoldTag::Circle: {
      auto cands = circle_mean_candidates(points, a);
      const CircleCandidate* best = nullptr;
      for (const auto& c : cands) {
        if (!best || c.objective < best->objective - 1e-13 ||
            (std::abs(c.objective - best->objective) <= 1e-13 &&
             c.angle < best->angle))
          best = &c;
      }
      return circle_point(best->angle);
    }
    default:
      return iterative_mean(points, a, opts);
  }
}

ManifoldPoint weighted_mean_nearest(const std::vector<ManifoldPoint>& points,
                                    const WeightVector& a,
                                    const ManifoldPoint& anchor,
                                    const MeanOptions& opts) {
  if (points.empty()) throw InvalidValue("weighted_mean_nearest: no points");
  a.validate();

  if (points[0].kind.tag == ManifoldTag::Circle) {
    // Exact candidate list; among (near-)global minimizers take the one
    // closest to the anchor.
    auto cands = circle_mean_candidates(points, a);
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& c : cands) fmin = std::min(fmin, c.objective);
    const ManifoldPoint* unused = nullptr;
    (void)unused;
    double best_d = std::numeric_limits<double>::infinity();
    double best_angle = 0.0;
    for (const auto& c : cands) {
      if (c.objective > fmin + 1e-12 * (1.0 + std::abs(fmin))) continue;
      const double d = dist(circle_point(c.angle), anchor);
      if (d < best_d - 1e-15) {
        best_d = d;
        best_angle = c.angle;
      }
    }
    return circle_point(best_angle);
  }

  if (points[0].kind.tag == ManifoldTag::Euclidean)
    return weighted_mean(points, a, opts);

  const bool has_negative = a.negative_sum() > 0.0;
  if (points[0].kind.tag == ManifoldTag::Spd3 && !has_negative) {
    // Hadamard manifold with nonnegative weights: the mean is unique.
    return weighted_mean(points, a, opts);
  }

  // Multi-start: default init plus anchor-seeded init.
  std::vector<ManifoldPoint> found;
  {
    ManifoldPoint m = weighted_mean(points, a, opts);
    found.push_back(std::move(m));
  }
  {
    MeanOptions o = opts;
    o.init = anchor;
    try {
      found.push_back(weighted_mean(points, a, o));
    } catch (const NoConvergence&) {
      // Anchor-seeded start may stall on pathological configurations; the
      // default start already produced a stationary point.
    }
  }
  double fmin = std::numeric_limits<double>::infinity();
  for (const auto& m : found) fmin = std::min(fmin, mean_objective(points, a, m));
  const ManifoldPoint* best = nullptr;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& m : found) {
    if (mean_objective(points, a, m) > fmin + 1e-10 * (1.0 + std::abs(fmin)))
      continue;
    const double d = dist(m, anchor);
    if (d < best_d) {
      best_d = d;
      best = &m;
    }
  }
  return *best;
}

}  // namespace mvr
