#pragma once

#include <optional>
#include <vector>

#include "mvr/manifold.hpp"

namespace mvr {

/// Weights of a weighted Riemannian center of mass. Entries may be negative
/// but must sum to a strictly positive number.
struct WeightVector {
  std::vector<double> weights;

  double sum() const;
  double positive_sum() const;   // A+
  double negative_sum() const;   // A- (absolute value of negative part)
  void validate() const;
};

struct MeanOptions {
  int max_iters = 200;
  /// Relative gradient tolerance; the effective tolerance is
  /// grad_tol * max(1, initial point spread).
  double grad_tol = 1e-10;
  /// Empty: start from the point with the largest positive weight.
  std::optional<ManifoldPoint> init;
  AntipodalPolicy antipodal = AntipodalPolicy::Error;
};

/// W(m) = sum_j a_j log_m(u_j), anchored at m.
TangentVector mean_vector_field(const std::vector<ManifoldPoint>& points,
                                const WeightVector& a, const ManifoldPoint& m,
                                AntipodalPolicy policy = AntipodalPolicy::Error);

/// Weighted sum of squared distances (the mean objective).
double mean_objective(const std::vector<ManifoldPoint>& points,
                      const WeightVector& a, const ManifoldPoint& m);

/// Weighted Riemannian center of mass.
///
/// Circle uses exact sector enumeration (global minimizer); Euclidean uses
/// the closed form; Sphere2/Spd3 iterate gradient ascent on the mean vector
/// field with step 1/A+ and halving on non-decrease of the objective.
ManifoldPoint weighted_mean(const std::vector<ManifoldPoint>& points,
                            const WeightVector& a,
                            const MeanOptions& opts = {});

/// Among the stationary points found (anchor-seeded start plus the default
/// start; all global minimizers on the circle), returns the one closest to
/// `anchor`.
ManifoldPoint weighted_mean_nearest(const std::vector<ManifoldPoint>& points,
                                    const WeightVector& a,
                                    const ManifoldPoint& anchor,
                                    const MeanOptions& opts = {});

}  // namespace mvr
