#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "mvr/karcher.hpp"
#include "mvr/measurement.hpp"
#include "mvr/signal.hpp"

namespace mvr {

/// Isometric coordinates on the tangent space at a fixed base point, w.r.t.
/// the deterministic orthonormal basis of tangent_basis(). Caches the Spd3
/// whitening so repeated coordinate maps stay cheap.
class TangentChart {
 public:
  explicit TangentChart(const ManifoldPoint& base);

  int dim() const { return dim_; }
  const ManifoldPoint& base() const { return base_; }

  Eigen::VectorXd to_coords(const TangentVector& w) const;
  TangentVector from_coords(const Eigen::VectorXd& c) const;

  /// Spd3 whitening factors of the base point (valid only for Spd3 bases).
  const Eigen::Matrix3d& spd_sqrt() const { return sqrt_; }
  const Eigen::Matrix3d& spd_isqrt() const { return isqrt_; }

 private:
  ManifoldPoint base_;
  int dim_;
  std::vector<TangentVector> basis_;   // Circle/Euclidean/Sphere2 path
  Eigen::Matrix3d sqrt_, isqrt_;       // Spd3 path
};

/// Closed-form Jacobi coefficient for the boundary-to-initial-value map
/// (three branches by the sign of the eigenvalue).
double f1(double lambda, double d);

/// Closed-form Jacobi coefficient for the maps l_j (fields vanishing at the
/// far end of the geodesic).
double f2(double lambda, double d);

/// Gradient of y -> dist(y, f)^p, a tangent vector at y.
/// For p > 1 the gradient vanishes continuously at y = f; for p = 1 it is
/// singular there and SingularGradient is thrown.
TangentVector grad_dist_p(const ManifoldPoint& y, const ManifoldPoint& f,
                          double p,
                          AntipodalPolicy policy = AntipodalPolicy::Error);

/// Everything needed to evaluate the adjoint differential of one row's
/// intrinsic-mean map at its stationary point m: per-point Jacobi eigenframes
/// along the geodesics m -> u_j (in chart coordinates) and the assembled
/// d x d matrix of L*.
///
/// Precondition: m is a stationary point of the row's mean objective.
struct MeanDifferentialContext {
  ManifoldPoint m;
  std::vector<ManifoldPoint> points;
  std::vector<double> weights;
  std::vector<double> distances;
  TangentChart chart;
  /// Phi_j: columns are frame vectors in chart coordinates; empty for
  /// zero-weight entries and for the flat limit d_j ~ 0 (where the frame is
  /// not needed: f1 = 1, f2 = -1, transport = identity).
  std::vector<Eigen::MatrixXd> frame_coords;
  std::vector<Eigen::VectorXd> frame_eigs;
  /// Spd3 only: congruence factors E_j of the transport m -> u_j
  /// (pt(V) = E V E^T), a by-product of the fused assembly.
  std::vector<Eigen::Matrix3d> spd_transport;
  Eigen::MatrixXd l_star;
};

MeanDifferentialContext make_mean_context(
    const std::vector<ManifoldPoint>& points, const std::vector<double>& weights,
    const ManifoldPoint& m, AntipodalPolicy policy = AntipodalPolicy::Error);

/// R*_{j0} w: expands w (at m) in the j0 eigenframe, scales the coefficients
/// by a_{i,j0} f1(lambda_n), and parallel-transports the result to u_{j0}.
TangentVector adjoint_Rj(const MeanDifferentialContext& ctx, int j0,
                         const TangentVector& w,
                         AntipodalPolicy policy = AntipodalPolicy::Error);

/// Solves L* x = w on the tangent space at m. Throws SingularL when the
/// smallest singular value of L* drops below 1e-12 of its norm.
TangentVector apply_L_adjoint_inverse(const MeanDifferentialContext& ctx,
                                      const TangentVector& w);

/// Tight default options for the mean computation feeding a differential
/// context (stationarity must hold better than the gradients need).
MeanOptions context_mean_options(AntipodalPolicy policy);

/// Gradient of dist(mean(weights, pts), f)^p with respect to each input
/// point, per the mean-differential theorem. Zero-weight entries receive a
/// zero tangent. `mean_hint` seeds the internal mean computation (used by
/// warm-started inner loops); it does not change which mean is selected on
/// manifolds where the mean is unique.
std::vector<TangentVector> grad_dist_mean_p(
    const std::vector<ManifoldPoint>& pts, const std::vector<double>& weights,
    const ManifoldPoint& f, double p,
    AntipodalPolicy policy = AntipodalPolicy::Error,
    const ManifoldPoint* mean_hint = nullptr);

/// Gradient of D_i(u) = dist(A(u)_i, f_i)^p with respect to every signal
/// entry in the row's support, per the mean-differential theorem. Entries are
/// (column index, tangent at u_j); zero-weight columns are omitted.
std::vector<std::pair<int, TangentVector>> grad_data_atom(
    const Signal& u, const MeasurementMatrix::Row& row, const ManifoldPoint& f_i,
    double p, AntipodalPolicy policy = AntipodalPolicy::Error);

}  // namespace mvr
