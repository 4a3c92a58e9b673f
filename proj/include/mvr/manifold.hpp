#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mvr/errors.hpp"

namespace mvr {

/// Chart vector with inline storage (largest chart is Spd3 with 6 entries;
/// Euclidean test manifolds are capped at dimension 12).
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 12, 1>;

inline constexpr int kMaxEuclideanDim = 12;

/// Module tolerances. Defaults follow the library contracts; may be
/// overridden once at startup before any points are constructed.
struct Tols {
  inline static double sphere_unit = 1e-9;       // |norm - 1| for S2 points
  inline static double tangent_orthogonal = 1e-9;  // S2 tangent vs base
  inline static double spd_positive = 0.0;       // eigenvalue floor for Spd3
};

enum class ManifoldTag { Circle, Sphere2, Spd3, Euclidean };

struct ManifoldKind {
  ManifoldTag tag = ManifoldTag::Euclidean;
  int euclidean_dim = 1;  // only meaningful for Euclidean

  static ManifoldKind circle() { return {ManifoldTag::Circle, 1}; }
  static ManifoldKind sphere2() { return {ManifoldTag::Sphere2, 2}; }
  static ManifoldKind spd3() { return {ManifoldTag::Spd3, 6}; }
  static ManifoldKind euclidean(int dim);

  /// Intrinsic manifold dimension.
  int dim() const;
  /// Number of chart coordinates used to store a point.
  int ambient_size() const;

  friend bool operator==(const ManifoldKind& a, const ManifoldKind& b) {
    return a.tag == b.tag &&
           (a.tag != ManifoldTag::Euclidean || a.euclidean_dim == b.euclidean_dim);
  }
  friend bool operator!=(const ManifoldKind& a, const ManifoldKind& b) {
    return !(a == b);
  }
};

/// A point on a registered manifold. Chart conventions:
///   Circle    - one angle in (-pi, pi]
///   Sphere2   - unit 3-vector
///   Spd3      - upper triangle (row-major: xx xy xz yy yz zz) of an SPD 3x3
///   Euclidean - dim reals
struct ManifoldPoint {
  ManifoldKind kind;
  SmallVec x;
};

/// A tangent vector anchored at `base`, stored in the same chart convention
/// (Spd3 tangents are symmetric matrices, 6 reals).
struct TangentVector {
  ManifoldPoint base;
  SmallVec v;
};

/// Cut-locus tie handling for log/geodesic on positively curved manifolds.
enum class AntipodalPolicy { Error, DeterministicPositive };

// ---- constructors -------------------------------------------------------

ManifoldPoint circle_point(double angle);
ManifoldPoint sphere_point(const Eigen::Vector3d& u);
ManifoldPoint spd_point(const Eigen::Matrix3d& m);
ManifoldPoint euclidean_point(const Eigen::VectorXd& x);
/// Generic chart constructor; validates invariants for the given kind.
ManifoldPoint make_point(const ManifoldKind& kind, const SmallVec& coords);

TangentVector make_tangent(const ManifoldPoint& base, const SmallVec& comps);
TangentVector zero_tangent(const ManifoldPoint& base);

/// Map an angle to its canonical representative in (-pi, pi].
double wrap_angle(double a);

Eigen::Matrix3d spd_to_matrix(const ManifoldPoint& p);
Eigen::Matrix3d sym_to_matrix(const SmallVec& six);
SmallVec sym_from_matrix(const Eigen::Matrix3d& s);

// ---- Riemannian primitives ----------------------------------------------

double dist(const ManifoldPoint& x, const ManifoldPoint& y);

/// Riemannian inner product of two tangent vectors at the same base point.
double inner(const TangentVector& v, const TangentVector& w);
double norm(const TangentVector& v);

ManifoldPoint exp_map(const ManifoldPoint& base, const TangentVector& v);

TangentVector log_map(const ManifoldPoint& base, const ManifoldPoint& target,
                      AntipodalPolicy policy = AntipodalPolicy::Error);

/// Logs of several targets from one base point; on Spd3 the base whitening
/// is factored once, which matters in mean iterations. When `norms` is
/// given it receives the Riemannian norms of the logs (= distances).
std::vector<TangentVector> log_batch(
    const ManifoldPoint& base, const std::vector<ManifoldPoint>& targets,
    AntipodalPolicy policy = AntipodalPolicy::Error,
    std::vector<double>* norms = nullptr);

/// Point on the constant-speed geodesic with g(0) = x, g(1) = y; t outside
/// [0, 1] extrapolates (used by Schild's ladder).
ManifoldPoint geodesic_point(const ManifoldPoint& x, const ManifoldPoint& y,
                             double t,
                             AntipodalPolicy policy = AntipodalPolicy::Error);

ManifoldPoint midpoint(const ManifoldPoint& x, const ManifoldPoint& y,
                       AntipodalPolicy policy = AntipodalPolicy::Error);

TangentVector parallel_transport(const ManifoldPoint& from,
                                 const ManifoldPoint& to,
                                 const TangentVector& v,
                                 AntipodalPolicy policy = AntipodalPolicy::Error);

/// Orthonormal basis of the tangent space at p (deterministic construction).
std::vector<TangentVector> tangent_basis(const ManifoldPoint& p);

// ---- Jacobi eigen-structure ----------------------------------------------

/// Orthonormal eigenbasis of the self-adjoint Jacobi operator along the
/// geodesic through `base` with the given direction; the first vector is
/// tangent to the geodesic and carries eigenvalue 0.
struct JacobiEigenFrame {
  ManifoldPoint base;
  TangentVector direction;
  std::vector<TangentVector> vectors;
  std::vector<double> eigenvalues;
};

JacobiEigenFrame jacobi_eigenframe(const ManifoldPoint& base,
                                   const TangentVector& direction);

}  // namespace mvr
