#include "mvr/differentials.hpp"

#include <cmath>

namespace mvr {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
/// Below this geodesic distance the Jacobi maps are evaluated in their flat
/// limit (f1 = 1, f2 = -1, transport = identity in chart coordinates).
constexpr double kFlatLimit = 1e-9;

Eigen::Matrix3d spd_sqrt_of(const ManifoldPoint& p, bool inverse) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(spd_to_matrix(p));
  Eigen::Vector3d r = es.eigenvalues().array().sqrt();
  if (inverse) r = r.cwiseInverse();
  return es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

TangentChart::TangentChart(const ManifoldPoint& base)
    : base_(base), dim_(base.kind.dim()) {
  if (base.kind.tag == ManifoldTag::Spd3) {
    sqrt_ = spd_sqrt_of(base, false);
    isqrt_ = spd_sqrt_of(base, true);
  } else {
    basis_ = tangent_basis(base);
  }
}

Eigen::VectorXd TangentChart::to_coords(const TangentVector& w) const {
  if (w.base.kind != base_.kind)
    throw KindMismatch("TangentChart: vector from another manifold");
  Eigen::VectorXd c(dim_);
  switch (base_.kind.tag) {
    case ManifoldTag::Circle:
    case ManifoldTag::Euclidean:
      for (int i = 0; i < dim_; ++i) c(i) = w.v(i);
      return c;
    case ManifoldTag::Sphere2:
      for (int i = 0; i < 2; ++i) c(i) = basis_[i].v.dot(w.v);
      return c;
    case ManifoldTag::Spd3: {
      const Eigen::Matrix3d hat = isqrt_ * sym_to_matrix(w.v) * isqrt_;
      const double s = std::sqrt(2.0);
      c << hat(0, 0), hat(1, 1), hat(2, 2), s * hat(0, 1), s * hat(0, 2),
          s * hat(1, 2);
      return c;
    }
  }
  throw InvalidValue("TangentChart: unknown manifold kind");
}

TangentVector TangentChart::from_coords(const Eigen::VectorXd& c) const {
  switch (base_.kind.tag) {
    case ManifoldTag::Circle:
    case ManifoldTag::Euclidean: {
      SmallVec v(dim_);
      for (int i = 0; i < dim_; ++i) v(i) = c(i);
      return TangentVector{base_, v};
    }
    case ManifoldTag::Sphere2: {
      SmallVec v = SmallVec::Zero(3);
      for (int i = 0; i < 2; ++i) v += c(i) * basis_[i].v;
      return TangentVector{base_, v};
    }
    case ManifoldTag::Spd3: {
      const double s = 1.0 / std::sqrt(2.0);
      Eigen::Matrix3d hat;
      hat << c(0), s * c(3), s * c(4),
             s * c(3), c(1), s * c(5),
             s * c(4), s * c(5), c(2);
      return TangentVector{base_, sym_from_matrix(sqrt_ * hat * sqrt_)};
    }
  }
  throw InvalidValue("TangentChart: unknown manifold kind");
}

double f1(double lambda, double d) {
  if (lambda == 0.0) return 1.0;
  if (lambda > 0.0) {
    const double sl = std::sqrt(lambda);
    if (d >= kPi / sl)
      throw ConjugatePoint("f1: geodesic reaches a conjugate point");
    const double x = sl * d;
    if (x == 0.0) return 1.0;
    return x / std::sin(x);
  }
  const double x = std::sqrt(-lambda) * d;
  if (x == 0.0) return 1.0;
  return x / std::sinh(x);
}

double f2(double lambda, double d) {
  if (lambda == 0.0) return -1.0;
  if (lambda > 0.0) {
    const double sl = std::sqrt(lambda);
    if (d >= kPi / sl)
      throw ConjugatePoint("f2: geodesic reaches a conjugate point");
    const double x = sl * d;
    if (x == 0.0) return -1.0;
    return -x * std::cos(x) / std::sin(x);
  }
  const double x = std::sqrt(-lambda) * d;
  if (x == 0.0) return -1.0;
  return -x * std::cosh(x) / std::sinh(x);
}

TangentVector grad_dist_p(const ManifoldPoint& y, const ManifoldPoint& f,
                          double p, AntipodalPolicy policy) {
  if (p < 1.0) throw InvalidValue("grad_dist_p: p must be >= 1");
  const TangentVector l = log_map(y, f, policy);
  const double d = norm(l);
  if (d < 1e-13) {
    if (p <= 1.0)
      throw SingularGradient("grad_dist_p: dist gradient singular at y = f");
    return zero_tangent(y);
  }
  TangentVector g = l;
  g.v *= -p * std::pow(d, p - 2.0);
  return g;
}

namespace {

/// Unit vector in R^3 orthogonal to u (same seeding rule as the manifold
/// module's tangent constructions).
Eigen::Vector3d orthogonal_unit3(const Eigen::Vector3d& u) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(u(i)) < std::abs(u(k))) k = i;
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e(k) = 1.0;
  return (e - u.dot(e) * u).normalized();
}

/// Chart coordinates of a whitened symmetric matrix (inverse of the packing
/// in TangentChart::from_coords).
Eigen::Matrix<double, 6, 1> pack_sym(const Eigen::Matrix3d& g) {
  const double s = std::sqrt(2.0);
  Eigen::Matrix<double, 6, 1> c;
  c << g(0, 0), g(1, 1), g(2, 2), s * g(0, 1), s * g(0, 2), s * g(1, 2);
  return c;
}

/// Fused Spd3 assembly: one eigendecomposition of the whitened target
/// yields the log (distance and direction), the Jacobi eigenframe, and the
/// transport factor at once.
void assemble_spd_context(MeanDifferentialContext& ctx) {
  const Eigen::Matrix3d& sq = ctx.chart.spd_sqrt();
  const Eigen::Matrix3d& isq = ctx.chart.spd_isqrt();
  ctx.spd_transport.assign(ctx.points.size(), Eigen::Matrix3d::Identity());

  for (std::size_t j = 0; j < ctx.points.size(); ++j) {
    if (ctx.weights[j] == 0.0) continue;
    const Eigen::Matrix3d y_raw = isq * sym_to_matrix(ctx.points[j].x) * isq;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(
        0.5 * (y_raw + y_raw.transpose()));
    const Eigen::Vector3d s = es.eigenvalues();
    if (s(0) <= 0.0)
      throw InvalidValue("mean context: Spd3 point is not positive definite");
    const Eigen::Matrix3d q = es.eigenvectors();
    const Eigen::Vector3d v = s.array().log();
    const double dj = v.norm();
    ctx.distances[j] = dj;
    ctx.spd_transport[j] =
        sq * q * s.array().sqrt().matrix().asDiagonal() * q.transpose() * isq;
    if (dj < kFlatLimit) {
      ctx.l_star -= ctx.weights[j] * Eigen::MatrixXd::Identity(6, 6);
      continue;
    }

    // Flat directions: diagonal dyads rotated so the first one is the
    // geodesic direction; curved directions: symmetrized off-diagonal dyads
    // with eigenvalue -((v_a - v_b)/|v|)^2 / 4.
    const Eigen::Vector3d u = v / dj;
    Eigen::Matrix3d rot;
    rot.col(0) = u;
    rot.col(1) = orthogonal_unit3(u);
    rot.col(2) = u.cross(rot.col(1));

    Eigen::MatrixXd phi(6, 6);
    Eigen::VectorXd eigs = Eigen::VectorXd::Zero(6);
    for (int k = 0; k < 3; ++k) {
      Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
      for (int a = 0; a < 3; ++a)
        g += rot(a, k) * (q.col(a) * q.col(a).transpose());
      phi.col(k) = pack_sym(g);
    }
    const double inv_s2 = 1.0 / std::sqrt(2.0);
    int col = 3;
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b, ++col) {
        const Eigen::Matrix3d g =
            inv_s2 * (q.col(a) * q.col(b).transpose() +
                      q.col(b) * q.col(a).transpose());
        phi.col(col) = pack_sym(g);
        const double diff = (v(a) - v(b)) / dj;
        eigs(col) = -0.25 * diff * diff;
      }
    }
    Eigen::VectorXd f2v(6);
    for (int n = 0; n < 6; ++n) f2v(n) = f2(eigs(n), dj);
    ctx.l_star +=
        ctx.weights[j] * (phi * f2v.asDiagonal() * phi.transpose());
    ctx.frame_coords[j] = std::move(phi);
    ctx.frame_eigs[j] = std::move(eigs);
  }
}

}  // namespace

MeanDifferentialContext make_mean_context(
    const std::vector<ManifoldPoint>& points,
    const std::vector<double>& weights, const ManifoldPoint& m,
    AntipodalPolicy policy) {
  if (points.size() != weights.size())
    throw InvalidValue("make_mean_context: points/weights size mismatch");
  MeanDifferentialContext ctx{m,       points, weights, {}, TangentChart(m),
                              {},      {},     {},      Eigen::MatrixXd()};
  const int d = ctx.chart.dim();
  ctx.l_star = Eigen::MatrixXd::Zero(d, d);
  ctx.distances.resize(points.size(), 0.0);
  ctx.frame_coords.resize(points.size());
  ctx.frame_eigs.resize(points.size());

  if (m.kind.tag == ManifoldTag::Spd3) {
    assemble_spd_context(ctx);
    return ctx;
  }

  for (std::size_t j = 0; j < points.size(); ++j) {
    if (weights[j] == 0.0) continue;
    const double dj = dist(m, points[j]);
    ctx.distances[j] = dj;
    if (dj < kFlatLimit) {
      ctx.l_star -= weights[j] * Eigen::MatrixXd::Identity(d, d);
      continue;
    }
    const TangentVector dir = log_map(m, points[j], policy);
    const JacobiEigenFrame frame = jacobi_eigenframe(m, dir);
    Eigen::MatrixXd phi(d, d);
    Eigen::VectorXd eigs(d);
    for (int n = 0; n < d; ++n) {
      phi.col(n) = ctx.chart.to_coords(frame.vectors[n]);
      eigs(n) = frame.eigenvalues[n];
    }
    Eigen::VectorXd f2v(d);
    for (int n = 0; n < d; ++n) f2v(n) = f2(eigs(n), dj);
    ctx.l_star += weights[j] * (phi * f2v.asDiagonal() * phi.transpose());
    ctx.frame_coords[j] = std::move(phi);
    ctx.frame_eigs[j] = std::move(eigs);
  }
  return ctx;
}

TangentVector adjoint_Rj(const MeanDifferentialContext& ctx, int j0,
                         const TangentVector& w, AntipodalPolicy policy) {
  const double a = ctx.weights[j0];
  if (a == 0.0) return zero_tangent(ctx.points[j0]);
  const bool spd = !ctx.spd_transport.empty();

  if (ctx.distances[j0] < kFlatLimit) {
    // Flat limit: f1 = 1 and the transport over a vanishing geodesic is the
    // identity in chart coordinates.
    TangentVector out{ctx.points[j0], w.v};
    out.v *= a;
    return out;
  }
  const Eigen::MatrixXd& phi = ctx.frame_coords[j0];
  const Eigen::VectorXd& eigs = ctx.frame_eigs[j0];
  const double dj = ctx.distances[j0];
  Eigen::VectorXd alpha = phi.transpose() * ctx.chart.to_coords(w);
  for (int n = 0; n < alpha.size(); ++n) alpha(n) *= f1(eigs(n), dj);
  const TangentVector at_m = ctx.chart.from_coords(phi * alpha);
  if (spd) {
    const Eigen::Matrix3d& e = ctx.spd_transport[j0];
    const Eigen::Matrix3d moved = e * sym_to_matrix(at_m.v) * e.transpose();
    TangentVector out{ctx.points[j0],
                      sym_from_matrix(0.5 * (moved + moved.transpose()))};
    out.v *= a;
    return out;
  }
  TangentVector moved = parallel_transport(ctx.m, ctx.points[j0], at_m, policy);
  moved.v *= a;
  return moved;
}

TangentVector apply_L_adjoint_inverse(const MeanDifferentialContext& ctx,
                                      const TangentVector& w) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      ctx.l_star, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(sv.size() - 1) < 1e-12 * sv(0))
    throw SingularL("apply_L_adjoint_inverse: L* is numerically singular");
  const Eigen::VectorXd x = svd.solve(ctx.chart.to_coords(w));
  return ctx.chart.from_coords(x);
}

MeanOptions context_mean_options(AntipodalPolicy policy) {
  MeanOptions o;
  o.max_iters = 400;
  o.grad_tol = 1e-10;
  o.antipodal = policy;
  return o;
}

std::vector<TangentVector> grad_dist_mean_p(
    const std::vector<ManifoldPoint>& pts, const std::vector<double>& weights,
    const ManifoldPoint& f, double p, AntipodalPolicy policy,
    const ManifoldPoint* mean_hint) {
  if (p < 1.0) throw InvalidValue("grad_dist_mean_p: p must be >= 1");

  WeightVector a;
  a.weights = weights;
  MeanOptions mo = context_mean_options(policy);
  if (mean_hint) mo.init = *mean_hint;
  const ManifoldPoint m = weighted_mean_nearest(pts, a, f, mo);

  std::vector<TangentVector> grads;
  grads.reserve(pts.size());
  const TangentVector v = log_map(m, f, policy);
  const double d = norm(v);

  if (d == 0.0) {
    // p > 1: the gradient of dist^p vanishes at y = f; p = 1: zero
    // subgradient convention.
    for (const auto& pt : pts) grads.push_back(zero_tangent(pt));
    return grads;
  }

  const MeanDifferentialContext ctx = make_mean_context(pts, weights, m, policy);
  TangentVector scaled = v;
  scaled.v *= p * std::pow(d, p - 2.0);
  const TangentVector z = apply_L_adjoint_inverse(ctx, scaled);

  for (std::size_t j = 0; j < pts.size(); ++j) {
    if (weights[j] == 0.0) {
      grads.push_back(zero_tangent(pts[j]));
      continue;
    }
    grads.push_back(adjoint_Rj(ctx, static_cast<int>(j), z, policy));
  }
  return grads;
}

std::vector<std::pair<int, TangentVector>> grad_data_atom(
    const Signal& u, const MeasurementMatrix::Row& row,
    const ManifoldPoint& f_i, double p, AntipodalPolicy policy) {
  std::vector<ManifoldPoint> pts;
  std::vector<double> weights;
  std::vector<int> cols;
  pts.reserve(row.size());
  for (const auto& [j, wgt] : row) {
    pts.push_back(u.data[j]);
    weights.push_back(wgt);
    cols.push_back(j);
  }
  const std::vector<TangentVector> g =
      grad_dist_mean_p(pts, weights, f_i, p, policy);
  std::vector<std::pair<int, TangentVector>> grads;
  for (std::size_t j = 0; j < pts.size(); ++j)
    if (weights[j] != 0.0) grads.emplace_back(cols[j], g[j]);
  return grads;
}

}  // namespace mvr
