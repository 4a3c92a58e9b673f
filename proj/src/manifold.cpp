#include "mvr/manifold.hpp"

#include <cmath>

namespace mvr {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

void require_same_kind(const ManifoldKind& a, const ManifoldKind& b,
                       const char* op) {
  if (a != b) throw KindMismatch(std::string(op) + ": manifold kinds differ");
}

struct SpdChart {
  Eigen::Matrix3d sqrt;
  Eigen::Matrix3d isqrt;
};

SpdChart spd_chart(const Eigen::Matrix3d& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(b);
  const Eigen::Vector3d ev = es.eigenvalues();
  if (ev(0) <= Tols::spd_positive)
    throw InvalidValue("Spd3 point is not positive definite");
  const Eigen::Vector3d r = ev.array().sqrt();
  SpdChart c;
  c.sqrt = es.eigenvectors() * r.asDiagonal() * es.eigenvectors().transpose();
  c.isqrt = es.eigenvectors() * r.cwiseInverse().asDiagonal() *
            es.eigenvectors().transpose();
  return c;
}

Eigen::Matrix3d sym_expm(const Eigen::Matrix3d& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s);
  return es.eigenvectors() *
         es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

Eigen::Matrix3d sym_logm(const Eigen::Matrix3d& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s);
  if (es.eigenvalues()(0) <= 0.0)
    throw InvalidValue("matrix logarithm of a non-positive matrix");
  return es.eigenvectors() *
         es.eigenvalues().array().log().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

/// Unit vector in R^3 orthogonal to x (deterministic: seeds from the
/// coordinate axis least aligned with x).
Eigen::Vector3d orthogonal_unit(const Eigen::Vector3d& x) {
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(x(i)) < std::abs(x(k))) k = i;
  Eigen::Vector3d e = Eigen::Vector3d::Zero();
  e(k) = 1.0;
  return (e - x.dot(e) * x).normalized();
}

}  // namespace

// ---- kinds & constructors -------------------------------------------------

ManifoldKind ManifoldKind::euclidean(int dim) {
  if (dim < 1) throw InvalidValue("Euclidean dimension must be >= 1");
  if (dim > kMaxEuclideanDim)
    throw InvalidValue("Euclidean dimension exceeds the supported cap");
  return {ManifoldTag::Euclidean, dim};
}

int ManifoldKind::dim() const {
  switch (tag) {
    case ManifoldTag::Circle: return 1;
    case ManifoldTag::Sphere2: return 2;
    case ManifoldTag::Spd3: return 6;
    case ManifoldTag::Euclidean: return euclidean_dim;
  }
  return 0;
}

int ManifoldKind::ambient_size() const {
  switch (tag) {
    case ManifoldTag::Circle: return 1;
    case ManifoldTag::Sphere2: return 3;
    case ManifoldTag::Spd3: return 6;
    case ManifoldTag::Euclidean: return euclidean_dim;
  }
  return 0;
}

double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

ManifoldPoint circle_point(double angle) {
  ManifoldPoint p{ManifoldKind::circle(), SmallVec(1)};
  p.x(0) = wrap_angle(angle);
  return p;
}

ManifoldPoint sphere_point(const Eigen::Vector3d& u) {
  if (std::abs(u.norm() - 1.0) > Tols::sphere_unit)
    throw InvalidValue("Sphere2 point is not unit length");
  ManifoldPoint p{ManifoldKind::sphere2(), SmallVec(3)};
  p.x = u.normalized();
  return p;
}

Eigen::Matrix3d sym_to_matrix(const SmallVec& six) {
  Eigen::Matrix3d m;
  m << six(0), six(1), six(2),
       six(1), six(3), six(4),
       six(2), six(4), six(5);
  return m;
}

SmallVec sym_from_matrix(const Eigen::Matrix3d& s) {
  SmallVec v(6);
  v << s(0, 0), s(0, 1), s(0, 2), s(1, 1), s(1, 2), s(2, 2);
  return v;
}

ManifoldPoint spd_point(const Eigen::Matrix3d& m) {
  const Eigen::Matrix3d s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(s);
  if (es.eigenvalues()(0) <= Tols::spd_positive)
    throw InvalidValue("Spd3 point has a non-positive eigenvalue");
  ManifoldPoint p{ManifoldKind::spd3(), sym_from_matrix(s)};
  return p;
}

ManifoldPoint euclidean_point(const Eigen::VectorXd& x) {
  const ManifoldKind kind = ManifoldKind::euclidean(static_cast<int>(x.size()));
  ManifoldPoint p{kind, SmallVec(x.size())};
  p.x = x;
  return p;
}

ManifoldPoint make_point(const ManifoldKind& kind, const SmallVec& coords) {
  if (coords.size() != kind.ambient_size())
    throw InvalidValue("coordinate count does not match manifold chart");
  switch (kind.tag) {
    case ManifoldTag::Circle: return circle_point(coords(0));
    case ManifoldTag::Sphere2: return sphere_point(Eigen::Vector3d(coords));
    case ManifoldTag::Spd3: return spd_point(sym_to_matrix(coords));
    case ManifoldTag::Euclidean: {
      ManifoldPoint p{kind, coords};
      return p;
    }
  }
  throw InvalidValue("unknown manifold kind");
}

Eigen::Matrix3d spd_to_matrix(const ManifoldPoint& p) {
  return sym_to_matrix(p.x);
}

TangentVector make_tangent(const ManifoldPoint& base, const SmallVec& comps) {
  if (comps.size() != base.kind.ambient_size())
    throw InvalidValue("tangent component count does not match chart");
  if (base.kind.tag == ManifoldTag::Sphere2) {
    const Eigen::Vector3d b(base.x);
    const Eigen::Vector3d v(comps);
    if (std::abs(b.dot(v)) > Tols::tangent_orthogonal * std::max(1.0, v.norm()))
      throw InvalidValue("Sphere2 tangent is not orthogonal to its base");
  }
  return TangentVector{base, comps};
}

TangentVector zero_tangent(const ManifoldPoint& base) {
  return TangentVector{base, SmallVec::Zero(base.kind.ambient_size())};
}

// ---- metric ----------------------------------------------------------------

double dist(const ManifoldPoint& x, const ManifoldPoint& y) {
  require_same_kind(x.kind, y.kind, "dist");
  switch (x.kind.tag) {
    case ManifoldTag::Circle:
      return std::abs(wrap_angle(x.x(0) - y.x(0)));
    case ManifoldTag::Sphere2: {
      // atan2 form is well-conditioned at both ends of [0, pi].
      const Eigen::Vector3d a(x.x), b(y.x);
      return std::atan2(a.cross(b).norm(), a.dot(b));
    }
    case ManifoldTag::Spd3: {
      const SpdChart c = spd_chart(sym_to_matrix(x.x));
      const Eigen::Matrix3d w = c.isqrt * sym_to_matrix(y.x) * c.isqrt;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (w + w.transpose()));
      if (es.eigenvalues()(0) <= 0.0)
        throw InvalidValue("dist: Spd3 argument is not positive definite");
      return es.eigenvalues().array().log().matrix().norm();
    }
    case ManifoldTag::Euclidean:
      return (x.x - y.x).norm();
  }
  return 0.0;
}

double inner(const TangentVector& v, const TangentVector& w) {
  require_same_kind(v.base.kind, w.base.kind, "inner");
  switch (v.base.kind.tag) {
    case ManifoldTag::Circle:
    case ManifoldTag::Euclidean:
      return v.v.dot(w.v);
    case ManifoldTag::Sphere2:
      return v.v.dot(w.v);
    case ManifoldTag::Spd3: {
      // <V, W>_B = tr(B^-1 V B^-1 W)
      const SpdChart c = spd_chart(sym_to_matrix(v.base.x));
      const Eigen::Matrix3d a = c.isqrt * sym_to_matrix(v.v) * c.isqrt;
      const Eigen::Matrix3d b = c.isqrt * sym_to_matrix(w.v) * c.isqrt;
      return (a.transpose() * b).trace();
    }
  }
  return 0.0;
}

double norm(const TangentVector& v) { return std::sqrt(inner(v, v)); }

// ---- exp / log / geodesics --------------------------------------------------

ManifoldPoint exp_map(const ManifoldPoint& base, const TangentVector& v) {
  require_same_kind(base.kind, v.base.kind, "exp");
  switch (base.kind.tag) {
    case ManifoldTag::Circle:
      return circle_point(base.x(0) + v.v(0));
    case ManifoldTag::Euclidean: {
      ManifoldPoint p{base.kind, base.x + v.v};
      return p;
    }
    case ManifoldTag::Sphere2: {
      const Eigen::Vector3d b(base.x);
      const Eigen::Vector3d t(v.v);
      const double n = t.norm();
      if (n == 0.0) return base;
      const Eigen::Vector3d u =
          std::cos(n) * b + std::sin(n) * (t / n);
      return sphere_point(u.normalized());
    }
    case ManifoldTag::Spd3: {
      const SpdChart c = spd_chart(sym_to_matrix(base.x));
      const Eigen::Matrix3d w = c.isqrt * sym_to_matrix(v.v) * c.isqrt;
      const Eigen::Matrix3d r =
          c.sqrt * sym_expm(0.5 * (w + w.transpose())) * c.sqrt;
      return spd_point(r);
    }
  }
  throw InvalidValue("exp: unknown manifold kind");
}

TangentVector log_map(const ManifoldPoint& base, const ManifoldPoint& target,
                      AntipodalPolicy policy) {
  require_same_kind(base.kind, target.kind, "log");
  switch (base.kind.tag) {
    case ManifoldTag::Circle: {
      double d = wrap_angle(target.x(0) - base.x(0));
      if (std::abs(std::abs(d) - kPi) < 1e-15) {
        if (policy == AntipodalPolicy::Error)
          throw AntipodalPoint("log: antipodal circle points");
        d = kPi;
      }
      SmallVec c(1);
      c(0) = d;
      return TangentVector{base, c};
    }
    case ManifoldTag::Euclidean:
      return TangentVector{base, target.x - base.x};
    case ManifoldTag::Sphere2: {
      const Eigen::Vector3d b(base.x);
      const Eigen::Vector3d t(target.x);
      const double c = std::clamp(b.dot(t), -1.0, 1.0);
      const double d = std::atan2(b.cross(t).norm(), b.dot(t));
      if (d == 0.0) return zero_tangent(base);
      Eigen::Vector3d perp = t - c * b;
      const double pn = perp.norm();
      if (pn < 1e-14) {
        // sin(d) vanishes at both ends of [0, pi]: coincident points give a
        // zero tangent, antipodal ones hit the cut locus.
        if (d < 1.0) return zero_tangent(base);
        if (policy == AntipodalPolicy::Error)
          throw AntipodalPoint("log: antipodal sphere points");
        perp = orthogonal_unit(b);
        SmallVec v(3);
        v = kPi * perp;
        return TangentVector{base, v};
      }
      SmallVec v(3);
      v = (d / pn) * perp;
      return TangentVector{base, v};
    }
    case ManifoldTag::Spd3: {
      const SpdChart c = spd_chart(sym_to_matrix(base.x));
      const Eigen::Matrix3d w = c.isqrt * sym_to_matrix(target.x) * c.isqrt;
      const Eigen::Matrix3d l = sym_logm(0.5 * (w + w.transpose()));
      ManifoldPoint b = base;
      return TangentVector{b, sym_from_matrix(c.sqrt * l * c.sqrt)};
    }
  }
  throw InvalidValue("log: unknown manifold kind");
}

std::vector<TangentVector> log_batch(const ManifoldPoint& base,
                                     const std::vector<ManifoldPoint>& targets,
                                     AntipodalPolicy policy,
                                     std::vector<double>* norms) {
  std::vector<TangentVector> out;
  out.reserve(targets.size());
  if (norms) {
    norms->clear();
    norms->reserve(targets.size());
  }
  if (base.kind.tag == ManifoldTag::Spd3) {
    const SpdChart c = spd_chart(sym_to_matrix(base.x));
    for (const auto& t : targets) {
      require_same_kind(base.kind, t.kind, "log");
      const Eigen::Matrix3d w = c.isqrt * sym_to_matrix(t.x) * c.isqrt;
      const Eigen::Matrix3d l = sym_logm(0.5 * (w + w.transpose()));
      if (norms) norms->push_back(l.norm());
      out.push_back(TangentVector{base, sym_from_matrix(c.sqrt * l * c.sqrt)});
    }
    return out;
  }
  for (const auto& t : targets) {
    out.push_back(log_map(base, t, policy));
    if (norms) norms->push_back(out.back().v.norm());
  }
  return out;
}

ManifoldPoint geodesic_point(const ManifoldPoint& x, const ManifoldPoint& y,
                             double t, AntipodalPolicy policy) {
  TangentVector v = log_map(x, y, policy);
  v.v *= t;
  return exp_map(x, v);
}

ManifoldPoint midpoint(const ManifoldPoint& x, const ManifoldPoint& y,
                       AntipodalPolicy policy) {
  return geodesic_point(x, y, 0.5, policy);
}

TangentVector parallel_transport(const ManifoldPoint& from,
                                 const ManifoldPoint& to,
                                 const TangentVector& v,
                                 AntipodalPolicy policy) {
  require_same_kind(from.kind, to.kind, "parallel_transport");
  require_same_kind(from.kind, v.base.kind, "parallel_transport");
  switch (from.kind.tag) {
    case ManifoldTag::Circle:
    case ManifoldTag::Euclidean:
      return TangentVector{to, v.v};
    case ManifoldTag::Sphere2: {
      const Eigen::Vector3d a(from.x);
      const Eigen::Vector3d b(to.x);
      const TangentVector l = log_map(from, to, policy);
      const Eigen::Vector3d u(l.v);
      const double d = u.norm();
      if (d == 0.0) return TangentVector{to, v.v};
      const Eigen::Vector3d e = u / d;
      const Eigen::Vector3d w(v.v);
      const double along = w.dot(e);
      const Eigen::Vector3d rest = w - along * e;
      // Geodesic tangent at the endpoint.
      const Eigen::Vector3d e_to = -std::sin(d) * a + std::cos(d) * e;
      SmallVec r(3);
      r = rest + along * e_to;
      return TangentVector{to, r};
    }
    case ManifoldTag::Spd3: {
      const SpdChart c = spd_chart(sym_to_matrix(from.x));
      const Eigen::Matrix3d wmat =
          c.isqrt * sym_to_matrix(to.x) * c.isqrt;
      const Eigen::Matrix3d w = sym_logm(0.5 * (wmat + wmat.transpose()));
      const Eigen::Matrix3d t = c.sqrt * sym_expm(0.5 * w) * c.isqrt;
      const Eigen::Matrix3d moved = t * sym_to_matrix(v.v) * t.transpose();
      return TangentVector{to, sym_from_matrix(moved)};
    }
  }
  throw InvalidValue("parallel_transport: unknown manifold kind");
}

// ---- tangent bases -----------------------------------------------------------

std::vector<TangentVector> tangent_basis(const ManifoldPoint& p) {
  std::vector<TangentVector> basis;
  switch (p.kind.tag) {
    case ManifoldTag::Circle: {
      SmallVec one(1);
      one(0) = 1.0;
      basis.push_back(TangentVector{p, one});
      return basis;
    }
    case ManifoldTag::Euclidean: {
      const int n = p.kind.euclidean_dim;
      for (int i = 0; i < n; ++i) {
        SmallVec e = SmallVec::Zero(n);
        e(i) = 1.0;
        basis.push_back(TangentVector{p, e});
      }
      return basis;
    }
    case ManifoldTag::Sphere2: {
      const Eigen::Vector3d b(p.x);
      const Eigen::Vector3d e1 = orthogonal_unit(b);
      const Eigen::Vector3d e2 = b.cross(e1);
      SmallVec v1(3), v2(3);
      v1 = e1;
      v2 = e2;
      basis.push_back(TangentVector{p, v1});
      basis.push_back(TangentVector{p, v2});
      return basis;
    }
    case ManifoldTag::Spd3: {
      const SpdChart c = spd_chart(sym_to_matrix(p.x));
      const double s = 1.0 / std::sqrt(2.0);
      Eigen::Matrix3d f[6];
      for (auto& m : f) m.setZero();
      f[0](0, 0) = 1.0;
      f[1](1, 1) = 1.0;
      f[2](2, 2) = 1.0;
      f[3](0, 1) = f[3](1, 0) = s;
      f[4](0, 2) = f[4](2, 0) = s;
      f[5](1, 2) = f[5](2, 1) = s;
      for (const auto& m : f)
        basis.push_back(TangentVector{p, sym_from_matrix(c.sqrt * m * c.sqrt)});
      return basis;
    }
  }
  throw InvalidValue("tangent_basis: unknown manifold kind");
}

// ---- Jacobi eigenframe --------------------------------------------------------

JacobiEigenFrame jacobi_eigenframe(const ManifoldPoint& base,
                                   const TangentVector& direction) {
  require_same_kind(base.kind, direction.base.kind, "jacobi_eigenframe");
  const double dn = norm(direction);
  if (dn == 0.0)
    throw InvalidValue("jacobi_eigenframe: zero direction");

  JacobiEigenFrame frame;
  frame.base = base;
  frame.direction = direction;

  switch (base.kind.tag) {
    case ManifoldTag::Circle: {
      TangentVector e = direction;
      e.v /= dn;
      frame.vectors = {e};
      frame.eigenvalues = {0.0};
      return frame;
    }
    case ManifoldTag::Euclidean: {
      // Flat: any orthonormal basis works; lead with the direction.
      const int n = base.kind.euclidean_dim;
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
      Eigen::VectorXd u = direction.v / dn;
      // Gram-Schmidt against u, then among the survivors.
      std::vector<Eigen::VectorXd> vs;
      vs.push_back(u);
      for (int i = 0; i < n && static_cast<int>(vs.size()) < n; ++i) {
        Eigen::VectorXd c = m.col(i);
        for (const auto& w : vs) c -= w.dot(c) * w;
        const double cn = c.norm();
        if (cn > 1e-10) vs.push_back(c / cn);
      }
      for (const auto& w : vs) {
        SmallVec s(n);
        s = w;
        frame.vectors.push_back(TangentVector{base, s});
        frame.eigenvalues.push_back(0.0);
      }
      return frame;
    }
    case ManifoldTag::Sphere2: {
      const Eigen::Vector3d b(base.x);
      const Eigen::Vector3d e = Eigen::Vector3d(direction.v) / dn;
      const Eigen::Vector3d nrm = b.cross(e);
      SmallVec v1(3), v2(3);
      v1 = e;
      v2 = nrm;
      frame.vectors = {TangentVector{base, v1}, TangentVector{base, v2}};
      frame.eigenvalues = {0.0, 1.0};
      return frame;
    }
    case ManifoldTag::Spd3: {
      const SpdChart c = spd_chart(sym_to_matrix(base.x));
      const Eigen::Matrix3d w_raw =
          c.isqrt * sym_to_matrix(direction.v) * c.isqrt;
      const Eigen::Matrix3d w = 0.5 * (w_raw + w_raw.transpose());
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(w);
      const Eigen::Vector3d ev = es.eigenvalues();
      const Eigen::Matrix3d q = es.eigenvectors();
      const double wn = ev.norm();  // Frobenius norm of the whitened direction

      // Flat subspace: diagonal dyads in the eigenbasis of w, rotated so the
      // first basis vector is the geodesic direction itself.
      Eigen::Vector3d u = ev / wn;
      Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
      {
        // Orthonormal completion of u (columns).
        const Eigen::Vector3d p1 = orthogonal_unit(u);
        const Eigen::Vector3d p2 = u.cross(p1);
        rot.col(0) = u;
        rot.col(1) = p1;
        rot.col(2) = p2;
      }
      for (int j = 0; j < 3; ++j) {
        Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
        for (int a = 0; a < 3; ++a)
          g += rot(a, j) * (q.col(a) * q.col(a).transpose());
        frame.vectors.push_back(
            TangentVector{base, sym_from_matrix(c.sqrt * g * c.sqrt)});
        frame.eigenvalues.push_back(0.0);
      }
      // Off-diagonal dyads: eigenvalue -((v_a - v_b)/|w|)^2 / 4.
      const double s = 1.0 / std::sqrt(2.0);
      for (int a = 0; a < 3; ++a) {
        for (int b2 = a + 1; b2 < 3; ++b2) {
          const Eigen::Matrix3d g =
              s * (q.col(a) * q.col(b2).transpose() +
                   q.col(b2) * q.col(a).transpose());
          const double diff = (ev(a) - ev(b2)) / wn;
          frame.vectors.push_back(
              TangentVector{base, sym_from_matrix(c.sqrt * g * c.sqrt)});
          frame.eigenvalues.push_back(-0.25 * diff * diff);
        }
      }
      return frame;
    }
  }
  throw InvalidValue("jacobi_eigenframe: unknown manifold kind");
}

}  // namespace mvr
