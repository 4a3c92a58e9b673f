#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "mvr/manifold.hpp"
#include "mvr/rng.hpp"
#include "mvr/signal.hpp"

namespace mvr::testutil {

inline ManifoldPoint random_point(const ManifoldKind& kind, RandomStream& rs) {
  switch (kind.tag) {
    case ManifoldTag::Circle:
      return circle_point(rs.next_in(-3.14159265358979, 3.14159265358979));
    case ManifoldTag::Sphere2: {
      Eigen::Vector3d v;
      do {
        v << rs.next_normal(), rs.next_normal(), rs.next_normal();
      } while (v.norm() < 1e-6);
      return sphere_point(v.normalized());
    }
    case ManifoldTag::Spd3: {
      Eigen::Matrix3d g;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) g(r, c) = rs.next_normal();
      const Eigen::Matrix3d q =
          Eigen::HouseholderQR<Eigen::Matrix3d>(g).householderQ();
      Eigen::Vector3d lam;
      for (int i = 0; i < 3; ++i) lam(i) = std::exp(0.6 * rs.next_normal());
      return spd_point(q * lam.asDiagonal() * q.transpose());
    }
    case ManifoldTag::Euclidean: {
      Eigen::VectorXd v(kind.euclidean_dim);
      for (int i = 0; i < kind.euclidean_dim; ++i) v(i) = rs.next_normal();
      return euclidean_point(v);
    }
  }
  throw InvalidValue("random_point: unknown kind");
}

inline TangentVector random_tangent(const ManifoldPoint& p, RandomStream& rs,
                                    double scale = 1.0) {
  TangentVector t = zero_tangent(p);
  for (const auto& e : tangent_basis(p)) t.v += scale * rs.next_normal() * e.v;
  return t;
}

/// Point within geodesic distance < max_d of p.
inline ManifoldPoint random_nearby(const ManifoldPoint& p, RandomStream& rs,
                                   double max_d) {
  TangentVector t = random_tangent(p, rs);
  const double n = norm(t);
  if (n > 0.0) t.v *= (max_d * rs.next_double()) / n;
  return exp_map(p, t);
}

inline Signal random_signal(const ManifoldKind& kind, int n, RandomStream& rs) {
  Signal s;
  s.kind = kind;
  s.shape = {n};
  for (int i = 0; i < n; ++i) s.data.push_back(random_point(kind, rs));
  return s;
}

inline std::vector<ManifoldKind> all_kinds() {
  return {ManifoldKind::circle(), ManifoldKind::sphere2(),
          ManifoldKind::spd3(), ManifoldKind::euclidean(3)};
}

}  // namespace mvr::testutil
