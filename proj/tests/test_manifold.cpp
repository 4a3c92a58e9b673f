#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvr/manifold.hpp"
#include "test_util.hpp"

using namespace mvr;
using testutil::all_kinds;
using testutil::random_nearby;
using testutil::random_point;
using testutil::random_tangent;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

TEST_CASE("circle distances and wrapping") {
  CHECK(dist(circle_point(0.0), circle_point(kPi / 2)) == doctest::Approx(kPi / 2));
  // The shorter arc between 3pi/4 and -3pi/4 wraps through pi.
  CHECK(dist(circle_point(3 * kPi / 4), circle_point(-3 * kPi / 4)) ==
        doctest::Approx(kPi / 2));
  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi) == doctest::Approx(kPi));
}

TEST_CASE("spd distance for commuting matrices") {
  const ManifoldPoint i3 = spd_point(Eigen::Matrix3d::Identity());
  const ManifoldPoint ei3 =
      spd_point(std::exp(1.0) * Eigen::Matrix3d::Identity());
  CHECK(dist(i3, ei3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("exp basics") {
  RandomStream rs(11);
  for (const auto& kind : all_kinds()) {
    const ManifoldPoint x = random_point(kind, rs);
    CHECK(dist(exp_map(x, zero_tangent(x)), x) == doctest::Approx(0.0));
  }

  // Great-circle arc from the north pole reaches the equator.
  const ManifoldPoint north = sphere_point({0.0, 0.0, 1.0});
  SmallVec v(3);
  v << kPi / 2, 0.0, 0.0;
  const ManifoldPoint eq = exp_map(north, make_tangent(north, v));
  CHECK(eq.x(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eq.x(2) == doctest::Approx(0.0).epsilon(1e-12));

  // At the identity the metric exponential is the matrix exponential.
  const ManifoldPoint i3 = spd_point(Eigen::Matrix3d::Identity());
  Eigen::Matrix3d w;
  w << 0.3, 0.1, 0.0, 0.1, -0.2, 0.05, 0.0, 0.05, 0.4;
  const ManifoldPoint e = exp_map(i3, make_tangent(i3, sym_from_matrix(w)));
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(w);
  const Eigen::Matrix3d expw = es.eigenvectors() *
                               es.eigenvalues().array().exp().matrix().asDiagonal() *
                               es.eigenvectors().transpose();
  CHECK((spd_to_matrix(e) - expw).norm() == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("log basics and the antipodal policy") {
  RandomStream rs(12);
  for (const auto& kind : all_kinds()) {
    const ManifoldPoint x = random_point(kind, rs);
    CHECK(norm(log_map(x, x)) == doctest::Approx(0.0));
  }
  CHECK(log_map(circle_point(0.0), circle_point(kPi / 2)).v(0) ==
        doctest::Approx(kPi / 2));

  CHECK_THROWS_AS((void)log_map(circle_point(0.0), circle_point(kPi)),
                  AntipodalPoint);
  const TangentVector l = log_map(circle_point(0.0), circle_point(kPi),
                                  AntipodalPolicy::DeterministicPositive);
  CHECK(l.v(0) == doctest::Approx(kPi));

  CHECK_THROWS_AS(
      (void)log_map(sphere_point({0, 0, 1}), sphere_point({0, 0, -1})),
      AntipodalPoint);
}

TEST_CASE("exp/log round trips within the injectivity radius") {
  RandomStream rs(13);
  for (const auto& kind : all_kinds()) {
    const bool bounded =
        kind.tag == ManifoldTag::Sphere2 || kind.tag == ManifoldTag::Circle;
    for (int it = 0; it < 1000; ++it) {
      const ManifoldPoint x = random_point(kind, rs);
      const ManifoldPoint y =
          bounded ? random_nearby(x, rs, 3.0) : random_point(kind, rs);
      if (bounded && dist(x, y) > kPi - 1e-3) continue;

      const TangentVector l = log_map(x, y);
      CHECK(norm(l) == doctest::Approx(dist(x, y)).epsilon(1e-9));
      CHECK(dist(exp_map(x, l), y) <= 1e-9);

      TangentVector v = random_tangent(x, rs, 0.6);
      if (bounded && norm(v) > kPi - 1e-3) continue;
      const ManifoldPoint z = exp_map(x, v);
      const TangentVector back = log_map(x, z);
      CHECK((back.v - v.v).norm() <= 1e-9 * std::max(1.0, double(v.v.norm())));
    }
  }
}

TEST_CASE("geodesic points") {
  RandomStream rs(14);
  for (const auto& kind : all_kinds()) {
    const ManifoldPoint x = random_point(kind, rs);
    const ManifoldPoint y = random_nearby(x, rs, 1.5);
    const ManifoldPoint mid = geodesic_point(x, y, 0.5);
    CHECK(dist(mid, x) == doctest::Approx(dist(mid, y)).epsilon(1e-9));
    const double d = dist(x, y);
    for (double t : {0.0, 0.25, 0.75, 1.0}) {
      const ManifoldPoint g = geodesic_point(x, y, t);
      CHECK(dist(x, g) == doctest::Approx(t * d).epsilon(1e-9));
    }
  }
  CHECK(geodesic_point(circle_point(0.0), circle_point(1.0), 2.0).x(0) ==
        doctest::Approx(2.0));
  // Great circles close up: extrapolation stays on the unit sphere.
  RandomStream rs2(15);
  const ManifoldPoint p = random_point(ManifoldKind::sphere2(), rs2);
  const ManifoldPoint q = random_nearby(p, rs2, 1.0);
  const ManifoldPoint far = geodesic_point(p, q, 2.0);
  CHECK(Eigen::Vector3d(far.x).norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("parallel transport is a linear isometry") {
  RandomStream rs(16);
  for (const auto& kind : all_kinds()) {
    for (int it = 0; it < 50; ++it) {
      const ManifoldPoint x = random_point(kind, rs);
      const ManifoldPoint y = random_nearby(x, rs, 1.4);
      const TangentVector v = random_tangent(x, rs);
      const TangentVector w = random_tangent(x, rs);
      const TangentVector tv = parallel_transport(x, y, v);
      const TangentVector tw = parallel_transport(x, y, w);
      CHECK(inner(tv, tw) == doctest::Approx(inner(v, w)).epsilon(1e-10));

      const TangentVector same = parallel_transport(x, x, v);
      CHECK((same.v - v.v).norm() == doctest::Approx(0.0));
    }
  }

  // Euclidean transport leaves components untouched.
  const ManifoldPoint a = euclidean_point(Eigen::Vector3d(1, 2, 3));
  const ManifoldPoint b = euclidean_point(Eigen::Vector3d(-4, 0, 9));
  SmallVec comp(3);
  comp << 0.5, -1.5, 2.0;
  CHECK((parallel_transport(a, b, make_tangent(a, comp)).v - comp).norm() ==
        doctest::Approx(0.0));

  // Geodesics are auto-parallel: the tangent transports onto itself.
  RandomStream rs2(17);
  const ManifoldPoint x = random_point(ManifoldKind::sphere2(), rs2);
  const ManifoldPoint y = random_nearby(x, rs2, 1.2);
  const TangentVector t0 = log_map(x, y);
  const TangentVector moved = parallel_transport(x, y, t0);
  TangentVector t1 = log_map(y, x);
  t1.v *= -1.0;
  CHECK((moved.v - t1.v).norm() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("jacobi eigenframes: structure") {
  RandomStream rs(18);
  for (const auto& kind : all_kinds()) {
    for (int it = 0; it < 20; ++it) {
      const ManifoldPoint x = random_point(kind, rs);
      const TangentVector dir = random_tangent(x, rs);
      if (norm(dir) < 1e-8) continue;
      const JacobiEigenFrame fr = jacobi_eigenframe(x, dir);
      REQUIRE(static_cast<int>(fr.vectors.size()) == kind.dim());

      // Orthonormal, first vector tangent to the geodesic with eigenvalue 0.
      for (std::size_t a = 0; a < fr.vectors.size(); ++a)
        for (std::size_t b = 0; b <= a; ++b)
          CHECK(inner(fr.vectors[a], fr.vectors[b]) ==
                doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
      TangentVector unit = dir;
      unit.v /= norm(dir);
      CHECK(inner(fr.vectors[0], unit) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(fr.eigenvalues[0] == doctest::Approx(0.0));

      for (double lam : fr.eigenvalues) {
        switch (kind.tag) {
          case ManifoldTag::Circle:
          case ManifoldTag::Euclidean:
            CHECK(lam == doctest::Approx(0.0));
            break;
          case ManifoldTag::Sphere2:
            CHECK((std::abs(lam) < 1e-12 || std::abs(lam - 1.0) < 1e-12));
            break;
          case ManifoldTag::Spd3:
            CHECK(lam <= 1e-15);
            break;
        }
      }
    }
  }
  const ManifoldPoint c = circle_point(0.3);
  CHECK_THROWS_AS((void)jacobi_eigenframe(c, zero_tangent(c)), InvalidValue);
}

TEST_CASE("jacobi eigenframes against geodesic-variation fields") {
  // J(t) = d/ds exp_x(t (e + s w))|_0 is the Jacobi field with J(0) = 0 and
  // J'(0) = w; on a symmetric space it must equal c(t) pt(w) with
  // c'' + lambda c = 0. The variation is computed from exp alone, so this
  // checks the eigen-structure against an independent path.
  RandomStream rs(19);
  const double h = 1e-5;
  for (const auto& kind :
       {ManifoldKind::sphere2(), ManifoldKind::spd3()}) {
    for (int it = 0; it < 20; ++it) {
      const ManifoldPoint x = random_point(kind, rs);
      TangentVector e = random_tangent(x, rs);
      e.v /= norm(e);
      const JacobiEigenFrame fr = jacobi_eigenframe(x, e);
      for (std::size_t n = 0; n < fr.vectors.size(); ++n) {
        const TangentVector& w = fr.vectors[n];
        const double lam = fr.eigenvalues[n];
        for (double t : {0.4, 0.9}) {
          TangentVector plus = e, minus = e;
          plus.v = t * (e.v + h * w.v);
          minus.v = t * (e.v - h * w.v);
          const ManifoldPoint gp = exp_map(x, plus);
          const ManifoldPoint gm = exp_map(x, minus);
          const SmallVec jfd = (gp.x - gm.x) / (2.0 * h);

          double c;
          if (std::abs(lam) < 1e-14) {
            c = t;
          } else if (lam > 0.0) {
            c = std::sin(std::sqrt(lam) * t) / std::sqrt(lam);
          } else {
            c = std::sinh(std::sqrt(-lam) * t) / std::sqrt(-lam);
          }
          TangentVector et = e;
          et.v *= t;
          const ManifoldPoint gt = exp_map(x, et);
          TangentVector pred = parallel_transport(x, gt, w);
          pred.v *= c;
          CHECK((SmallVec(jfd - pred.v)).norm() <=
                1e-4 * std::max(1.0, pred.v.norm()));
        }
      }
    }
  }
}

TEST_CASE("dist symmetry and triangle inequality") {
  RandomStream rs(20);
  for (const auto& kind : all_kinds()) {
    for (int it = 0; it < 200; ++it) {
      const ManifoldPoint a = random_point(kind, rs);
      const ManifoldPoint b = random_point(kind, rs);
      const ManifoldPoint c = random_point(kind, rs);
      CHECK(dist(a, b) == doctest::Approx(dist(b, a)).epsilon(1e-9));
      CHECK(dist(a, c) <= dist(a, b) + dist(b, c) + 1e-9);
    }
  }
}

TEST_CASE("point validation") {
  CHECK_THROWS_AS((void)sphere_point({0.0, 0.0, 2.0}), InvalidValue);
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(2, 2) = -1.0;
  CHECK_THROWS_AS((void)spd_point(bad), InvalidValue);
  CHECK_THROWS_AS(ManifoldKind::euclidean(0), InvalidValue);
  CHECK_THROWS_AS((void)dist(circle_point(0.0), sphere_point({1, 0, 0})),
                  KindMismatch);
}
