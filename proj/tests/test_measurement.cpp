#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvr/measurement.hpp"
#include "test_util.hpp"

using namespace mvr;
using testutil::random_point;
using testutil::random_signal;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;
}

TEST_CASE("kernel weights") {
  KernelSpec ma{KernelShape::MovingAverage, 7, 1, 1.0};
  for (double w : kernel_weights(ma)) CHECK(w == doctest::Approx(1.0 / 7.0));

  KernelSpec tri{KernelShape::Triangular, 3, 1, 1.0};
  const auto tw = kernel_weights(tri);
  CHECK(tw[0] == doctest::Approx(0.25));
  CHECK(tw[1] == doctest::Approx(0.5));
  CHECK(tw[2] == doctest::Approx(0.25));

  // Normalization oracle: center weight is 1 / sum_k exp(-k^2 / 2).
  KernelSpec g{KernelShape::Gaussian, 7, 1, 1.0};
  const auto gw = kernel_weights(g);
  double z = 0.0;
  for (int k = -3; k <= 3; ++k) z += std::exp(-0.5 * k * k);
  CHECK(gw[3] == doctest::Approx(1.0 / z).epsilon(1e-14));
  double s = 0.0;
  for (std::size_t i = 0; i < gw.size(); ++i) {
    s += gw[i];
    CHECK(gw[i] == doctest::Approx(gw[gw.size() - 1 - i]));  // symmetric
  }
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS((void)kernel_weights(KernelSpec{KernelShape::Gaussian, 4, 1, 1.0}),
                  InvalidValue);
  CHECK_THROWS_AS((void)kernel_weights(KernelSpec{KernelShape::Gaussian, 7, 1, 0.0}),
                  InvalidValue);
}

TEST_CASE("convolution matrices truncate and renormalize at the boundary") {
  KernelSpec ma{KernelShape::MovingAverage, 3, 1, 1.0};
  const MeasurementMatrix m = conv_matrix(ma, {5});
  m.validate();
  REQUIRE(m.n_rows() == 5);
  REQUIRE(m.rows[0].size() == 2);
  CHECK(m.rows[0][0].first == 0);
  CHECK(m.rows[0][0].second == doctest::Approx(0.5));
  CHECK(m.rows[0][1].first == 1);
  CHECK(m.rows[0][1].second == doctest::Approx(0.5));
  for (const auto& row : m.rows) {
    double s = 0.0;
    for (const auto& [j, w] : row) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }

  // Identity kernel gives the identity matrix.
  const MeasurementMatrix id = conv_matrix(
      KernelSpec{KernelShape::MovingAverage, 1, 1, 1.0}, {5});
  for (int i = 0; i < 5; ++i) {
    REQUIRE(id.rows[i].size() == 1);
    CHECK(id.rows[i][0].first == i);
    CHECK(id.rows[i][0].second == doctest::Approx(1.0));
  }

  CHECK_THROWS_AS((void)conv_matrix(ma, {2}), InvalidValue);

  const MeasurementMatrix m2 =
      conv_matrix(KernelSpec{KernelShape::Gaussian, 5, 2, 1.0}, {8, 9});
  m2.validate();
  CHECK(m2.n_rows() == 72);
  // Interior row reproduces the separable kernel.
  const auto w1 = kernel_weights(KernelSpec{KernelShape::Gaussian, 5, 1, 1.0});
  const auto& row = m2.rows[4 * 9 + 4];
  REQUIRE(row.size() == 25);
  for (int k = -2; k <= 2; ++k)
    for (int l = -2; l <= 2; ++l) {
      bool found = false;
      for (const auto& [j, w] : row)
        if (j == (4 + k) * 9 + (4 + l)) {
          CHECK(w == doctest::Approx(w1[k + 2] * w1[l + 2]).epsilon(1e-12));
          found = true;
        }
      CHECK(found);
    }
}

TEST_CASE("apply: identity, flat reduction, geodesic example") {
  RandomStream rs(31);
  for (const auto& kind : testutil::all_kinds()) {
    const Signal u = random_signal(kind, 6, rs);
    const Signal out = apply(identity_matrix(6), u);
    for (int i = 0; i < 6; ++i) CHECK(dist(out.data[i], u.data[i]) <= 1e-12);
  }

  // Euclidean apply is the ordinary matrix-vector product.
  const ManifoldKind rn = ManifoldKind::euclidean(3);
  const Signal u = random_signal(rn, 7, rs);
  const MeasurementMatrix a =
      conv_matrix(KernelSpec{KernelShape::Gaussian, 5, 1, 1.2}, {7});
  const Signal out = apply(a, u);
  for (int i = 0; i < 7; ++i) {
    Eigen::Vector3d ref = Eigen::Vector3d::Zero();
    for (const auto& [j, w] : a.rows[i]) ref += w * Eigen::Vector3d(u.data[j].x);
    CHECK((Eigen::Vector3d(out.data[i].x) - ref).norm() <= 1e-12);
  }

  // Single row (1/2, 0, 1/2) on a geodesic triple lands at the center.
  MeasurementMatrix single;
  single.n_cols = 3;
  single.rows = {{{0, 0.5}, {1, 0.0}, {2, 0.5}}};
  Signal tri;
  tri.kind = ManifoldKind::circle();
  tri.shape = {3};
  tri.data = {circle_point(-1.0), circle_point(0.0), circle_point(1.0)};
  const Signal got = apply(single, tri);
  CHECK(got.size() == 1);
  CHECK(dist(got.data[0], circle_point(0.0)) <= 1e-12);
}

TEST_CASE("shift equivariance away from boundaries") {
  RandomStream rs(32);
  const int n = 24, shift = 3;
  Signal u;
  u.kind = ManifoldKind::circle();
  u.shape = {n};
  for (int i = 0; i < n; ++i)
    u.data.push_back(circle_point(rs.next_in(-2.0, 2.0)));
  Signal us = u;
  for (int i = 0; i < n - shift; ++i) us.data[i] = u.data[i + shift];
  for (int i = n - shift; i < n; ++i)
    us.data[i] = circle_point(rs.next_in(-2.0, 2.0));

  const KernelSpec k{KernelShape::Gaussian, 5, 1, 1.0};
  const MeasurementMatrix a = conv_matrix(k, {n});
  const Signal au = apply(a, u);
  const Signal aus = apply(a, us);
  const int h = 2;
  for (int i = h; i + shift < n - h; ++i)
    CHECK(dist(aus.data[i], au.data[i + shift]) <= 1e-8);
}

TEST_CASE("apply with an anchor resolves ambiguous rows toward the data") {
  // A row averaging two antipodal circle points has two minimizing means;
  // the anchor entry picks the closer one.
  Signal u;
  u.kind = ManifoldKind::circle();
  u.shape = {2};
  u.data = {circle_point(0.0), circle_point(kPi)};
  MeasurementMatrix a;
  a.n_cols = 2;
  a.rows = {{{0, 0.5}, {1, 0.5}}, {{0, 0.5}, {1, 0.5}}};
  Signal anchor;
  anchor.kind = u.kind;
  anchor.shape = {2};
  anchor.data = {circle_point(kPi / 2 + 0.3), circle_point(-kPi / 2 + 0.1)};
  const Signal out = apply(a, u, &anchor);
  CHECK(out.data[0].x(0) == doctest::Approx(kPi / 2));
  CHECK(out.data[1].x(0) == doctest::Approx(-kPi / 2));
}

TEST_CASE("apply errors carry the row index") {
  RandomStream rs(33);
  Signal u = random_signal(ManifoldKind::sphere2(), 3, rs);
  MeasurementMatrix a = identity_matrix(3);
  a.rows[1] = {{0, 0.5}, {1, 0.25}, {2, 0.25}};
  MeanOptions opts;
  opts.max_iters = 1;
  opts.grad_tol = 1e-16;
  try {
    (void)apply(a, u, nullptr, opts);
    CHECK(false);
  } catch (const NoConvergence& e) {
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}
