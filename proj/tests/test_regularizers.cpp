#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mvr/regularizers.hpp"
#include "test_util.hpp"

using namespace mvr;
using testutil::random_nearby;
using testutil::random_point;
using testutil::random_signal;

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// u_i = gamma(i * step) along one constant-speed geodesic.
Signal geodesic_signal(const ManifoldKind& kind, int n, RandomStream& rs,
                       double step) {
  const ManifoldPoint x0 = random_point(kind, rs);
  TangentVector e = testutil::random_tangent(x0, rs);
  e.v /= norm(e);
  Signal s;
  s.kind = kind;
  s.shape = {n};
  for (int i = 0; i < n; ++i) {
    TangentVector t = e;
    t.v *= i * step;
    s.data.push_back(exp_map(x0, t));
  }
  return s;
}

double signal_diameter(const Signal& s) {
  double d = 0.0;
  for (int i = 0; i < s.size(); ++i)
    for (int j = i + 1; j < s.size(); ++j)
      d = std::max(d, dist(s.data[i], s.data[j]));
  return d;
}

}  // namespace

TEST_CASE("tv value") {
  RandomStream rs(51);
  for (const auto& kind : testutil::all_kinds()) {
    const Signal c = constant_signal(kind, {6}, random_point(kind, rs));
    CHECK(tv_value(c, 1.0) == doctest::Approx(0.0));
  }
  Signal s;
  s.kind = ManifoldKind::circle();
  s.shape = {3};
  s.data = {circle_point(0.0), circle_point(kPi / 2), circle_point(kPi / 2)};
  CHECK(tv_value(s, 0.3) == doctest::Approx(0.3 * kPi / 2));

  // TV(u) >= diam(u) on connected grids (lambda = 1).
  for (const auto& kind : testutil::all_kinds()) {
    for (int it = 0; it < 15; ++it) {
      const Signal u = random_signal(kind, 8, rs);
      CHECK(tv_value(u, 1.0) >= signal_diameter(u) - 1e-12);
    }
    Signal img = random_signal(kind, 12, rs);
    img.shape = {3, 4};
    CHECK(tv_value(img, 1.0) >= signal_diameter(img) - 1e-12);
  }
}

TEST_CASE("vq value") {
  RandomStream rs(52);
  const Signal u = random_signal(ManifoldKind::sphere2(), 7, rs);
  CHECK(vq_value(u, 0.7, 1.0) == doctest::Approx(tv_value(u, 0.7)));

  const Signal c = constant_signal(ManifoldKind::spd3(), {5},
                                   random_point(ManifoldKind::spd3(), rs));
  CHECK(vq_value(c, 1.0, 2.0) == doctest::Approx(0.0));

  const Signal e = random_signal(ManifoldKind::euclidean(2), 6, rs);
  double expect = 0.0;
  for (int i = 1; i < e.size(); ++i)
    expect += (e.data[i].x - e.data[i - 1].x).squaredNorm();
  CHECK(vq_value(e, 1.0, 2.0) == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS((void)vq_value(e, 1.0, 0.5), InvalidValue);
}

TEST_CASE("tv2 value") {
  RandomStream rs(53);
  for (const auto& kind : testutil::all_kinds()) {
    const Signal g = geodesic_signal(kind, 7, rs, 0.22);
    CHECK(tv2_value(g, 1.0, 1.0) <= 1e-9);
    const Signal c = constant_signal(kind, {4, 4}, random_point(kind, rs));
    CHECK(tv2_value(c, 1.0, 1.0) == doctest::Approx(0.0));
  }
  // Midpoint of 0 and pi/2 sits pi/4 away from the middle sample 0.
  Signal s;
  s.kind = ManifoldKind::circle();
  s.shape = {3};
  s.data = {circle_point(0.0), circle_point(0.0), circle_point(kPi / 2)};
  CHECK(tv2_value(s, 1.0, 1.0) == doctest::Approx(kPi / 4));
}

TEST_CASE("tgv value") {
  RandomStream rs(54);
  const TgvSpec schild{0.8, 0.6, TgvVariant::Schild};
  const TgvSpec pt{0.8, 0.6, TgvVariant::ParallelTransport};

  for (const auto& kind : testutil::all_kinds()) {
    const Signal g = geodesic_signal(kind, 7, rs, 0.22);
    CHECK(tgv_value(g, schild) <= 1e-9);
    CHECK(tgv_value(g, pt) <= 1e-9);
    const Signal c = constant_signal(kind, {6}, random_point(kind, rs));
    CHECK(tgv_value(c, schild) == doctest::Approx(0.0));
  }

  // Near-flat signals: the Schild and transport variants coincide.
  const ManifoldPoint base = random_point(ManifoldKind::sphere2(), rs);
  Signal tiny;
  tiny.kind = ManifoldKind::sphere2();
  tiny.shape = {6};
  for (int i = 0; i < 6; ++i) tiny.data.push_back(random_nearby(base, rs, 2e-3));
  const double vs = tgv_value(tiny, schild, AntipodalPolicy::Error, 400);
  const double vp = tgv_value(tiny, pt, AntipodalPolicy::Error, 400);
  CHECK(std::abs(vs - vp) <= 1e-6);
}

TEST_CASE("tgv (r,s) parametrization") {
  const TgvSpec t = tgv_from_rs(0.2, 0.3);
  CHECK(t.lambda0 == doctest::Approx(0.2 * 0.7 / 0.3));
  CHECK(t.lambda1 == doctest::Approx(0.2));
  const TgvSpec u = tgv_from_rs(1.0, 0.75);
  CHECK(u.lambda0 == doctest::Approx(1.0));  // s' = 0.25
  CHECK(u.lambda1 == doctest::Approx(3.0));
  CHECK_THROWS_AS((void)tgv_from_rs(0.0, 0.5), InvalidValue);
  CHECK_THROWS_AS((void)tgv_from_rs(1.0, 1.0), InvalidValue);
}

TEST_CASE("atom lists decompose the regularizer") {
  RandomStream rs(55);
  {
    const AtomList list = atoms(TvSpec{0.5}, {9});
    CHECK(list.atoms.size() == 8);
    CHECK(list.batches.size() == 2);
  }
  {
    const AtomList list = atoms(TvSpec{0.5}, {4, 5});
    CHECK(list.batches.size() == 4);
  }

  const std::vector<RegularizerSpec> specs = {
      TvSpec{0.7}, VqSpec{0.4, 2.0}, MixedTv2Spec{0.3, 0.6, 1.0, 0.8},
      TgvSpec{0.8, 0.6, TgvVariant::Schild}};
  for (const auto& kind : testutil::all_kinds()) {
    for (const auto& spec : specs) {
      for (const std::vector<int>& shape :
           {std::vector<int>{7}, std::vector<int>{4, 5}}) {
        Signal u = random_signal(
            kind, shape.size() == 1 ? shape[0] : shape[0] * shape[1], rs);
        u.shape = shape;
        const OptimState state = init_state(u, spec);
        const AtomList list = atoms(spec, shape);
        // Batches partition the atoms and are slot-disjoint.
        std::size_t count = 0;
        for (const auto& b : list.batches) {
          count += b.size();
          std::vector<std::pair<int, int>> seen;
          for (int idx : b)
            for (const auto& sr : list.atoms[idx].slots) {
              for (const auto& s2 : seen)
                CHECK((s2.first != sr.layer || s2.second != sr.index));
              seen.emplace_back(sr.layer, sr.index);
            }
        }
        CHECK(count == list.atoms.size());
        CHECK(atoms_value(list, state) ==
              doctest::Approx(regularizer_value(spec, state)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("prox of the TV edge term") {
  // Closed form: both ends move toward each other by min(tau*lambda, d/2).
  const auto [x, y] = prox_tv_edge(circle_point(0.0), circle_point(1.0), 0.2);
  CHECK(x.x(0) == doctest::Approx(0.2));
  CHECK(y.x(0) == doctest::Approx(0.8));

  const auto [xs, ys] = prox_tv_edge(circle_point(0.0), circle_point(1.0), 5.0);
  CHECK(xs.x(0) == doctest::Approx(0.5));
  CHECK(ys.x(0) == doctest::Approx(0.5));

  const auto [xe, ye] = prox_tv_edge(circle_point(0.3), circle_point(0.3), 0.2);
  CHECK(xe.x(0) == doctest::Approx(0.3));
  CHECK(ye.x(0) == doctest::Approx(0.3));

  // Brute force: no grid candidate beats the closed form.
  const double lam = 0.45, tau = 0.6;
  const auto [px, py] =
      prox_tv_edge(circle_point(0.0), circle_point(1.0), tau * lam);
  const auto objective = [&](double a, double b) {
    const double d = std::abs(wrap_angle(a - b));
    const double da = std::abs(wrap_angle(a - 0.0));
    const double db = std::abs(wrap_angle(b - 1.0));
    return lam * d + (da * da + db * db) / (2.0 * tau);
  };
  const double got = objective(px.x(0), py.x(0));
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j)
      CHECK(got <=
            objective(-0.5 + 2.0 * i / 99.0, -0.5 + 2.0 * j / 99.0) + 1e-12);

  // Random manifolds: endpoints approach symmetrically.
  RandomStream rs(56);
  for (const auto& kind : testutil::all_kinds()) {
    const ManifoldPoint a = random_point(kind, rs);
    const ManifoldPoint b = random_nearby(a, rs, 1.0);
    const double d = dist(a, b);
    if (d < 1e-6) continue;
    const auto [na, nb] = prox_tv_edge(a, b, 0.1);
    CHECK(dist(a, na) == doctest::Approx(std::min(0.1, d / 2)).epsilon(1e-9));
    CHECK(dist(b, nb) == doctest::Approx(std::min(0.1, d / 2)).epsilon(1e-9));
  }
}

TEST_CASE("subgradient prox: small tau is near identity") {
  RandomStream rs(57);
  for (const auto& kind : testutil::all_kinds()) {
    const ManifoldPoint c = random_point(kind, rs);
    std::vector<ManifoldPoint> pts;
    for (int j = 0; j < 3; ++j) pts.push_back(random_nearby(c, rs, 0.5));
    const auto g = [](const std::vector<ManifoldPoint>& q) {
      return dist(q[1], midpoint(q[0], q[2]));
    };
    const auto out = prox_points_subgrad(g, pts, 1e-9);
    for (int j = 0; j < 3; ++j) CHECK(dist(out[j], pts[j]) <= 1e-8);

    // A constant tuple is a fixed point of every atom prox.
    const std::vector<ManifoldPoint> same(3, c);
    const auto fixed = prox_points_subgrad(g, same, 0.5);
    for (int j = 0; j < 3; ++j) CHECK(dist(fixed[j], c) <= 1e-12);
  }
}

TEST_CASE("subgradient prox matches the flat second-difference oracle") {
  // Euclidean d2 atom: w |y - (x+z)/2| has an exact prox via the linear map
  // B = [-I/2, I, -I/2] with B B^T = (3/2) I.
  RandomStream rs(58);
  const ManifoldKind rn = ManifoldKind::euclidean(2);
  for (double tau : {0.35, 4.0}) {
    std::vector<ManifoldPoint> pts;
    for (int j = 0; j < 3; ++j) pts.push_back(random_point(rn, rs));
    const double w = 0.8;
    const auto g = [w](const std::vector<ManifoldPoint>& q) {
      const Eigen::Vector2d r =
          Eigen::Vector2d(q[1].x) -
          0.5 * (Eigen::Vector2d(q[0].x) + Eigen::Vector2d(q[2].x));
      return w * r.norm();
    };
    const Eigen::Vector2d r0 =
        Eigen::Vector2d(pts[1].x) -
        0.5 * (Eigen::Vector2d(pts[0].x) + Eigen::Vector2d(pts[2].x));
    const Eigen::Vector2d s = r0.norm() >= 1.5 * tau * w
                                  ? Eigen::Vector2d(tau * w * r0.normalized())
                                  : Eigen::Vector2d((2.0 / 3.0) * r0);
    std::vector<Eigen::Vector2d> expect(3);
    for (int j = 0; j < 3; ++j) expect[j] = Eigen::Vector2d(pts[j].x);
    expect[0] += 0.5 * s;
    expect[1] -= s;
    expect[2] += 0.5 * s;

    ProxBudget budget;
    budget.iterations = 60000;
    budget.step_scale = 2.0;
    const auto out = prox_points_subgrad(g, pts, tau, {}, budget);
    // The full-shrink solution sits at the kink of the norm, where plain
    // subgradient steps stall at the final step size; the smooth case
    // reaches oracle accuracy.
    const double tol = r0.norm() >= 1.5 * tau * w ? 1e-6 : 2e-3;
    for (int j = 0; j < 3; ++j)
      CHECK((Eigen::Vector2d(out[j].x) - expect[j]).norm() <= tol);
  }
}
