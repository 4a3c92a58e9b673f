#include "mvr/regularizers.hpp"

#include <algorithm>
#include <cmath>

namespace mvr {

namespace {

double dist_pow(double d, double q) {
  return q == 1.0 ? d : std::pow(d, q);
}

double d2_term(const ManifoldPoint& x, const ManifoldPoint& y,
               const ManifoldPoint& z, AntipodalPolicy policy) {
  return dist(y, midpoint(x, z, policy));
}

double d11_term(const ManifoldPoint& x11, const ManifoldPoint& x21,
                const ManifoldPoint& x12, const ManifoldPoint& x22,
                AntipodalPolicy policy) {
  return dist(midpoint(x21, x12, policy), midpoint(x11, x22, policy));
}

double schild_D(const ManifoldPoint& u_prev, const ManifoldPoint& u_cur,
                const ManifoldPoint& v_prev, const ManifoldPoint& v_cur,
                AntipodalPolicy policy) {
  const ManifoldPoint mid = midpoint(u_cur, v_prev, policy);
  const ManifoldPoint s = geodesic_point(u_prev, mid, 2.0, policy);
  return dist(s, v_cur);
}

double pt_D(const ManifoldPoint& u_prev, const ManifoldPoint& u_cur,
            const ManifoldPoint& v_prev, const ManifoldPoint& v_cur,
            AntipodalPolicy policy) {
  TangentVector a = log_map(u_cur, v_cur, policy);
  const TangentVector b = log_map(u_prev, v_prev, policy);
  const TangentVector bt = parallel_transport(u_prev, u_cur, b, policy);
  a.v -= bt.v;
  return norm(a);
}

/// Arc length each endpoint moves for the symmetric pair prox of
/// w * dist^q + (dist(x,.)^2 + dist(y,.)^2) / (2 tau).
double symmetric_edge_shift(double d, double w, double tau, double q) {
  if (d == 0.0 || w == 0.0 || tau == 0.0) return 0.0;
  if (q == 1.0) return std::min(w * tau, 0.5 * d);
  if (q == 2.0) return 2.0 * w * tau * d / (1.0 + 4.0 * w * tau);
  // General q >= 1: minimize h(t) = w (d - 2t)^q + t^2 / tau on [0, d/2];
  // h is convex, bisect on its derivative.
  double lo = 0.0, hi = 0.5 * d;
  const auto hprime = [&](double t) {
    return -2.0 * w * q * std::pow(d - 2.0 * t, q - 1.0) + 2.0 * t / tau;
  };
  if (hprime(hi) <= 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (hprime(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// One-sided version: only y moves, w * dist^q + dist(y,.)^2 / (2 tau).
double one_sided_edge_shift(double d, double w, double tau, double q) {
  if (d == 0.0 || w == 0.0 || tau == 0.0) return 0.0;
  if (q == 1.0) return std::min(w * tau, d);
  if (q == 2.0) return 2.0 * w * tau * d / (1.0 + 2.0 * w * tau);
  double lo = 0.0, hi = d;
  const auto hprime = [&](double t) {
    return -w * q * std::pow(d - t, q - 1.0) + t / tau;
  };
  if (hprime(hi) <= 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (hprime(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TgvSpec tgv_from_rs(double r, double s, TgvVariant variant) {
  if (!(r > 0.0) || !(s > 0.0) || !(s < 1.0))
    throw InvalidValue("tgv_from_rs: need r > 0 and s in (0, 1)");
  const double sp = std::min(s, 1.0 - s);
  return TgvSpec{r * (1.0 - s) / sp, r * s / sp, variant};
}

const ManifoldPoint& slot(const OptimState& s, const SlotRef& r) {
  return r.layer == 0 ? s.u.data[r.index] : s.aux[r.layer - 1].data[r.index];
}

ManifoldPoint& slot(OptimState& s, const SlotRef& r) {
  return r.layer == 0 ? s.u.data[r.index] : s.aux[r.layer - 1].data[r.index];
}

OptimState init_state(const Signal& u, const RegularizerSpec& spec,
                      AntipodalPolicy policy) {
  (void)policy;
  OptimState st;
  st.u = u;
  if (!std::holds_alternative<TgvSpec>(spec)) return st;

  if (!u.is_2d()) {
    Signal v = u;
    const int n = u.size();
    for (int i = 0; i + 1 < n; ++i) v.data[i] = u.data[i + 1];
    st.aux.push_back(std::move(v));
  } else {
    Signal v1 = u, v2 = u;
    const int nr = u.rows(), nc = u.cols();
    for (int r = 0; r + 1 < nr; ++r)
      for (int c = 0; c < nc; ++c) v1.at(r, c) = u.at(r + 1, c);
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c + 1 < nc; ++c) v2.at(r, c) = u.at(r, c + 1);
    st.aux.push_back(std::move(v1));
    st.aux.push_back(std::move(v2));
  }
  return st;
}

// ---- atoms ---------------------------------------------------------------------

namespace {

void push_edge_atoms(AtomList& list, const std::vector<int>& shape,
                     double weight, double q) {
  if (weight == 0.0) return;
  std::vector<int> h_even, h_odd, v_even, v_odd;
  const int nr = shape[0];
  const int nc = shape.size() == 2 ? shape[1] : 1;
  const auto idx = [&](int r, int c) { return r * nc + c; };
  if (shape.size() == 1) {
    for (int i = 0; i + 1 < nr; ++i) {
      list.atoms.push_back(
          Atom{AtomKind::Edge, {{0, i}, {0, i + 1}}, weight, q, {}});
      (i % 2 == 0 ? h_even : h_odd).push_back((int)list.atoms.size() - 1);
    }
  } else {
    for (int r = 0; r < nr; ++r)
      for (int c = 0; c + 1 < nc; ++c) {
        list.atoms.push_back(Atom{
            AtomKind::Edge, {{0, idx(r, c)}, {0, idx(r, c + 1)}}, weight, q, {}});
        (c % 2 == 0 ? h_even : h_odd).push_back((int)list.atoms.size() - 1);
      }
    for (int r = 0; r + 1 < nr; ++r)
      for (int c = 0; c < nc; ++c) {
        list.atoms.push_back(Atom{
            AtomKind::Edge, {{0, idx(r, c)}, {0, idx(r + 1, c)}}, weight, q, {}});
        (r % 2 == 0 ? v_even : v_odd).push_back((int)list.atoms.size() - 1);
      }
  }
  for (auto* b : {&h_even, &h_odd, &v_even, &v_odd})
    if (!b->empty()) list.batches.push_back(std::move(*b));
}

void push_tv2_atoms(AtomList& list, const std::vector<int>& shape,
                    double axis_weight, double diag_weight) {
  const int nr = shape[0];
  const int nc = shape.size() == 2 ? shape[1] : 1;
  const auto idx = [&](int r, int c) { return r * nc + c; };
  if (axis_weight != 0.0) {
    std::vector<std::vector<int>> h(3), v(3);
    if (shape.size() == 1) {
      for (int i = 1; i + 1 < nr; ++i) {
        list.atoms.push_back(Atom{AtomKind::Tv2Axis,
                                  {{0, i - 1}, {0, i}, {0, i + 1}},
                                  axis_weight,
                                  1.0,
                                  {}});
        h[i % 3].push_back((int)list.atoms.size() - 1);
      }
    } else {
      for (int r = 1; r + 1 < nr; ++r)
        for (int c = 0; c < nc; ++c) {
          list.atoms.push_back(
              Atom{AtomKind::Tv2Axis,
                   {{0, idx(r - 1, c)}, {0, idx(r, c)}, {0, idx(r + 1, c)}},
                   axis_weight,
                   1.0,
                   {}});
          h[r % 3].push_back((int)list.atoms.size() - 1);
        }
      for (int r = 0; r < nr; ++r)
        for (int c = 1; c + 1 < nc; ++c) {
          list.atoms.push_back(
              Atom{AtomKind::Tv2Axis,
                   {{0, idx(r, c - 1)}, {0, idx(r, c)}, {0, idx(r, c + 1)}},
                   axis_weight,
                   1.0,
                   {}});
          v[c % 3].push_back((int)list.atoms.size() - 1);
        }
    }
    for (auto* g : {&h, &v})
      for (auto& b : *g)
        if (!b.empty()) list.batches.push_back(std::move(b));
  }
  if (diag_weight != 0.0 && shape.size() == 2) {
    std::vector<std::vector<int>> d(4);
    for (int r = 1; r < nr; ++r)
      for (int c = 1; c < nc; ++c) {
        list.atoms.push_back(Atom{AtomKind::Tv2Diag,
                                  {{0, idx(r - 1, c - 1)},
                                   {0, idx(r, c - 1)},
                                   {0, idx(r - 1, c)},
                                   {0, idx(r, c)}},
                                  diag_weight,
                                  1.0,
                                  {}});
        d[(r % 2) * 2 + (c % 2)].push_back((int)list.atoms.size() - 1);
      }
    for (auto& b : d)
      if (!b.empty()) list.batches.push_back(std::move(b));
  }
}

void push_tgv_atoms(AtomList& list, const std::vector<int>& shape,
                    const TgvSpec& spec) {
  const int nr = shape[0];
  const int nc = shape.size() == 2 ? shape[1] : 1;
  const auto idx = [&](int r, int c) { return r * nc + c; };
  if (shape.size() == 1) {
    list.aux_layers = 1;
    std::vector<int> couple;
    std::vector<std::vector<int>> dpar(2);
    for (int i = 0; i + 1 < nr; ++i) {
      list.atoms.push_back(Atom{AtomKind::TgvCouple,
                                {{0, i + 1}, {1, i}},
                                spec.lambda1,
                                1.0,
                                spec.variant});
      couple.push_back((int)list.atoms.size() - 1);
    }
    for (int i = 1; i + 1 < nr; ++i) {
      list.atoms.push_back(Atom{AtomKind::TgvD,
                                {{0, i}, {1, i}, {0, i - 1}, {1, i - 1}},
                                spec.lambda0,
                                1.0,
                                spec.variant});
      dpar[i % 2].push_back((int)list.atoms.size() - 1);
    }
    if (!couple.empty()) list.batches.push_back(std::move(couple));
    for (auto& b : dpar)
      if (!b.empty()) list.batches.push_back(std::move(b));
    return;
  }
  // Bivariate splitting with two auxiliary fields (row and column
  // couplings); the symmetrized cross term carries weight zero and is not
  // instantiated.
  list.aux_layers = 2;
  std::vector<int> c1, c2;
  std::vector<std::vector<int>> d1(2), d2(2);
  for (int r = 0; r + 1 < nr; ++r)
    for (int c = 0; c < nc; ++c) {
      list.atoms.push_back(Atom{AtomKind::TgvCouple,
                                {{0, idx(r + 1, c)}, {1, idx(r, c)}},
                                spec.lambda1,
                                1.0,
                                spec.variant});
      c1.push_back((int)list.atoms.size() - 1);
    }
  for (int r = 0; r < nr; ++r)
    for (int c = 0; c + 1 < nc; ++c) {
      list.atoms.push_back(Atom{AtomKind::TgvCouple,
                                {{0, idx(r, c + 1)}, {2, idx(r, c)}},
                                spec.lambda1,
                                1.0,
                                spec.variant});
      c2.push_back((int)list.atoms.size() - 1);
    }
  for (int r = 1; r + 1 < nr; ++r)
    for (int c = 0; c < nc; ++c) {
      list.atoms.push_back(
          Atom{AtomKind::TgvD,
               {{0, idx(r, c)}, {1, idx(r, c)}, {0, idx(r - 1, c)}, {1, idx(r - 1, c)}},
               spec.lambda0,
               1.0,
               spec.variant});
      d1[r % 2].push_back((int)list.atoms.size() - 1);
    }
  for (int r = 0; r < nr; ++r)
    for (int c = 1; c + 1 < nc; ++c) {
      list.atoms.push_back(
          Atom{AtomKind::TgvD,
               {{0, idx(r, c)}, {2, idx(r, c)}, {0, idx(r, c - 1)}, {2, idx(r, c - 1)}},
               spec.lambda0,
               1.0,
               spec.variant});
      d2[c % 2].push_back((int)list.atoms.size() - 1);
    }
  if (!c1.empty()) list.batches.push_back(std::move(c1));
  if (!c2.empty()) list.batches.push_back(std::move(c2));
  for (auto* g : {&d1, &d2})
    for (auto& b : *g)
      if (!b.empty()) list.batches.push_back(std::move(b));
}

}  // namespace

AtomList atoms(const RegularizerSpec& spec, const std::vector<int>& shape) {
  if (shape.empty() || shape.size() > 2)
    throw InvalidValue("atoms: shape must be 1D or 2D");
  const auto require_nonnegative = [](double w, const char* what) {
    if (w < 0.0)
      throw InvalidValue(std::string("regularizer weight ") + what +
                         " must be nonnegative");
  };
  AtomList list;
  if (const auto* tv = std::get_if<TvSpec>(&spec)) {
    require_nonnegative(tv->lambda, "lambda");
    push_edge_atoms(list, shape, tv->lambda, 1.0);
  } else if (const auto* vq = std::get_if<VqSpec>(&spec)) {
    if (vq->q < 1.0) throw InvalidValue("Vq regularizer needs q >= 1");
    require_nonnegative(vq->lambda, "lambda");
    push_edge_atoms(list, shape, vq->lambda, vq->q);
  } else if (const auto* m = std::get_if<MixedTv2Spec>(&spec)) {
    require_nonnegative(m->mu1, "mu1");
    require_nonnegative(m->mu2, "mu2");
    require_nonnegative(m->mu21, "mu21");
    require_nonnegative(m->mu22, "mu22");
    push_edge_atoms(list, shape, m->mu1, 1.0);
    push_tv2_atoms(list, shape, m->mu2 * m->mu21, m->mu2 * m->mu22);
  } else {
    const auto& tgv = std::get<TgvSpec>(spec);
    require_nonnegative(tgv.lambda0, "lambda0");
    require_nonnegative(tgv.lambda1, "lambda1");
    push_tgv_atoms(list, shape, tgv);
  }
  return list;
}

/// Atom value from the touched points directly (in slot order).
static double atom_value_at(const Atom& atom,
                            const std::vector<ManifoldPoint>& p,
                            AntipodalPolicy policy) {
  switch (atom.kind) {
    case AtomKind::Edge:
    case AtomKind::TgvCouple:
      return atom.weight * dist_pow(dist(p[0], p[1]), atom.q);
    case AtomKind::Tv2Axis:
      return atom.weight * d2_term(p[0], p[1], p[2], policy);
    case AtomKind::Tv2Diag:
      return atom.weight * d11_term(p[0], p[1], p[2], p[3], policy);
    case AtomKind::TgvD: {
      const double d = atom.variant == TgvVariant::Schild
                           ? schild_D(p[2], p[0], p[3], p[1], policy)
                           : pt_D(p[2], p[0], p[3], p[1], policy);
      return atom.weight * d;
    }
  }
  throw InvalidValue("atom_value: unknown atom kind");
}

double atom_value(const Atom& atom, const OptimState& state,
                  AntipodalPolicy policy) {
  std::vector<ManifoldPoint> p;
  p.reserve(atom.slots.size());
  for (const auto& sr : atom.slots) p.push_back(slot(state, sr));
  return atom_value_at(atom, p, policy);
}

double atoms_value(const AtomList& list, const OptimState& state,
                   AntipodalPolicy policy) {
  double s = 0.0;
  for (const auto& a : list.atoms) s += atom_value(a, state, policy);
  return s;
}

// ---- values --------------------------------------------------------------------

double tv_value(const Signal& u, double lambda) {
  double s = 0.0;
  const int nr = u.rows(), nc = u.cols();
  for (int r = 0; r < nr; ++r)
    for (int c = 1; c < nc; ++c) s += dist(u.at(r, c), u.at(r, c - 1));
  for (int r = 1; r < nr; ++r)
    for (int c = 0; c < nc; ++c) s += dist(u.at(r, c), u.at(r - 1, c));
  return lambda * s;
}

double vq_value(const Signal& u, double lambda, double q) {
  if (q < 1.0) throw InvalidValue("vq_value: q must be >= 1");
  double s = 0.0;
  const int nr = u.rows(), nc = u.cols();
  for (int r = 0; r < nr; ++r)
    for (int c = 1; c < nc; ++c)
      s += dist_pow(dist(u.at(r, c), u.at(r, c - 1)), q);
  for (int r = 1; r < nr; ++r)
    for (int c = 0; c < nc; ++c)
      s += dist_pow(dist(u.at(r, c), u.at(r - 1, c)), q);
  return lambda * s;
}

double tv2_value(const Signal& u, double mu21, double mu22,
                 AntipodalPolicy policy) {
  double axis = 0.0, diag = 0.0;
  const int nr = u.rows(), nc = u.cols();
  if (!u.is_2d()) {
    for (int i = 1; i + 1 < u.size(); ++i)
      axis += d2_term(u.data[i - 1], u.data[i], u.data[i + 1], policy);
    return mu21 * axis;
  }
  for (int r = 1; r + 1 < nr; ++r)
    for (int c = 0; c < nc; ++c)
      axis += d2_term(u.at(r - 1, c), u.at(r, c), u.at(r + 1, c), policy);
  for (int r = 0; r < nr; ++r)
    for (int c = 1; c + 1 < nc; ++c)
      axis += d2_term(u.at(r, c - 1), u.at(r, c), u.at(r, c + 1), policy);
  for (int r = 1; r < nr; ++r)
    for (int c = 1; c < nc; ++c)
      diag += d11_term(u.at(r - 1, c - 1), u.at(r, c - 1), u.at(r - 1, c),
                       u.at(r, c), policy);
  return mu21 * axis + mu22 * diag;
}

double tgv_value(const Signal& u, const TgvSpec& spec, AntipodalPolicy policy,
                 int inner_cycles) {
  const RegularizerSpec rs = spec;
  OptimState state = init_state(u, rs, policy);
  const AtomList list = atoms(rs, u.shape);
  double best = atoms_value(list, state, policy);
  for (int r = 1; r <= inner_cycles && best > 1e-15; ++r) {
    const double tau = 1.0 / r;
    for (const auto& atom : list.atoms) {
      if (atom.kind == AtomKind::TgvCouple) {
        // u slot frozen: one-sided move of the auxiliary point.
        const ManifoldPoint& anchor = slot(state, atom.slots[0]);
        ManifoldPoint& v = slot(state, atom.slots[1]);
        const double d = dist(anchor, v);
        if (d > 0.0) {
          const double t = one_sided_edge_shift(d, atom.weight, tau, 1.0);
          v = geodesic_point(v, anchor, t / d, policy);
        }
      } else {
        std::vector<ManifoldPoint> pts;
        std::vector<bool> frozen;
        for (const auto& sr : atom.slots) {
          pts.push_back(slot(state, sr));
          frozen.push_back(sr.layer == 0);
        }
        const Atom* ap = &atom;
        auto g = [ap, policy](const std::vector<ManifoldPoint>& q) {
          return atom_value_at(*ap, q, policy);
        };
        ProxBudget pb;
        pb.iterations = 10;
        const auto moved = prox_points_subgrad(g, pts, tau, frozen, pb, policy);
        for (std::size_t k = 0; k < atom.slots.size(); ++k)
          if (!frozen[k]) slot(state, atom.slots[k]) = moved[k];
      }
    }
    best = std::min(best, atoms_value(list, state, policy));
  }
  return best;
}

double regularizer_value(const RegularizerSpec& spec, const OptimState& state,
                         AntipodalPolicy policy) {
  if (const auto* tv = std::get_if<TvSpec>(&spec))
    return tv_value(state.u, tv->lambda);
  if (const auto* vq = std::get_if<VqSpec>(&spec))
    return vq_value(state.u, vq->lambda, vq->q);
  if (const auto* m = std::get_if<MixedTv2Spec>(&spec))
    return tv_value(state.u, m->mu1) +
           m->mu2 * tv2_value(state.u, m->mu21, m->mu22, policy);
  const AtomList list = atoms(spec, state.u.shape);
  return atoms_value(list, state, policy);
}

double regularizer_value(const RegularizerSpec& spec, const Signal& u,
                         AntipodalPolicy policy) {
  if (const auto* tgv = std::get_if<TgvSpec>(&spec))
    return tgv_value(u, *tgv, policy);
  OptimState st;
  st.u = u;
  return regularizer_value(spec, st, policy);
}

// ---- proximal atoms -----------------------------------------------------------

std::pair<ManifoldPoint, ManifoldPoint> prox_tv_edge(const ManifoldPoint& x,
                                                     const ManifoldPoint& y,
                                                     double tau_lambda,
                                                     AntipodalPolicy policy) {
  const double d = dist(x, y);
  if (d == 0.0 || tau_lambda <= 0.0) return {x, y};
  const double t = std::min(tau_lambda, 0.5 * d);
  return {geodesic_point(x, y, t / d, policy),
          geodesic_point(y, x, t / d, policy)};
}

std::vector<TangentVector> numeric_gradient(
    const std::function<double(const std::vector<ManifoldPoint>&)>& fn,
    const std::vector<ManifoldPoint>& points, double h) {
  std::vector<TangentVector> grads;
  grads.reserve(points.size());
  std::vector<ManifoldPoint> work = points;
  for (std::size_t k = 0; k < points.size(); ++k) {
    TangentVector g = zero_tangent(points[k]);
    for (const TangentVector& e : tangent_basis(points[k])) {
      TangentVector step = e;
      step.v *= h;
      work[k] = exp_map(points[k], step);
      const double fp = fn(work);
      step.v = -h * e.v;
      work[k] = exp_map(points[k], step);
      const double fm = fn(work);
      g.v += ((fp - fm) / (2.0 * h)) * e.v;
    }
    work[k] = points[k];
    grads.push_back(std::move(g));
  }
  return grads;
}

std::vector<ManifoldPoint> prox_points_subgrad(
    const std::function<double(const std::vector<ManifoldPoint>&)>& g,
    const std::vector<ManifoldPoint>& points, double tau,
    const std::vector<bool>& frozen, const ProxBudget& budget,
    AntipodalPolicy policy) {
  const std::size_t n = points.size();
  std::vector<bool> fixed = frozen.empty() ? std::vector<bool>(n, false) : frozen;
  if (fixed.size() != n)
    throw InvalidValue("prox_points_subgrad: frozen mask size mismatch");

  const auto objective = [&](const std::vector<ManifoldPoint>& y) {
    double f = g(y);
    for (std::size_t k = 0; k < n; ++k) {
      if (fixed[k]) continue;
      const double d = dist(points[k], y[k]);
      f += d * d / (2.0 * tau);
    }
    return f;
  };

  std::vector<ManifoldPoint> y = points;
  std::vector<ManifoldPoint> best = y;
  double fbest = objective(y);

  for (int r = 1; r <= budget.iterations; ++r) {
    const double eta = tau * budget.step_scale / r;
    const std::vector<TangentVector> gg = numeric_gradient(g, y, budget.fd_step);
    for (std::size_t k = 0; k < n; ++k) {
      if (fixed[k]) continue;
      TangentVector step = gg[k];
      if (dist(points[k], y[k]) > 0.0) {
        const TangentVector pull = log_map(y[k], points[k], policy);
        step.v -= pull.v / tau;
      }
      step.v *= -eta;
      y[k] = exp_map(y[k], step);
    }
    const double f = objective(y);
    if (f < fbest) {
      fbest = f;
      best = y;
    }
  }
  return best;
}

void apply_atom_prox(OptimState& state, const Atom& atom, double tau,
                     AntipodalPolicy policy, const ProxBudget& budget) {
  if (tau <= 0.0) return;
  switch (atom.kind) {
    case AtomKind::Edge:
    case AtomKind::TgvCouple: {
      ManifoldPoint& x = slot(state, atom.slots[0]);
      ManifoldPoint& y = slot(state, atom.slots[1]);
      const double d = dist(x, y);
      if (d == 0.0 || atom.weight == 0.0) return;
      const double t = symmetric_edge_shift(d, atom.weight, tau, atom.q);
      const ManifoldPoint nx = geodesic_point(x, y, t / d, policy);
      const ManifoldPoint ny = geodesic_point(y, x, t / d, policy);
      x = nx;
      y = ny;
      return;
    }
    case AtomKind::Tv2Axis:
    case AtomKind::Tv2Diag:
    case AtomKind::TgvD: {
      std::vector<ManifoldPoint> pts;
      pts.reserve(atom.slots.size());
      for (const auto& sr : atom.slots) pts.push_back(slot(state, sr));
      const Atom* ap = &atom;
      auto g = [ap, policy](const std::vector<ManifoldPoint>& q) {
        return atom_value_at(*ap, q, policy);
      };
      const auto moved = prox_points_subgrad(g, pts, tau, {}, budget, policy);
      for (std::size_t k = 0; k < atom.slots.size(); ++k)
        slot(state, atom.slots[k]) = moved[k];
      return;
    }
  }
}

}  // namespace mvr
