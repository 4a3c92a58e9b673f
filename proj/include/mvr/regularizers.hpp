#pragma once

#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "mvr/signal.hpp"

namespace mvr {

// ---- regularizer selection ---------------------------------------------------

enum class TgvVariant { Schild, ParallelTransport };

struct TvSpec {
  double lambda = 1.0;
};

struct VqSpec {
  double lambda = 1.0;
  double q = 2.0;
};

/// mu1 * TV + mu2 * (mu21 * axis second differences + mu22 * diagonal terms).
struct MixedTv2Spec {
  double mu1 = 1.0;
  double mu2 = 1.0;
  double mu21 = 1.0;
  double mu22 = 1.0;
};

struct TgvSpec {
  double lambda0 = 1.0;  // weight of the difference-of-differences terms
  double lambda1 = 1.0;  // weight of the first-order coupling terms
  TgvVariant variant = TgvVariant::Schild;
};

/// (r, s) parametrization: lambda0 = r (1 - s) / s', lambda1 = r s / s',
/// s' = min(s, 1 - s).
TgvSpec tgv_from_rs(double r, double s,
                    TgvVariant variant = TgvVariant::Schild);

using RegularizerSpec = std::variant<TvSpec, VqSpec, MixedTv2Spec, TgvSpec>;

// ---- optimization state --------------------------------------------------------

/// Signal plus the auxiliary fields a TGV splitting carries (empty otherwise).
struct OptimState {
  Signal u;
  std::vector<Signal> aux;
};

struct SlotRef {
  int layer = 0;  // 0 = u, 1.. = aux
  int index = 0;
};

const ManifoldPoint& slot(const OptimState& s, const SlotRef& r);
ManifoldPoint& slot(OptimState& s, const SlotRef& r);

/// State with the auxiliary fields required by `spec`, initialized from u
/// (TGV: v fields hold the forward-shifted signal, the natural zero of the
/// coupling terms).
OptimState init_state(const Signal& u, const RegularizerSpec& spec,
                      AntipodalPolicy policy = AntipodalPolicy::Error);

// ---- atoms -------------------------------------------------------------------

enum class AtomKind { Edge, Tv2Axis, Tv2Diag, TgvCouple, TgvD };

/// One local term of the regularizer. `weight` multiplies the distance
/// expression; Edge atoms raise the distance to the power q.
struct Atom {
  AtomKind kind = AtomKind::Edge;
  std::vector<SlotRef> slots;
  double weight = 1.0;
  double q = 1.0;
  TgvVariant variant = TgvVariant::Schild;
};

/// Ordered atom decomposition with disjoint batches: atoms within one batch
/// touch disjoint slots and may be processed in any order.
struct AtomList {
  std::vector<Atom> atoms;
  std::vector<std::vector<int>> batches;
  int aux_layers = 0;
};

AtomList atoms(const RegularizerSpec& spec, const std::vector<int>& shape);

double atom_value(const Atom& atom, const OptimState& state,
                  AntipodalPolicy policy = AntipodalPolicy::Error);

/// Sum of all atom values; equals the regularizer value at this state.
double atoms_value(const AtomList& list, const OptimState& state,
                   AntipodalPolicy policy = AntipodalPolicy::Error);

// ---- values ---------------------------------------------------------------------

/// Anisotropic total variation: lambda * (horizontal + vertical neighbor
/// distances); a 1D signal degenerates to the single chain sum.
double tv_value(const Signal& u, double lambda);

/// First-order q-power regularizer; q = 1 coincides with tv_value.
double vq_value(const Signal& u, double lambda, double q);

/// Midpoint-based second-order terms: mu21 weighs the per-axis second
/// differences d2, mu22 the diagonal cross-midpoint terms d11.
double tv2_value(const Signal& u, double mu21, double mu22,
                 AntipodalPolicy policy = AntipodalPolicy::Error);

/// TGV value minimized over the auxiliary field (inner minimization by
/// cyclic proximal descent over the v slots with a fixed budget).
double tgv_value(const Signal& u, const TgvSpec& spec,
                 AntipodalPolicy policy = AntipodalPolicy::Error,
                 int inner_cycles = 100);

/// Value of the selected regularizer at the given state (TGV uses the
/// state's current auxiliary field; no inner minimization).
double regularizer_value(const RegularizerSpec& spec, const OptimState& state,
                         AntipodalPolicy policy = AntipodalPolicy::Error);

/// Standalone regularizer value of a signal (TGV runs the inner
/// minimization).
double regularizer_value(const RegularizerSpec& spec, const Signal& u,
                         AntipodalPolicy policy = AntipodalPolicy::Error);

// ---- proximal atoms ---------------------------------------------------------------

/// Closed-form prox of the TV edge term: both points move toward each other
/// along the connecting geodesic by arc length min(tau_lambda, dist/2).
std::pair<ManifoldPoint, ManifoldPoint> prox_tv_edge(
    const ManifoldPoint& x, const ManifoldPoint& y, double tau_lambda,
    AntipodalPolicy policy = AntipodalPolicy::Error);

/// Budget and step rule of the approximate subgradient prox.
struct ProxBudget {
  int iterations = 50;
  double step_scale = 1.0;  // eta_r = tau * step_scale / r
  double fd_step = 1e-6;
};

/// Approximate prox of g(points) + sum dist^2(x_k, y_k) / (2 tau) by
/// fixed-budget subgradient descent (best-objective iterate returned).
/// `frozen[k]` pins point k (no pull-back term, never moved).
std::vector<ManifoldPoint> prox_points_subgrad(
    const std::function<double(const std::vector<ManifoldPoint>&)>& g,
    const std::vector<ManifoldPoint>& points, double tau,
    const std::vector<bool>& frozen = {}, const ProxBudget& budget = {},
    AntipodalPolicy policy = AntipodalPolicy::Error);

/// Prox of one atom applied in place on the state; Edge and TgvCouple atoms
/// use closed forms, the remaining kinds the subgradient scheme.
void apply_atom_prox(OptimState& state, const Atom& atom, double tau,
                     AntipodalPolicy policy = AntipodalPolicy::Error,
                     const ProxBudget& budget = {});

/// Central-difference gradient of a function of several manifold points
/// (tangent vectors at each point).
std::vector<TangentVector> numeric_gradient(
    const std::function<double(const std::vector<ManifoldPoint>&)>& fn,
    const std::vector<ManifoldPoint>& points, double h = 1e-6);

}  // namespace mvr
