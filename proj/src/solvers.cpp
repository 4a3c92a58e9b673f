#include "mvr/solvers.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "mvr/rng.hpp"

namespace mvr {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

/// Per-segment arc-length cap of the trajectory predictor: half the local
/// injectivity scale (pi/2 on the circle and the sphere), 0.5 on the
/// unbounded manifolds.
double traj_arc_cap(const ManifoldKind& kind) {
  switch (kind.tag) {
    case ManifoldTag::Circle:
    case ManifoldTag::Sphere2:
      return 0.5 * (kPi / 2.0);
    default:
      return 0.5;
  }
}

struct DataAtomRef {
  const MeasurementMatrix* A;
  const Signal* f;
};

double product_norm(const std::vector<std::pair<int, TangentVector>>& grads) {
  double s = 0.0;
  for (const auto& [j, g] : grads) {
    const double n = norm(g);
    s += n * n;
  }
  return std::sqrt(s);
}

/// One Gauss-Seidel trajectory pass on data atom i (eq. of the polygonal
/// path): refreshed gradient sub-steps until their predicted times sum to
/// the target; the closing step lands exactly there.
void trajectory_step(Signal& u, const MeasurementMatrix::Row& row,
                     const ManifoldPoint& f_i, const SolverSpec& spec,
                     double mu_n, int& skipped) {
  const double cap_arc = traj_arc_cap(u.kind);
  double remaining = spec.damping;
  for (int seg = 0; seg < 10000 && remaining > 0.0; ++seg) {
    std::vector<std::pair<int, TangentVector>> grads;
    try {
      grads = grad_data_atom(u, row, f_i, spec.p, spec.antipodal);
    } catch (const SingularL&) {
      ++skipped;
      return;
    }
    const double gnorm = product_norm(grads);
    if (mu_n * gnorm < 1e-15) return;
    const double tau = std::min(remaining, cap_arc / (mu_n * gnorm));
    for (auto& [j, g] : grads) {
      g.v *= -tau * mu_n;
      u.data[j] = exp_map(u.data[j], g);
    }
    remaining -= tau;
  }
}

/// Full Jacobi gradient step of the data term (all rows evaluated at the
/// same iterate, then one exponential step per pixel).
void jacobi_gradient_step(Signal& u, const MeasurementMatrix& A,
                          const Signal& f, const SolverSpec& spec, double mu_n,
                          int& skipped) {
  std::vector<SmallVec> acc(u.size());
  for (int j = 0; j < u.size(); ++j)
    acc[j] = SmallVec::Zero(u.kind.ambient_size());
  for (int i = 0; i < A.n_rows(); ++i) {
    std::vector<std::pair<int, TangentVector>> grads;
    try {
      grads = grad_data_atom(u, A.rows[i], f.data[i], spec.p, spec.antipodal);
    } catch (const SingularL&) {
      ++skipped;
      continue;
    }
    for (const auto& [j, g] : grads) acc[j] += g.v;
  }
  for (int j = 0; j < u.size(); ++j) {
    TangentVector step{u.data[j], -mu_n * acc[j]};
    u.data[j] = exp_map(u.data[j], step);
  }
}

/// Proximal map of one data atom (inner (sub)gradient descent on the
/// prox objective). Only the row's support moves.
void prox_data_atom(Signal& u, const MeasurementMatrix::Row& row,
                    const ManifoldPoint& f_i, const SolverSpec& spec,
                    double mu, int& skipped) {
  std::vector<ManifoldPoint> orig, y;
  std::vector<double> w;
  std::vector<int> cols;
  for (const auto& [j, wgt] : row) {
    orig.push_back(u.data[j]);
    y.push_back(u.data[j]);
    w.push_back(wgt);
    cols.push_back(j);
  }
  const std::size_t n = y.size();
  WeightVector a;
  a.weights = w;

  const auto objective = [&](const std::vector<ManifoldPoint>& q,
                             const ManifoldPoint& mean_hint,
                             ManifoldPoint& mean_out) {
    MeanOptions mo = context_mean_options(spec.antipodal);
    mo.init = mean_hint;
    mean_out = weighted_mean_nearest(q, a, f_i, mo);
    double val = std::pow(dist(mean_out, f_i), spec.p);
    for (std::size_t k = 0; k < n; ++k) {
      const double d = dist(orig[k], q[k]);
      val += d * d / (2.0 * mu);
    }
    return val;
  };

  ManifoldPoint m = orig[0];
  try {
    {
      MeanOptions mo = context_mean_options(spec.antipodal);
      m = weighted_mean_nearest(y, a, f_i, mo);
    }
    double fcur = std::pow(dist(m, f_i), spec.p);
    std::vector<ManifoldPoint> best = y;
    double fbest = fcur;

    const bool smooth = spec.p > 1.0;
    // p = 1 runs a fixed diminishing-step budget; the smooth path exits on
    // its gradient tolerance instead.
    const int max_inner = smooth ? 100 : 15;
    const double eta0 = mu / (1.0 + 2.0 * mu);

    for (int r = 1; r <= max_inner; ++r) {
      std::vector<TangentVector> g =
          grad_dist_mean_p(y, w, f_i, spec.p, spec.antipodal, &m);
      double gnorm2 = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (dist(orig[k], y[k]) > 0.0) {
          const TangentVector pull = log_map(y[k], orig[k], spec.antipodal);
          g[k].v -= pull.v / mu;
        }
        gnorm2 += inner(g[k], g[k]);
      }
      if (std::sqrt(gnorm2) < 1e-12) break;

      if (smooth) {
        double step = eta0;
        bool moved = false;
        for (int h = 0; h < 30; ++h) {
          std::vector<ManifoldPoint> cand(n);
          for (std::size_t k = 0; k < n; ++k) {
            TangentVector s = g[k];
            s.v *= -step;
            cand[k] = exp_map(y[k], s);
          }
          ManifoldPoint mc = m;
          const double fc = objective(cand, m, mc);
          if (fc <= fcur + 1e-15 * (1.0 + std::abs(fcur))) {
            y = std::move(cand);
            m = mc;
            fcur = fc;
            moved = true;
            break;
          }
          step *= 0.5;
        }
        if (!moved) break;
        if (fcur < fbest) {
          fbest = fcur;
          best = y;
        }
      } else {
        const double eta = mu / r;
        for (std::size_t k = 0; k < n; ++k) {
          TangentVector s = g[k];
          s.v *= -eta;
          y[k] = exp_map(y[k], s);
        }
        ManifoldPoint mc = m;
        const double fc = objective(y, m, mc);
        m = mc;
        if (fc < fbest) {
          fbest = fc;
          best = y;
        }
      }
    }
    for (std::size_t k = 0; k < n; ++k) u.data[cols[k]] = best[k];
  } catch (const SingularL&) {
    ++skipped;
  }
}

void prox_sweep(OptimState& state, const AtomList& list, double tau,
                const SolverSpec& spec) {
  for (const auto& batch : list.batches)
    for (int idx : batch)
      apply_atom_prox(state, list.atoms[idx], tau, spec.antipodal);
}

SolveReport run(const Signal& u0, const MeasurementMatrix& A, const Signal& f,
                const RegularizerSpec& reg, const SolverSpec& spec) {
  spec.validate();
  u0.validate();
  if (A.n_cols != u0.size())
    throw InvalidValue("solve: operator width does not match signal");
  if (A.n_rows() != f.size())
    throw InvalidValue("solve: operator height does not match data");

  const auto t0 = std::chrono::steady_clock::now();
  OptimState state = init_state(u0, reg, spec.antipodal);
  const AtomList list = atoms(reg, u0.shape);
  const int n_data = A.n_rows();
  const int n_reg = static_cast<int>(list.atoms.size());

  SolveReport report;
  RandomStream rs(spec.seed);
  std::vector<int> perm(static_cast<std::size_t>(n_data + n_reg));

  for (int n = 1; n <= spec.iterations; ++n) {
    const double mu_n = spec.mu0 / n;
    switch (spec.scheme) {
      case SolverScheme::Gfb:
        jacobi_gradient_step(state.u, A, f, spec, mu_n, report.skipped_atoms);
        prox_sweep(state, list, mu_n, spec);
        break;
      case SolverScheme::GfbTraj:
        for (int i = 0; i < n_data; ++i)
          trajectory_step(state.u, A.rows[i], f.data[i], spec, mu_n,
                          report.skipped_atoms);
        prox_sweep(state, list, mu_n, spec);
        break;
      case SolverScheme::StochasticGfbTraj: {
        std::iota(perm.begin(), perm.end(), 0);
        rs.shuffle(perm);
        for (int id : perm) {
          if (id < n_data)
            trajectory_step(state.u, A.rows[id], f.data[id], spec, mu_n,
                            report.skipped_atoms);
          else
            apply_atom_prox(state, list.atoms[id - n_data], mu_n,
                            spec.antipodal);
        }
        break;
      }
      case SolverScheme::Cppa:
        for (int i = 0; i < n_data; ++i)
          prox_data_atom(state.u, A.rows[i], f.data[i], spec, mu_n,
                         report.skipped_atoms);
        prox_sweep(state, list, mu_n, spec);
        break;
    }
    if (spec.record_functional)
      report.functional_trace.push_back(
          functional_value(state, A, f, reg, spec.p, spec.antipodal));
  }

  report.result = std::move(state.u);
  report.iterations = spec.iterations;
  report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace

void SolverSpec::validate() const {
  if (iterations < 1) throw InvalidValue("solver iterations must be >= 1");
  if (!(mu0 > 0.0)) throw InvalidValue("solver mu0 must be positive");
  if (p < 1.0) throw InvalidValue("solver requires p >= 1");
  if (p == 1.0 && scheme != SolverScheme::Cppa)
    throw InvalidValue("gradient schemes require p > 1; use CPPA for p = 1");
  if (!(damping > 0.0) || damping > 1.0)
    throw InvalidValue("damping must lie in (0, 1]");
}

double functional_value(const OptimState& state, const MeasurementMatrix& A,
                        const Signal& f, const RegularizerSpec& reg, double p,
                        AntipodalPolicy policy) {
  const Signal au = apply(A, state.u, &f, context_mean_options(policy));
  double val = 0.0;
  for (int i = 0; i < f.size(); ++i)
    val += std::pow(dist(au.data[i], f.data[i]), p);
  return val + regularizer_value(reg, state, policy);
}

double functional_value(const Signal& u, const MeasurementMatrix& A,
                        const Signal& f, const RegularizerSpec& reg, double p,
                        AntipodalPolicy policy) {
  const Signal au = apply(A, u, &f, context_mean_options(policy));
  double val = 0.0;
  for (int i = 0; i < f.size(); ++i)
    val += std::pow(dist(au.data[i], f.data[i]), p);
  return val + regularizer_value(reg, u, policy);
}

SolveReport solve_gfb(const Signal& u0, const MeasurementMatrix& A,
                      const Signal& f, const RegularizerSpec& reg,
                      const SolverSpec& spec) {
  SolverSpec s = spec;
  s.scheme = SolverScheme::Gfb;
  return run(u0, A, f, reg, s);
}

SolveReport solve_gfb_traj(const Signal& u0, const MeasurementMatrix& A,
                           const Signal& f, const RegularizerSpec& reg,
                           const SolverSpec& spec) {
  SolverSpec s = spec;
  s.scheme = SolverScheme::GfbTraj;
  return run(u0, A, f, reg, s);
}

SolveReport solve_stochastic(const Signal& u0, const MeasurementMatrix& A,
                             const Signal& f, const RegularizerSpec& reg,
                             const SolverSpec& spec) {
  SolverSpec s = spec;
  s.scheme = SolverScheme::StochasticGfbTraj;
  return run(u0, A, f, reg, s);
}

SolveReport solve_cppa(const Signal& u0, const MeasurementMatrix& A,
                       const Signal& f, const RegularizerSpec& reg,
                       const SolverSpec& spec) {
  SolverSpec s = spec;
  s.scheme = SolverScheme::Cppa;
  return run(u0, A, f, reg, s);
}

SolveReport solve(const Signal& u0, const MeasurementMatrix& A,
                  const Signal& f, const RegularizerSpec& reg,
                  const SolverSpec& spec) {
  return run(u0, A, f, reg, spec);
}

}  // namespace mvr
