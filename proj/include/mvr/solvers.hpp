#pragma once

#include <cstdint>
#include <vector>

#include "mvr/differentials.hpp"
#include "mvr/measurement.hpp"
#include "mvr/regularizers.hpp"
#include "mvr/signal.hpp"

namespace mvr {

enum class SolverScheme { Gfb, GfbTraj, StochasticGfbTraj, Cppa };

struct SolverSpec {
  SolverScheme scheme = SolverScheme::GfbTraj;
  int iterations = 1000;
  /// Step schedule mu_n = mu0 / n (summable squares, divergent sum).
  double mu0 = 1.0;
  double p = 2.0;
  std::uint64_t seed = 0;              // stochastic scheme only
  bool record_functional = true;
  /// Target cumulative time of a trajectory pass; values < 1 damp the
  /// explicit part.
  double damping = 1.0;
  AntipodalPolicy antipodal = AntipodalPolicy::Error;

  void validate() const;
};

struct SolveReport {
  Signal result;
  std::vector<double> functional_trace;  // one entry per outer iteration
  double wall_time_seconds = 0.0;
  int iterations = 0;
  /// Data atoms skipped because their mean differential was singular.
  int skipped_atoms = 0;
};

/// F(u) = sum_i dist(A(u)_i, f_i)^p + R(u). Means are tie-broken toward the
/// data f. For TGV the regularizer value is obtained by inner minimization.
double functional_value(const Signal& u, const MeasurementMatrix& A,
                        const Signal& f, const RegularizerSpec& reg, double p,
                        AntipodalPolicy policy = AntipodalPolicy::Error);

/// State variant: TGV evaluates at the state's current auxiliary field.
double functional_value(const OptimState& state, const MeasurementMatrix& A,
                        const Signal& f, const RegularizerSpec& reg, double p,
                        AntipodalPolicy policy = AntipodalPolicy::Error);

SolveReport solve_gfb(const Signal& u0, const MeasurementMatrix& A,
                      const Signal& f, const RegularizerSpec& reg,
                      const SolverSpec& spec);

SolveReport solve_gfb_traj(const Signal& u0, const MeasurementMatrix& A,
                           const Signal& f, const RegularizerSpec& reg,
                           const SolverSpec& spec);

SolveReport solve_stochastic(const Signal& u0, const MeasurementMatrix& A,
                             const Signal& f, const RegularizerSpec& reg,
                             const SolverSpec& spec);

SolveReport solve_cppa(const Signal& u0, const MeasurementMatrix& A,
                       const Signal& f, const RegularizerSpec& reg,
                       const SolverSpec& spec);

/// Dispatch on spec.scheme.
SolveReport solve(const Signal& u0, const MeasurementMatrix& A,
                  const Signal& f, const RegularizerSpec& reg,
                  const SolverSpec& spec);

}  // namespace mvr
