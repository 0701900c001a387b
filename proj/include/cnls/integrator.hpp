#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "cnls/assembly.hpp"
#include "cnls/field.hpp"
#include "cnls/grid.hpp"
#include "cnls/sylvester.hpp"

namespace cnls {

/// How the first marching level is produced from the initial data.
enum class BootstrapMode { taylor_from_velocity, exact_samples };

/// Scaling of the interaction and forcing terms in the multiplied-through
/// scheme. time_scaled is the consistent choice, weight = kappa * l; unit
/// keeps them unscaled and only exists for linear-algebra experiments.
enum class WeightRule { time_scaled, unit };

inline double nonlinear_weight(const SchemeParams& p, double step, WeightRule rule) {
  return rule == WeightRule::time_scaled ? static_cast<double>(p.kappa) * step : 1.0;
}

/// Raw forcing sampler: t -> (G1, G2) on the grid. An empty function means
/// the homogeneous system.
using SourceFn = std::function<StatePair(double)>;

struct FixedPointDivergence : std::runtime_error {
  int step;
  int iterations;
  FixedPointDivergence(int step_, int iterations_)
      : std::runtime_error("fixed-point iteration failed to converge at step " +
                           std::to_string(step_) + " after " + std::to_string(iterations_) +
                           " iterations"),
        step(step_),
        iterations(iterations_) {}
};

/// Everything a run needs, assembled once. In split mode the matrices are
/// constant, so their Schur factorizations are shared by every step.
struct SchemeSystem {
  SpatialGrid grid;
  TimeGrid tgrid;
  SchemeParams params;
  MeshRatio ratio;
  GammaTable gamma;
  double weight = 0.0;
  SchemeMatrices mats;
  std::optional<LyapunovOperator> op_a;  // factorization of A1 (split mode)
  std::optional<LyapunovOperator> op_b;  // factorization of B1 (split mode)
  SourceFn source;
};

inline SchemeSystem make_scheme_system(const SpatialGrid& grid, const TimeGrid& tgrid,
                                       const SchemeParams& params,
                                       NonlinearMode mode = NonlinearMode::split,
                                       RightFactor rf = RightFactor::same,
                                       WeightRule rule = WeightRule::time_scaled,
                                       SourceFn source = {}) {
  validate_scheme_params(params);
  SchemeSystem sys;
  sys.grid = grid;
  sys.tgrid = tgrid;
  sys.params = params;
  sys.ratio = validate_step_ratio(grid, tgrid);
  sys.gamma = make_gamma_table(params, sys.ratio);
  sys.weight = nonlinear_weight(params, tgrid.step, rule);
  DiagCoefficients zero = zero_diag_coefficients(grid.node_count(), params, sys.ratio);
  sys.mats = assemble_matrices(zero, sys.gamma, params, mode, rf);
  if (mode == NonlinearMode::split) {
    sys.op_a.emplace(sys.mats.A1);
    sys.op_b.emplace(sys.mats.B1);
  }
  sys.source = std::move(source);
  return sys;
}

/// Builds the two-level starting window at n = 1.
///
/// taylor_from_velocity: W1 = W0 + l * dW/dt, first order in l, which is
/// enough to keep the three-level scheme at its full order. exact_samples
/// asks the provided closed-form state for the level instead.
inline ThreeLevelState bootstrap(const StatePair& initial, BootstrapMode mode,
                                 const TimeGrid& tgrid, const StatePair* velocity = nullptr,
                                 const std::function<StatePair(double)>& exact = {}) {
  ThreeLevelState st;
  st.previous = initial;
  st.n = 1;
  st.t = tgrid.time(1);
  if (mode == BootstrapMode::taylor_from_velocity) {
    if (velocity == nullptr)
      throw std::invalid_argument("bootstrap: taylor_from_velocity needs a velocity pair");
    st.current.u = initial.u + tgrid.step * velocity->u;
    st.current.v = initial.v + tgrid.step * velocity->v;
  } else {
    if (!exact) throw std::invalid_argument("bootstrap: exact_samples needs a sampler");
    st.current = exact(st.t);
  }
  return st;
}

/// Distance between the level reached after one step and the two-step Taylor
/// prediction W0 + 2 l * dW/dt; a quick consistency probe for the bootstrap.
inline double taylor_consistency_gap(const ThreeLevelState& after_first_step,
                                     const StatePair& initial, const StatePair& velocity,
                                     double step) {
  double gu = l2_norm(after_first_step.current.u - initial.u - 2.0 * step * velocity.u);
  double gv = l2_norm(after_first_step.current.v - initial.v - 2.0 * step * velocity.v);
  return std::max(gu, gv);
}

struct AdvanceOptions {
  double fp_tol = 1e-12;
  int fp_max = 50;
  double blowup_threshold = std::numeric_limits<double>::infinity();
};

struct AdvanceResult {
  ThreeLevelState state;
  int fp_iterations = 0;
};

/// One step of the three-level scheme: solve the two Lyapunov problems for
/// level n+1 and shift the window.
///
/// Split mode wraps the solves in a fixed-point iteration on the entrywise
/// interaction, with g frozen at level n so the two component solves stay
/// independent within an iterate. Diagonal mode rebuilds the matrices from
/// the level-n diagonal samples and performs a single solve.
inline AdvanceResult advance(const ThreeLevelState& state, const SchemeSystem& sys,
                             const AdvanceOptions& opts = {}) {
  const RightFactor rf = sys.mats.right_factor;
  const Eigen::Index n = state.current.u.rows();

  StatePair scaled_source;
  const StatePair* source_ptr = nullptr;
  if (sys.source) {
    StatePair raw = sys.source(state.t);
    scaled_source.u = sys.weight * raw.u;
    scaled_source.v = sys.weight * raw.v;
    source_ptr = &scaled_source;
  }

  ThreeLevelState next;
  next.previous = state.current;
  next.n = state.n + 1;
  next.t = state.t + sys.tgrid.step;

  if (sys.mats.mode == NonlinearMode::diagonal) {
    DiagCoefficients coeffs =
        diag_coefficients(state.current.u, state.current.v, sys.params, sys.ratio, sys.weight);
    SchemeMatrices mats =
        assemble_matrices(coeffs, sys.gamma, sys.params, NonlinearMode::diagonal, rf);
    StatePair zero{ComplexField::Zero(n, n), ComplexField::Zero(n, n)};
    StatePair rhs = step_rhs(state, mats, zero, source_ptr);
    next.current.u = LyapunovOperator(mats.A1).solve(rhs.u, rf);
    next.current.v = LyapunovOperator(mats.B1).solve(rhs.v, rf);
    return {std::move(next), 1};
  }

  // Split mode. Base right-hand side without the interaction term.
  StatePair zero{ComplexField::Zero(n, n), ComplexField::Zero(n, n)};
  StatePair base = step_rhs(state, sys.mats, zero, source_ptr);
  RealField gu = g_field(state.current.u, state.current.v, sys.params);
  RealField gv = g_field(state.current.v, state.current.u, sys.params);

  ComplexField x = state.current.u;
  ComplexField y = state.current.v;
  for (int k = 0; k < opts.fp_max; ++k) {
    ComplexField bar_u = bar_average(x, state.current.u, state.previous.u, sys.params);
    ComplexField bar_v = bar_average(y, state.current.v, state.previous.v, sys.params);
    // interaction terms N = weight * g .* bar
    ComplexField rhs_u = base.u - sys.weight * (gu.cast<Complex>().cwiseProduct(bar_u));
    ComplexField rhs_v = base.v - sys.weight * (gv.cast<Complex>().cwiseProduct(bar_v));
    ComplexField xn = sys.op_a->solve(rhs_u, rf);
    ComplexField yn = sys.op_b->solve(rhs_v, rf);
    if (!all_finite(xn) || !all_finite(yn) || l2_norm(xn) > opts.blowup_threshold ||
        l2_norm(yn) > opts.blowup_threshold)
      throw FixedPointDivergence(next.n, k + 1);
    double du = l2_norm(xn - x);
    double dv = l2_norm(yn - y);
    bool done = du <= opts.fp_tol * std::max(l2_norm(x), 1e-300) &&
                dv <= opts.fp_tol * std::max(l2_norm(y), 1e-300);
    x = std::move(xn);
    y = std::move(yn);
    if (done) {
      next.current.u = std::move(x);
      next.current.v = std::move(y);
      return {std::move(next), k + 1};
    }
  }
  throw FixedPointDivergence(next.n, opts.fp_max);
}

struct NormSample {
  int n = 0;
  double t = 0.0;
  double norm_u = 0.0;
  double norm_v = 0.0;
};

struct RunMonitor {
  std::vector<NormSample> norm_history;
  int max_fp_iterations = 0;
  bool diverged = false;
  std::optional<int> divergence_step;
};

struct Snapshot {
  int n = 0;
  double t = 0.0;
  StatePair fields;
};

struct RunOptions {
  double fp_tol = 1e-12;
  int fp_max = 50;
  double blowup_factor = 1e6;
  int snapshot_every = 10;
  bool keep_snapshots = true;
  std::function<void(const ThreeLevelState&)> observer;
};

struct RunResult {
  ThreeLevelState state;
  RunMonitor monitor;
  std::vector<Snapshot> snapshots;
};

/// Marches from the bootstrapped window to level tgrid.step_count.
///
/// Instability is reported, not thrown: a blow-up past
/// blowup_factor * (|U0| + 1), a non-finite field or a stalled fixed point
/// set monitor.diverged and stop the march. A singular operator still
/// propagates as SingularOperator since no amount of marching repairs it.
inline RunResult run(ThreeLevelState state, const SchemeSystem& sys, const RunOptions& opts = {}) {
  RunResult result;
  RunMonitor& mon = result.monitor;

  const double threshold = opts.blowup_factor * (l2_norm(state.previous.u) + 1.0);
  AdvanceOptions adv{opts.fp_tol, opts.fp_max, threshold};

  mon.norm_history.push_back(NormSample{state.n - 1, state.t - sys.tgrid.step,
                                        l2_norm(state.previous.u), l2_norm(state.previous.v)});
  mon.norm_history.push_back(
      NormSample{state.n, state.t, l2_norm(state.current.u), l2_norm(state.current.v)});

  auto take_snapshot = [&](const ThreeLevelState& st) {
    if (!opts.keep_snapshots) return;
    if (!result.snapshots.empty() && result.snapshots.back().n == st.n) return;
    result.snapshots.push_back(Snapshot{st.n, st.t, st.current});
  };

  while (state.n < sys.tgrid.step_count) {
    AdvanceResult stepped;
    try {
      stepped = advance(state, sys, adv);
    } catch (const FixedPointDivergence& e) {
      mon.diverged = true;
      mon.divergence_step = e.step;
      break;
    }
    state = std::move(stepped.state);
    mon.max_fp_iterations = std::max(mon.max_fp_iterations, stepped.fp_iterations);

    const double nu = l2_norm(state.current.u);
    const double nv = l2_norm(state.current.v);
    mon.norm_history.push_back(NormSample{state.n, state.t, nu, nv});
    if (!all_finite(state.current.u) || !all_finite(state.current.v) || nu > threshold ||
        nv > threshold) {
      mon.diverged = true;
      mon.divergence_step = state.n;
      break;
    }

    if (opts.observer) opts.observer(state);
    if (opts.snapshot_every > 0 && state.n % opts.snapshot_every == 0) take_snapshot(state);
  }

  take_snapshot(state);
  result.state = std::move(state);
  return result;
}

}  // namespace cnls
