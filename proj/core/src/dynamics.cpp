#include "lodwave/dynamics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <random>

#include "lodwave/error.hpp"

namespace lodwave {

TimeGrid make_time_grid(double t_final, int steps) {
  if (!(t_final > 0.0)) throw BoundsError("final time must be positive");
  if (steps < 2) throw BoundsError("need at least 2 time steps, got " + std::to_string(steps));
  return {t_final, steps};
}

TimeGrid grid_for_step(double t_final, double dt) {
  if (!(dt > 0.0)) throw BoundsError("time step must be positive");
  const double ratio = t_final / dt;
  // Absorb rounding in ratios that are integers in exact arithmetic.
  const double rounded = std::round(ratio);
  const double steps = std::abs(ratio - rounded) <= 1e-9 * rounded ? rounded : std::ceil(ratio);
  return make_time_grid(t_final, std::max(2, static_cast<int>(steps)));
}

double gershgorin_bound(const SparseMatrix& k, std::span<const double> m) {
  if (m.size() != static_cast<std::size_t>(k.rows())) throw DimensionError("lumped mass size mismatch");
  const auto rp = k.row_ptr();
  const auto va = k.values();
  double bound = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double s = 0.0;
    for (auto p = rp[i]; p < rp[i + 1]; ++p) s += std::abs(va[static_cast<std::size_t>(p)]);
    bound = std::max(bound, s / m[i]);
  }
  return bound;
}

CflResult cfl_dt(const SparseMatrix& k, std::span<const double> m, double delta, double t_final) {
  if (!(delta >= 0.0 && delta < 1.0)) throw BoundsError("CFL safety delta must lie in [0, 1)");
  if (m.size() != static_cast<std::size_t>(k.rows())) throw DimensionError("lumped mass size mismatch");
  std::vector<double> inv(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!(m[i] > 0.0)) throw DomainError("lumped mass must be positive");
    inv[i] = 1.0 / m[i];
  }
  CflResult res;
  const EigenEstimate est = lambda_max(k, inv);
  if (est.converged && est.value > 0.0) {
    res.lambda = est.value;
  } else {
    res.lambda = gershgorin_bound(k, m);
    res.fallback = true;
  }
  if (!(res.lambda > 0.0)) throw DomainError("operator has no positive eigenvalue");
  res.dt_max = 2.0 * std::sqrt(1.0 - delta) / std::sqrt(res.lambda);
  res.grid = grid_for_step(t_final, res.dt_max);
  return res;
}

Forcing separable_forcing(std::vector<double> shape, std::function<double(double)> g) {
  return [shape = std::move(shape), g = std::move(g)](double t, std::span<double> out) {
    const double s = g(t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * shape[i];
  };
}

namespace {

/// Shared three-term loop. `accel(n, u, out)` writes the acceleration
/// F(t^n) - (operator) u^n and returns |F(t^n)|_inf; `ku` exposes K u^n
/// for the energy when the caller has it.
template <class Accel>
WaveTrajectory run_leapfrog(int n_dofs, const TimeGrid& grid, const LeapfrogOptions& options, const char* space,
                            Accel&& accel, const SparseMatrix* k, std::span<const double> m) {
  if (options.dt_max > 0.0 && grid.dt() > options.dt_max) {
    if (!options.allow_unstable) {
      throw ConfigError("time step " + std::to_string(grid.dt()) + " exceeds the CFL bound " +
                        std::to_string(options.dt_max));
    }
    std::cerr << "warning: time step " << grid.dt() << " exceeds the CFL bound " << options.dt_max << '\n';
  }
  const auto n = static_cast<std::size_t>(n_dofs);
  WaveTrajectory traj;
  traj.grid = grid;
  traj.space = space;

  std::vector<double> prev(n, 0.0), cur(n, 0.0), next(n, 0.0), acc(n, 0.0), kv(n, 0.0);
  if (!options.u0.empty()) {
    if (options.u0.size() != n) throw DimensionError("initial state u0 has the wrong size");
    prev = options.u0;
  }
  if (!options.u1.empty()) {
    if (options.u1.size() != n) throw DimensionError("initial state u1 has the wrong size");
    cur = options.u1;
  }
  const double dt = grid.dt();
  const double dt2 = dt * dt;
  double scale = std::max(norm_inf(prev), norm_inf(cur));
  const double horizon = std::max(1.0, grid.t_final * grid.t_final);

  auto store = [&](int step, std::span<const double> u) {
    if (options.snapshot_stride > 0 && (step % options.snapshot_stride == 0 || step == grid.steps)) {
      traj.steps.push_back(step);
      traj.snapshots.emplace_back(u.begin(), u.end());
    }
  };
  auto energy = [&]() {
    if (!options.record_energy) return;
    k->multiply(cur, kv);
    double kin = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (cur[i] - prev[i]) / dt;
      kin += m[i] * d * d;
    }
    traj.energy.push_back(0.5 * kin + 0.5 * dot(prev, kv));
  };

  const auto start = std::chrono::steady_clock::now();
  if (options.observer) options.observer({0, 0.0, {}, prev});
  store(0, prev);
  if (options.observer) options.observer({1, grid.time(1), prev, cur});
  store(1, cur);
  energy();
  for (int step = 1; step < grid.steps; ++step) {
    const double fmax = accel(step, cur, acc);
    scale = std::max(scale, fmax * horizon);
    double umax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = 2.0 * cur[i] - prev[i] + dt2 * acc[i];
      umax = std::max(umax, std::abs(next[i]));
    }
    if (!(umax <= options.blowup_factor * std::max(scale, 1e-300))) {
      throw InstabilityError("leapfrog blow-up at step " + std::to_string(step + 1) + " (|u|_inf = " +
                                 std::to_string(umax) + ")",
                             step + 1);
    }
    std::swap(prev, cur);
    std::swap(cur, next);
    if (options.observer) options.observer({step + 1, grid.time(step + 1), prev, cur});
    store(step + 1, cur);
    energy();
  }
  traj.online_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  traj.final_prev = std::move(prev);
  traj.final_state = std::move(cur);
  return traj;
}

}  // namespace

WaveTrajectory leapfrog_lumped(const SparseMatrix& k, std::span<const double> m, const Forcing& forcing,
                               const TimeGrid& grid, const LeapfrogOptions& options) {
  if (k.rows() != k.cols() || m.size() != static_cast<std::size_t>(k.rows())) {
    throw DimensionError("lumped leapfrog needs square K and matching lumped mass");
  }
  std::vector<double> inv_m(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) inv_m[i] = 1.0 / m[i];
  std::vector<double> f(m.size(), 0.0);
  auto accel = [&](int step, std::span<const double> u, std::span<double> out) {
    k.multiply(u, out);
    double fmax = 0.0;
    if (forcing) {
      forcing(grid.time(step), f);
      fmax = norm_inf(f);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = f[i] - inv_m[i] * out[i];
    } else {
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = -inv_m[i] * out[i];
    }
    return fmax;
  };
  return run_leapfrog(k.rows(), grid, options, "coarse", accel, &k, m);
}

WaveTrajectory leapfrog_lumped(const MultiscaleBasis& basis, const Forcing& forcing, const TimeGrid& grid,
                               const LeapfrogOptions& options) {
  return leapfrog_lumped(basis.k, basis.lumped, forcing, grid, options);
}

WaveTrajectory leapfrog_lumped(const FemOperatorSet& ops, const Forcing& forcing, const TimeGrid& grid,
                               const LeapfrogOptions& options) {
  WaveTrajectory t = leapfrog_lumped(ops.stiffness, ops.lumped, forcing, grid, options);
  t.space = "fine";
  return t;
}

WaveTrajectory leapfrog_consistent(const SparseMatrix& mass, const SparseMatrix& k, const Forcing& forcing,
                                   const TimeGrid& grid, const CgOptions& cg, const LeapfrogOptions& options) {
  if (mass.rows() != k.rows() || mass.cols() != k.cols() || k.rows() != k.cols()) {
    throw DimensionError("consistent leapfrog needs square M and K of equal size");
  }
  const auto n = static_cast<std::size_t>(k.rows());
  ConjugateGradient solver(mass, cg);
  std::vector<double> rhs(n, 0.0), f(n, 0.0);
  std::int64_t iterations = 0;
  auto accel = [&](int step, std::span<const double> u, std::span<double> out) {
    k.multiply(u, rhs);
    double fmax = 0.0;
    if (forcing) {
      forcing(grid.time(step), f);
      fmax = norm_inf(f);
      for (std::size_t i = 0; i < n; ++i) rhs[i] = f[i] - rhs[i];
    } else {
      for (std::size_t i = 0; i < n; ++i) rhs[i] = -rhs[i];
    }
    std::fill(out.begin(), out.end(), 0.0);
    try {
      iterations += solver.solve(rhs, out);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError("mass solve failed at step " + std::to_string(step) + ": " + e.what(), e.residual(),
                             e.iterations());
    }
    return fmax;
  };
  // The energy uses the diagonal of the consistent mass only as a diagnostic.
  const std::vector<double> diag = mass.diagonal_entries();
  WaveTrajectory t = run_leapfrog(k.rows(), grid, options, "coarse", accel, &k, diag);
  t.solver_iterations = iterations;
  return t;
}

double discrete_energy(std::span<const double> u_prev, std::span<const double> u, double dt, const SparseMatrix& k,
                       std::span<const double> m) {
  if (u_prev.size() != u.size() || u.size() != m.size() || u.size() != static_cast<std::size_t>(k.rows())) {
    throw DimensionError("discrete_energy size mismatch");
  }
  const auto ku = matvec(k, u);
  double kin = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = (u[i] - u_prev[i]) / dt;
    kin += m[i] * d * d;
  }
  return 0.5 * kin + 0.5 * dot(u_prev, ku);
}

EnergyCheck homogeneous_energy_test(const SparseMatrix& k, std::span<const double> m, const TimeGrid& grid,
                                    std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  LeapfrogOptions opts;
  opts.u0.assign(m.size(), 0.0);
  opts.u1.resize(m.size());
  for (auto& x : opts.u1) x = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;

  EnergyCheck check;
  std::vector<double> energy;
  opts.observer = [&](const StepView& v) {
    if (v.n >= 1) {
      energy.push_back(discrete_energy(v.u_prev, v.u, grid.dt(), k, m));
      check.steps_run = v.n;
    }
  };
  try {
    leapfrog_lumped(k, m, Forcing{}, grid, opts);
  } catch (const InstabilityError&) {
    check.exploded = true;
  }
  if (!energy.empty()) {
    check.min_energy = *std::min_element(energy.begin(), energy.end());
    for (double e : energy) {
      check.max_relative_drift = std::max(check.max_relative_drift, std::abs(e - energy.front()) / energy.front());
    }
  }
  return check;
}

}  // namespace lodwave
