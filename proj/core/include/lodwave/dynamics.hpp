#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lodwave/assembly.hpp"
#include "lodwave/lod.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

/// Uniform grid t^n = n T / N_t, n = 0..N_t.
struct TimeGrid {
  double t_final = 1.0;
  int steps = 2;

  double dt() const noexcept { return t_final / steps; }
  double time(int n) const noexcept { return t_final * n / steps; }
};

/// Throws BoundsError unless steps >= 2 and T > 0.
TimeGrid make_time_grid(double t_final, int steps);
/// Smallest N_t >= 2 with T / N_t <= dt.
TimeGrid grid_for_step(double t_final, double dt);

struct CflResult {
  double dt_max = 0.0;  ///< 2 sqrt(1 - delta) / sqrt(lambda)
  double lambda = 0.0;  ///< estimate of lambda_max(m^{-1} K) actually used
  bool fallback = false;  ///< Lanczos did not converge; Gershgorin bound used
  TimeGrid grid;
};

/// Gershgorin bound max_i sum_j |K_ij| / m_i on lambda_max(m^{-1} K).
double gershgorin_bound(const SparseMatrix& k, std::span<const double> m);
CflResult cfl_dt(const SparseMatrix& k, std::span<const double> m, double delta, double t_final);

/// Right-hand side at time t, already in the scheme's test space.
using Forcing = std::function<void(double t, std::span<double> out)>;

/// Forcing of the form shape * g(t).
Forcing separable_forcing(std::vector<double> shape, std::function<double(double)> g);

struct StepView {
  int n = 0;
  double t = 0.0;
  std::span<const double> u_prev;  ///< u^{n-1}; empty for n = 0
  std::span<const double> u;       ///< u^n
};
using Observer = std::function<void(const StepView&)>;

struct LeapfrogOptions {
  int snapshot_stride = 0;  ///< store u^n for n % stride == 0 and n = N_t; 0 stores nothing
  bool record_energy = false;
  double blowup_factor = 1e12;
  double dt_max = 0.0;      ///< when positive, steps above it raise ConfigError...
  bool allow_unstable = false;  ///< ...unless this is set (a warning is logged instead)
  Observer observer;        ///< called for every n = 0..N_t
  std::vector<double> u0;   ///< optional initial pair; zero when empty
  std::vector<double> u1;
};

struct WaveTrajectory {
  TimeGrid grid;
  std::string space;  ///< "coarse" or "fine"
  std::vector<int> steps;
  std::vector<std::vector<double>> snapshots;
  std::vector<double> energy;  ///< E^n for n = 1..N_t when recorded
  std::vector<double> final_prev;
  std::vector<double> final_state;
  std::int64_t solver_iterations = 0;
  double online_seconds = 0.0;
};

/// u^{n+1} = 2u^n - u^{n-1} + dt^2 (F(t^n) - m^{-1} K u^n). One matvec and a
/// diagonal scaling per step; no linear solve. Throws InstabilityError when
/// |u|_inf exceeds blowup_factor times the data scale.
WaveTrajectory leapfrog_lumped(const SparseMatrix& k, std::span<const double> m, const Forcing& forcing,
                               const TimeGrid& grid, const LeapfrogOptions& options = {});
WaveTrajectory leapfrog_lumped(const MultiscaleBasis& basis, const Forcing& forcing, const TimeGrid& grid,
                               const LeapfrogOptions& options = {});
WaveTrajectory leapfrog_lumped(const FemOperatorSet& ops, const Forcing& forcing, const TimeGrid& grid,
                               const LeapfrogOptions& options = {});

/// Same recursion with M a = F(t^n) - K u^n solved by Jacobi-preconditioned CG
/// from a zero initial guess. solver_iterations sums the CG iterations.
WaveTrajectory leapfrog_consistent(const SparseMatrix& mass, const SparseMatrix& k, const Forcing& forcing,
                                   const TimeGrid& grid, const CgOptions& cg = {1e-8, 10000, true},
                                   const LeapfrogOptions& options = {});

/// E^n = 1/2 sum m_i ((u^n - u^{n-1}) / dt)_i^2 + 1/2 (u^{n-1})^T K u^n.
double discrete_energy(std::span<const double> u_prev, std::span<const double> u, double dt, const SparseMatrix& k,
                       std::span<const double> m);

struct EnergyCheck {
  double min_energy = 0.0;
  double max_relative_drift = 0.0;  ///< max |E^n - E^1| / E^1
  bool exploded = false;
  int steps_run = 0;
};

/// Homogeneous run (F = 0) from u^0 = 0 and a seeded random u^1.
EnergyCheck homogeneous_energy_test(const SparseMatrix& k, std::span<const double> m, const TimeGrid& grid,
                                    std::uint64_t seed = 11);

}  // namespace lodwave
