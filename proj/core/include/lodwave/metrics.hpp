#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lodwave/assembly.hpp"
#include "lodwave/dynamics.hpp"
#include "lodwave/lod.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

using Snapshots = std::vector<std::vector<double>>;

/// B u^n for every snapshot.
Snapshots prolong(const MultiscaleBasis& basis, const Snapshots& coarse);
Snapshots prolong(const SparseMatrix& b, const Snapshots& coarse);

/// max_n ||u_ref^n - u^n||_1 / max_n ||u_ref^n||_1 with the full H1 norm.
/// Throws DomainError when every reference snapshot vanishes.
double linf_h1_error(const Snapshots& reference, const Snapshots& approx, const NormEvaluator& fine_norms);

/// max over n >= 1 of ||P (D u_ref^n - D u^n)||_0 on consecutive snapshots,
/// measured with the coarse L2 Gram matrix.
double dt_l2_error(const Snapshots& reference, const Snapshots& approx, double dt, const SparseMatrix& p,
                   const NormEvaluator& coarse_norms);

/// log2(e_H / e_{H/2}); throws DomainError unless both errors are positive.
double eoc(double coarse_error, double fine_error);

/// Smallest power of two s with ceil(steps / s) <= cap.
int evaluation_stride(int steps, int cap);

/// Coarse steps at which errors are evaluated: multiples of stride plus N_t.
std::vector<int> evaluation_steps(int steps, int stride);

/// What one coarse level needs from the fine reference.
struct ReferenceProbe {
  int key = 0;           ///< caller's identifier, usually the H exponent
  int coarse_steps = 0;  ///< N_t of the coarse scheme
  int stride = 1;        ///< evaluation stride in coarse steps
  const SparseMatrix* p = nullptr;  ///< weighted interpolation of that level
};

/// Fine reference data kept at the evaluation times of a set of probes:
/// full fine snapshots, and P-projections at steps n and n-1 for the time
/// derivative error.
class ReferenceSolution {
 public:
  ReferenceSolution() = default;
  ReferenceSolution(const TimeGrid& grid, std::vector<ReferenceProbe> probes);

  /// Observer to attach to the reference leapfrog run.
  Observer observer();

  const TimeGrid& grid() const noexcept { return grid_; }
  int ratio(int key) const;
  const ReferenceProbe& probe(int key) const;
  const std::vector<double>& fine_at(int ref_step) const;
  const std::vector<double>& projected_at(int key, int ref_step) const;
  std::size_t stored_snapshots() const noexcept { return fine_.size(); }
  double online_seconds = 0.0;

 private:
  TimeGrid grid_;
  std::vector<ReferenceProbe> probes_;
  std::map<int, std::vector<double>> fine_;
  std::map<std::pair<int, int>, std::vector<double>> projected_;
  std::map<int, std::vector<int>> fine_wanted_;        // ref step -> probe keys
  std::map<int, std::vector<int>> projection_wanted_;  // ref step -> probe keys
};

/// Runs the fine lumped-FEM leapfrog and keeps what the probes need. The
/// reference grid must be a multiple of every probe's coarse grid.
ReferenceSolution record_reference(const FemOperatorSet& fine_ops, const Forcing& forcing, const TimeGrid& grid,
                                   std::vector<ReferenceProbe> probes);

struct ErrorValues {
  double rel_err_h1 = 0.0;
  double err_dt_l2 = 0.0;
  double rel_err_energy = 0.0;  ///< same as rel_err_h1 in the alpha-energy norm; 0 without a stiffness
  int evaluated = 0;
};

/// Streams a coarse trajectory against a recorded reference.
class ErrorAccumulator {
 public:
  ErrorAccumulator(const ReferenceSolution& reference, int key, const SparseMatrix& b, const NormEvaluator& fine_norms,
                   const NormEvaluator& coarse_norms, double coarse_dt, const SparseMatrix* stiffness = nullptr);

  Observer observer();
  ErrorValues result() const;

 private:
  void observe(const StepView& v);

  const ReferenceSolution& ref_;
  int key_;
  int ratio_;
  const SparseMatrix& b_;
  const NormEvaluator& fine_norms_;
  const NormEvaluator& coarse_norms_;
  double dt_;
  std::vector<int> steps_;
  std::size_t next_ = 0;
  double max_err_ = 0.0;
  double max_ref_ = 0.0;
  double max_dt_ = 0.0;
  const SparseMatrix* stiffness_;
  double max_energy_err_ = 0.0;
  double max_energy_ref_ = 0.0;
  std::vector<double> bu_, diff_, du_;
};

}  // namespace lodwave
