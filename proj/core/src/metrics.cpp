#include "lodwave/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "lodwave/error.hpp"

namespace lodwave {

Snapshots prolong(const SparseMatrix& b, const Snapshots& coarse) {
  Snapshots out;
  out.reserve(coarse.size());
  for (const auto& u : coarse) {
    if (u.size() != static_cast<std::size_t>(b.cols())) throw DimensionError("snapshot size does not match basis");
    out.push_back(matvec(b, u));
  }
  return out;
}

Snapshots prolong(const MultiscaleBasis& basis, const Snapshots& coarse) { return prolong(basis.b, coarse); }

double linf_h1_error(const Snapshots& reference, const Snapshots& approx, const NormEvaluator& fine_norms) {
  if (reference.size() != approx.size()) throw DimensionError("trajectories have different snapshot counts");
  double num = 0.0;
  double den = 0.0;
  std::vector<double> d;
  for (std::size_t n = 0; n < reference.size(); ++n) {
    if (reference[n].size() != approx[n].size()) throw DimensionError("snapshot size mismatch");
    d.resize(reference[n].size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = reference[n][i] - approx[n][i];
    num = std::max(num, fine_norms.h1(d));
    den = std::max(den, fine_norms.h1(reference[n]));
  }
  if (!(den > 0.0)) throw DomainError("relative error undefined: reference trajectory vanishes");
  return num / den;
}

double dt_l2_error(const Snapshots& reference, const Snapshots& approx, double dt, const SparseMatrix& p,
                   const NormEvaluator& coarse_norms) {
  if (reference.size() != approx.size()) throw DimensionError("trajectories have different snapshot counts");
  if (reference.size() < 2) throw DomainError("time-derivative error needs at least 2 snapshots");
  double worst = 0.0;
  std::vector<double> d;
  for (std::size_t n = 1; n < reference.size(); ++n) {
    d.resize(reference[n].size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      d[i] = ((reference[n][i] - reference[n - 1][i]) - (approx[n][i] - approx[n - 1][i])) / dt;
    }
    worst = std::max(worst, coarse_norms.l2(matvec(p, d)));
  }
  return worst;
}

double eoc(double coarse_error, double fine_error) {
  if (!(coarse_error > 0.0) || !(fine_error > 0.0)) throw DomainError("EOC needs positive errors");
  return std::log2(coarse_error / fine_error);
}

int evaluation_stride(int steps, int cap) {
  if (cap < 1) throw BoundsError("evaluation cap must be positive");
  int s = 1;
  while ((steps + s - 1) / s > cap) s *= 2;
  return s;
}

std::vector<int> evaluation_steps(int steps, int stride) {
  std::vector<int> out;
  for (int n = 0; n <= steps; n += stride) out.push_back(n);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

// ---------------------------------------------------------------------------

ReferenceSolution::ReferenceSolution(const TimeGrid& grid, std::vector<ReferenceProbe> probes)
    : grid_(grid), probes_(std::move(probes)) {
  for (const auto& pr : probes_) {
    if (pr.coarse_steps < 1 || grid_.steps % pr.coarse_steps != 0) {
      throw ConfigError("reference grid with " + std::to_string(grid_.steps) + " steps is not a multiple of " +
                        std::to_string(pr.coarse_steps));
    }
    if (pr.p == nullptr) throw ConfigError("reference probe without interpolation operator");
    const int q = grid_.steps / pr.coarse_steps;
    for (int n : evaluation_steps(pr.coarse_steps, pr.stride)) {
      fine_wanted_[n * q].push_back(pr.key);
      projection_wanted_[n * q].push_back(pr.key);
      if (n >= 1) projection_wanted_[(n - 1) * q].push_back(pr.key);
    }
  }
}

const ReferenceProbe& ReferenceSolution::probe(int key) const {
  for (const auto& pr : probes_) {
    if (pr.key == key) return pr;
  }
  throw ConfigError("no reference probe with key " + std::to_string(key));
}

int ReferenceSolution::ratio(int key) const { return grid_.steps / probe(key).coarse_steps; }

Observer ReferenceSolution::observer() {
  return [this](const StepView& v) {
    if (fine_wanted_.count(v.n)) fine_[v.n].assign(v.u.begin(), v.u.end());
    if (auto it = projection_wanted_.find(v.n); it != projection_wanted_.end()) {
      for (int key : it->second) {
        auto& slot = projected_[{key, v.n}];
        if (slot.empty()) slot = matvec(*probe(key).p, v.u);
      }
    }
  };
}

const std::vector<double>& ReferenceSolution::fine_at(int ref_step) const {
  const auto it = fine_.find(ref_step);
  if (it == fine_.end()) throw ConfigError("reference snapshot at step " + std::to_string(ref_step) + " not stored");
  return it->second;
}

const std::vector<double>& ReferenceSolution::projected_at(int key, int ref_step) const {
  const auto it = projected_.find({key, ref_step});
  if (it == projected_.end()) {
    throw ConfigError("reference projection at step " + std::to_string(ref_step) + " not stored");
  }
  return it->second;
}

ReferenceSolution record_reference(const FemOperatorSet& fine_ops, const Forcing& forcing, const TimeGrid& grid,
                                   std::vector<ReferenceProbe> probes) {
  ReferenceSolution ref(grid, std::move(probes));
  LeapfrogOptions opts;
  opts.observer = ref.observer();
  const WaveTrajectory t = leapfrog_lumped(fine_ops, forcing, grid, opts);
  ref.online_seconds = t.online_seconds;
  return ref;
}

// ---------------------------------------------------------------------------

ErrorAccumulator::ErrorAccumulator(const ReferenceSolution& reference, int key, const SparseMatrix& b,
                                   const NormEvaluator& fine_norms, const NormEvaluator& coarse_norms,
                                   double coarse_dt, const SparseMatrix* stiffness)
    : ref_(reference),
      key_(key),
      ratio_(reference.ratio(key)),
      b_(b),
      fine_norms_(fine_norms),
      coarse_norms_(coarse_norms),
      dt_(coarse_dt),
      stiffness_(stiffness) {
  const auto& pr = reference.probe(key);
  steps_ = evaluation_steps(pr.coarse_steps, pr.stride);
  if (b.rows() != fine_norms.size()) throw DimensionError("basis rows do not match the fine mesh");
  if (pr.p->rows() != coarse_norms.size()) throw DimensionError("interpolation rows do not match the coarse mesh");
}

Observer ErrorAccumulator::observer() {
  return [this](const StepView& v) { observe(v); };
}

void ErrorAccumulator::observe(const StepView& v) {
  if (next_ >= steps_.size() || v.n != steps_[next_]) return;
  ++next_;
  const auto& uref = ref_.fine_at(v.n * ratio_);
  bu_.resize(uref.size());
  b_.multiply(v.u, bu_);
  diff_.resize(uref.size());
  for (std::size_t i = 0; i < uref.size(); ++i) diff_[i] = uref[i] - bu_[i];
  max_err_ = std::max(max_err_, fine_norms_.h1(diff_));
  max_ref_ = std::max(max_ref_, fine_norms_.h1(uref));
  if (stiffness_ != nullptr) {
    max_energy_err_ = std::max(max_energy_err_, std::sqrt(std::max(0.0, dot(diff_, matvec(*stiffness_, diff_)))));
    max_energy_ref_ = std::max(max_energy_ref_, std::sqrt(std::max(0.0, dot(uref, matvec(*stiffness_, uref)))));
  }
  if (v.n < 1) return;

  du_.resize(v.u.size());
  for (std::size_t i = 0; i < du_.size(); ++i) du_[i] = v.u[i] - v.u_prev[i];
  b_.multiply(du_, bu_);
  const auto pbdu = matvec(*ref_.probe(key_).p, bu_);
  const auto& p1 = ref_.projected_at(key_, v.n * ratio_);
  const auto& p0 = ref_.projected_at(key_, (v.n - 1) * ratio_);
  std::vector<double> e(pbdu.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = ((p1[i] - p0[i]) - pbdu[i]) / dt_;
  max_dt_ = std::max(max_dt_, coarse_norms_.l2(e));
}

ErrorValues ErrorAccumulator::result() const {
  if (next_ != steps_.size()) {
    throw ConfigError("coarse run stopped after " + std::to_string(next_) + " of " + std::to_string(steps_.size()) +
                      " evaluation steps");
  }
  if (!(max_ref_ > 0.0)) throw DomainError("relative error undefined: reference trajectory vanishes");
  ErrorValues v;
  v.rel_err_h1 = max_err_ / max_ref_;
  v.err_dt_l2 = max_dt_;
  v.rel_err_energy = max_energy_ref_ > 0.0 ? max_energy_err_ / max_energy_ref_ : 0.0;
  v.evaluated = static_cast<int>(steps_.size());
  return v;
}

}  // namespace lodwave
