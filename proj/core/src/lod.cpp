#include "lodwave/lod.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "lodwave/error.hpp"

namespace lodwave {

std::string ell_label(int ell) { return ell == kGlobalPatch ? "inf" : std::to_string(ell); }

FineProblem make_fine_problem(const MeshLevel& fine, const CoefficientField& alpha, const CoefficientField& beta) {
  FineProblem p;
  p.fine = fine;
  p.alpha = alpha;
  p.beta = beta;
  p.alpha_fine = values_on_fine(alpha, fine);
  p.beta_fine = values_on_fine(beta, fine);
  p.ops.stiffness = assemble_stiffness_elementwise(fine, p.alpha_fine);
  p.ops.mass = assemble_mass_elementwise(fine, p.beta_fine);
  p.ops.lumped = assemble_lumped_elementwise(fine, p.beta_fine);
  p.ops.mesh_exponent = fine.exponent();
  p.ops.fine_exponent = fine.exponent();
  p.ops.provenance = alpha.provenance + " | " + beta.provenance;
  return p;
}

namespace {

void check_levels(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi) {
  if (coarse.exponent() > problem.fine.exponent()) {
    throw NestingError("coarse level " + std::to_string(coarse.exponent()) + " is finer than the fine level " +
                       std::to_string(problem.fine.exponent()));
  }
  if (pi.coarse_exponent != coarse.exponent() || pi.fine_exponent != problem.fine.exponent()) {
    throw DimensionError("interpolation operator built for levels (" + std::to_string(pi.coarse_exponent) + ", " +
                         std::to_string(pi.fine_exponent) + ")");
  }
}

ElementBox patch_box(const MeshLevel& coarse, int element, int ell) {
  if (ell < 1) throw BoundsError("localization order must be >= 1, got " + std::to_string(ell));
  const int n = coarse.elems_per_axis();
  if (ell >= n) return {0, n - 1, 0, n - 1};
  return element_patch(coarse, element, ell).box;
}

std::vector<int> interior_vertices(const MeshLevel& coarse, int element) {
  std::vector<int> out;
  for (int node : coarse.element_nodes(element)) {
    const int d = coarse.dof_of_node(node);
    if (d >= 0) out.push_back(d);
  }
  return out;
}

/// Solves the corrector problems of all elements sharing one patch box with a
/// single factorization.
std::vector<ElementCorrector> solve_group(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi,
                                          const ElementBox& box, const std::vector<int>& elements,
                                          const LodOptions& options) {
  const MeshLevel& fine = problem.fine;
  const int r = 1 << (fine.exponent() - coarse.exponent());
  const int fx0 = box.x0 * r;
  const int fy0 = box.y0 * r;
  const int pw = box.width() * r - 1;
  const int ph = box.height() * r - 1;

  std::vector<int> patch = fine_dofs_in_box(coarse, box, fine);
  std::vector<int> candidates;
  for (int iy = box.y0; iy <= box.y1 + 1; ++iy) {
    for (int ix = box.x0; ix <= box.x1 + 1; ++ix) {
      const int d = coarse.dof(ix, iy);
      if (d >= 0) candidates.push_back(d);
    }
  }

  SaddleSystem sys;
  sys.a = problem.ops.stiffness.submatrix(patch, patch);
  sys.c = pi.p.submatrix(candidates, patch);

  // Right-hand sides int_T alpha grad phi_j . grad w over the fine elements of T.
  const auto& kref = q1_reference_stiffness();
  std::vector<std::vector<int>> vertex_dofs;
  for (int e : elements) {
    const int ex = e % coarse.elems_per_axis();
    const int ey = e / coarse.elems_per_axis();
    auto verts = interior_vertices(coarse, e);
    std::vector<int> local_vertex;
    for (int a = 0; a < 4; ++a) {
      if (coarse.dof(ex + (a & 1), ey + (a >> 1)) >= 0) local_vertex.push_back(a);
    }
    for (int a : local_vertex) {
      std::vector<double> rhs(patch.size(), 0.0);
      for (int sj = 0; sj < r; ++sj) {
        for (int si = 0; si < r; ++si) {
          const int fx = ex * r + si;
          const int fy = ey * r + sj;
          const double alpha = problem.alpha_fine[static_cast<std::size_t>(fine.element_id(fx, fy))];
          std::array<double, 4> phi{};
          for (int p = 0; p < 4; ++p) {
            const double sx = static_cast<double>(si + (p & 1)) / r;
            const double sy = static_cast<double>(sj + (p >> 1)) / r;
            phi[static_cast<std::size_t>(p)] = ((a & 1) ? sx : 1.0 - sx) * ((a >> 1) ? sy : 1.0 - sy);
          }
          for (int q = 0; q < 4; ++q) {
            const int nx = fx + (q & 1);
            const int ny = fy + (q >> 1);
            if (nx <= fx0 || ny <= fy0 || nx - fx0 - 1 >= pw || ny - fy0 - 1 >= ph) continue;
            double s = 0.0;
            for (std::size_t p = 0; p < 4; ++p) s += kref[p][static_cast<std::size_t>(q)] * phi[p];
            rhs[static_cast<std::size_t>((ny - fy0 - 1) * pw + (nx - fx0 - 1))] += alpha * s;
          }
        }
      }
      sys.rhs.push_back(std::move(rhs));
    }
    vertex_dofs.push_back(std::move(verts));
  }

  SaddleOptions so;
  so.method = options.method;
  so.label = "patch of element " + std::to_string(elements.front()) + " box [" + std::to_string(box.x0) + "," +
             std::to_string(box.x1) + "]x[" + std::to_string(box.y0) + "," + std::to_string(box.y1) + "]";
  SaddleSolution sol = saddle_solve(sys, so);

  std::vector<ElementCorrector> out;
  std::size_t col = 0;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    ElementCorrector c;
    c.element = elements[i];
    c.box = box;
    c.patch_dofs = patch;
    c.coarse_dofs = vertex_dofs[i];
    c.max_residual = sol.max_residual;
    for (std::size_t j = 0; j < c.coarse_dofs.size(); ++j) c.values.push_back(std::move(sol.q[col++]));
    out.push_back(std::move(c));
  }
  return out;
}

ElementCorrector zero_corrector(const MeshLevel& coarse, int element, const ElementBox& box) {
  ElementCorrector c;
  c.element = element;
  c.box = box;
  c.coarse_dofs = interior_vertices(coarse, element);
  c.values.assign(c.coarse_dofs.size(), {});
  return c;
}

}  // namespace

ElementCorrector element_corrector(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi,
                                   int element, int ell, const LodOptions& options) {
  check_levels(problem, coarse, pi);
  if (element < 0 || element >= coarse.num_elements()) throw BoundsError("coarse element out of range");
  const ElementBox box = patch_box(coarse, element, ell);
  // Equal levels: P is the identity, so the kernel is trivial.
  if (coarse.exponent() == problem.fine.exponent()) return zero_corrector(coarse, element, box);
  return solve_group(problem, coarse, pi, box, {element}, options).front();
}

MultiscaleBasis build_basis(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi, int ell,
                            const LodOptions& options) {
  check_levels(problem, coarse, pi);
  const auto start = std::chrono::steady_clock::now();
  const auto ne = static_cast<std::size_t>(coarse.num_elements());
  std::vector<ElementCorrector> correctors(ne);

  if (coarse.exponent() == problem.fine.exponent() || coarse.num_interior() == 0) {
    for (std::size_t e = 0; e < ne; ++e) {
      correctors[e] = zero_corrector(coarse, static_cast<int>(e), patch_box(coarse, static_cast<int>(e), ell));
    }
  } else {
    // Saturated patches repeat near the boundary and for large ell.
    std::map<ElementBox, std::vector<int>> groups;
    for (std::size_t e = 0; e < ne; ++e) groups[patch_box(coarse, static_cast<int>(e), ell)].push_back(static_cast<int>(e));
    std::vector<std::pair<ElementBox, std::vector<int>>> work(groups.begin(), groups.end());

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (std::size_t g = next++; g < work.size(); g = next++) {
        try {
          auto solved = solve_group(problem, coarse, pi, work[g].first, work[g].second, options);
          for (auto& c : solved) correctors[static_cast<std::size_t>(c.element)] = std::move(c);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = work.size();
        }
      }
    };
    const int nthreads = std::max(1, std::min<int>(options.threads, static_cast<int>(work.size())));
    if (nthreads == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
  }

  MultiscaleBasis basis;
  basis.kind = BasisKind::Lod;
  basis.ell = ell;
  basis.mode = pi.mode;
  basis.coarse_exponent = coarse.exponent();
  basis.fine_exponent = problem.fine.exponent();

  // Merge in canonical element order: B = E - sum_T Q_T.
  std::vector<Triplet> t;
  {
    const auto rp = pi.e.row_ptr();
    const auto ci = pi.e.col_idx();
    const auto va = pi.e.values();
    for (int i = 0; i < pi.e.rows(); ++i) {
      for (auto k = rp[static_cast<std::size_t>(i)]; k < rp[static_cast<std::size_t>(i) + 1]; ++k) {
        t.push_back({i, ci[static_cast<std::size_t>(k)], va[static_cast<std::size_t>(k)]});
      }
    }
  }
  std::set<ElementBox> boxes;
  for (const auto& c : correctors) {
    boxes.insert(c.box);
    basis.max_saddle_residual = std::max(basis.max_saddle_residual, c.max_residual);
    for (std::size_t j = 0; j < c.coarse_dofs.size(); ++j) {
      const auto& col = c.values[j];
      for (std::size_t p = 0; p < col.size(); ++p) t.push_back({c.patch_dofs[p], c.coarse_dofs[j], -col[p]});
    }
  }
  basis.distinct_factorizations =
      coarse.exponent() == problem.fine.exponent() ? 0 : static_cast<int>(boxes.size());
  correctors.clear();
  correctors.shrink_to_fit();
  basis.b = SparseMatrix::from_triplets(problem.fine.num_interior(), coarse.num_interior(), std::move(t));
  basis.k = triple_product(basis.b, problem.ops.stiffness).symmetrized();
  basis.lumped = matvec_transpose(pi.e, problem.ops.lumped);
  if (options.consistent_mass) basis.m_ms = triple_product(basis.b, problem.ops.mass).symmetrized();
  basis.offline_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return basis;
}

MultiscaleBasis build_basis(const MeshLevel& coarse, const MeshLevel& fine, const CoefficientField& alpha,
                            const CoefficientField& beta, int ell, InterpMode mode, const LodOptions& options) {
  const FineProblem problem = make_fine_problem(fine, alpha, beta);
  const InterpOperator pi = build_pi(coarse, fine, problem.beta_fine, mode);
  return build_basis(problem, coarse, pi, ell, options);
}

MultiscaleBasis fem_basis(const FineProblem& problem, const MeshLevel& coarse, bool consistent_mass) {
  const auto start = std::chrono::steady_clock::now();
  MultiscaleBasis basis;
  basis.kind = BasisKind::Fem;
  basis.coarse_exponent = coarse.exponent();
  basis.fine_exponent = problem.fine.exponent();
  basis.b = prolongation(coarse, problem.fine);
  basis.k = triple_product(basis.b, problem.ops.stiffness).symmetrized();
  basis.lumped = matvec_transpose(basis.b, problem.ops.lumped);
  if (consistent_mass) basis.m_ms = triple_product(basis.b, problem.ops.mass).symmetrized();
  basis.offline_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return basis;
}

void lumped_apply(const MultiscaleBasis& basis, std::span<const double> u, std::span<double> out) {
  basis.k.multiply(u, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= basis.lumped[i];
}

std::vector<double> lumped_apply(const MultiscaleBasis& basis, std::span<const double> u) {
  std::vector<double> out(static_cast<std::size_t>(basis.k.rows()));
  lumped_apply(basis, u, out);
  return out;
}

DecayStudy decay_study(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi,
                       const std::vector<std::vector<double>>& vs, const std::vector<int>& ells,
                       const LodOptions& options) {
  if (!std::is_sorted(ells.begin(), ells.end())) throw ConfigError("decay_study needs ascending ell values");
  LodOptions opts = options;
  opts.consistent_mass = false;
  const MultiscaleBasis global = build_basis(problem, coarse, pi, kGlobalPatch, opts);
  const NormEvaluator norms(problem.fine);

  DecayStudy study;
  study.ells = ells;
  study.gaps.assign(vs.size(), std::vector<double>(ells.size(), 0.0));
  std::vector<std::vector<double>> exact;
  for (const auto& v : vs) exact.push_back(matvec(global.b, v));
  for (std::size_t i = 0; i < ells.size(); ++i) {
    const MultiscaleBasis local = build_basis(problem, coarse, pi, ells[i], opts);
    for (std::size_t k = 0; k < vs.size(); ++k) {
      auto d = matvec(local.b, vs[k]);
      for (std::size_t p = 0; p < d.size(); ++p) d[p] -= exact[k][p];
      study.gaps[k][i] = norms.h1_semi(d);
    }
  }

  // Least-squares slope of log(gap) against ell, averaged over the vectors.
  double slope_sum = 0.0;
  int fitted = 0;
  for (const auto& g : study.gaps) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < ells.size(); ++i) {
      if (g[i] <= 0.0 || ells[i] == kGlobalPatch) continue;
      const double x = ells[i];
      const double y = std::log(g[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n < 2) continue;
    slope_sum += (n * sxy - sx * sy) / (n * sxx - sx * sx);
    ++fitted;
  }
  study.rate = fitted > 0 ? slope_sum / fitted : 0.0;
  return study;
}

}  // namespace lodwave
