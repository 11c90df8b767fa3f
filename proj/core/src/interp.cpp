#include "lodwave/interp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "lodwave/assembly.hpp"
#include "lodwave/error.hpp"

namespace lodwave {

std::string to_string(InterpMode mode) { return mode == InterpMode::Weighted ? "weighted" : "naive"; }

InterpMode parse_interp_mode(const std::string& text) {
  if (text == "weighted") return InterpMode::Weighted;
  if (text == "naive") return InterpMode::Naive;
  throw ConfigError("unknown interpolation mode '" + text + "'");
}

namespace {

void check_nesting(const MeshLevel& coarse, const MeshLevel& fine, std::span<const double> beta_fine) {
  if (fine.exponent() < coarse.exponent()) {
    throw NestingError("fine level " + std::to_string(fine.exponent()) + " is coarser than " +
                       std::to_string(coarse.exponent()));
  }
  if (beta_fine.size() != static_cast<std::size_t>(fine.num_elements())) {
    throw DimensionError("beta needs one value per fine element");
  }
}

/// 1D hat values of the two coarse vertices at fine offset i in [0, r].
inline double hat(int a, int i, int r) {
  const double s = static_cast<double>(i) / r;
  return a == 0 ? 1.0 - s : s;
}

}  // namespace

LocalProjection local_projection(const MeshLevel& coarse, const MeshLevel& fine, std::span<const double> beta_fine,
                                 int element) {
  check_nesting(coarse, fine, beta_fine);
  if (element < 0 || element >= coarse.num_elements()) throw BoundsError("coarse element out of range");
  const int r = 1 << (fine.exponent() - coarse.exponent());
  const int ex = element % coarse.elems_per_axis();
  const int ey = element / coarse.elems_per_axis();
  const int nloc = r + 1;

  LocalProjection lp;
  lp.element = element;
  lp.coarse_nodes = coarse.element_nodes(element);
  lp.fine_nodes.reserve(static_cast<std::size_t>(nloc * nloc));
  for (int j = 0; j <= r; ++j) {
    for (int i = 0; i <= r; ++i) lp.fine_nodes.push_back(fine.node_id(ex * r + i, ey * r + j));
  }
  const std::size_t nk = lp.fine_nodes.size();

  // R = Phi^T M_e(beta): row a holds b(phi_a, fine hat k) restricted to e.
  std::vector<double> rmat(4 * nk, 0.0);
  const auto& mref = q1_reference_mass();
  const double h2 = fine.width() * fine.width();
  for (int sj = 0; sj < r; ++sj) {
    for (int si = 0; si < r; ++si) {
      const double b = beta_fine[static_cast<std::size_t>(fine.element_id(ex * r + si, ey * r + sj))] * h2;
      const std::array<int, 4> li{si, si + 1, si, si + 1};
      const std::array<int, 4> lj{sj, sj, sj + 1, sj + 1};
      for (int a = 0; a < 4; ++a) {
        std::array<double, 4> phi{};
        for (std::size_t p = 0; p < 4; ++p) phi[p] = hat(a & 1, li[p], r) * hat(a >> 1, lj[p], r);
        for (std::size_t q = 0; q < 4; ++q) {
          double s = 0.0;
          for (std::size_t p = 0; p < 4; ++p) s += phi[p] * mref[p][q];
          const auto k = static_cast<std::size_t>(lj[q] * nloc + li[q]);
          rmat[static_cast<std::size_t>(a) * nk + k] += b * s;
        }
      }
    }
  }
  for (std::size_t a = 0; a < 4; ++a) {
    double s = 0.0;
    for (std::size_t k = 0; k < nk; ++k) s += rmat[a * nk + k];
    lp.vertex_mass[a] = s;
  }

  if (r == 1) {
    // Q1(e) already contains every fine function on e.
    lp.block.assign(16, 0.0);
    for (std::size_t a = 0; a < 4; ++a) lp.block[a * 4 + a] = 1.0;
    return lp;
  }

  // G = R Phi (4x4 SPD); block = G^{-1} R.
  Eigen::Matrix4d g = Eigen::Matrix4d::Zero();
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int j = 0; j <= r; ++j) {
        for (int i = 0; i <= r; ++i) {
          s += rmat[static_cast<std::size_t>(a) * nk + static_cast<std::size_t>(j * nloc + i)] *
               hat(b & 1, i, r) * hat(b >> 1, j, r);
        }
      }
      g(a, b) = s;
    }
  }
  g = 0.5 * (g + g.transpose()).eval();
  Eigen::LLT<Eigen::Matrix4d> llt(g);
  if (llt.info() != Eigen::Success) throw SingularError("local Gram matrix not SPD on element " + std::to_string(element));
  const Eigen::Map<const Eigen::Matrix<double, 4, Eigen::Dynamic, Eigen::RowMajor>> rm(rmat.data(), 4,
                                                                                       static_cast<Eigen::Index>(nk));
  const Eigen::Matrix<double, 4, Eigen::Dynamic, Eigen::RowMajor> blk = llt.solve(rm);
  lp.block.assign(blk.data(), blk.data() + 4 * nk);
  return lp;
}

std::vector<std::array<double, 4>> averaging_weights(const MeshLevel& coarse, const MeshLevel& fine,
                                                     std::span<const double> beta_fine, InterpMode mode) {
  check_nesting(coarse, fine, beta_fine);
  const int nc = coarse.elems_per_axis();
  std::vector<std::array<double, 4>> w(static_cast<std::size_t>(coarse.num_interior()));
  if (mode == InterpMode::Naive) {
    for (auto& x : w) x = {0.25, 0.25, 0.25, 0.25};
    return w;
  }
  const int r = 1 << (fine.exponent() - coarse.exponent());
  const double quarter = 0.25 * fine.width() * fine.width();
  // int_e beta phi_a for every coarse element and vertex a.
  std::vector<std::array<double, 4>> vm(static_cast<std::size_t>(coarse.num_elements()));
  for (int ey = 0; ey < nc; ++ey) {
    for (int ex = 0; ex < nc; ++ex) {
      std::array<double, 4> acc{};
      for (int sj = 0; sj < r; ++sj) {
        for (int si = 0; si < r; ++si) {
          const double b = beta_fine[static_cast<std::size_t>(fine.element_id(ex * r + si, ey * r + sj))] * quarter;
          for (int a = 0; a < 4; ++a) {
            double s = 0.0;
            for (int dj = 0; dj < 2; ++dj) {
              for (int di = 0; di < 2; ++di) s += hat(a & 1, si + di, r) * hat(a >> 1, sj + dj, r);
            }
            acc[static_cast<std::size_t>(a)] += b * s;
          }
        }
      }
      vm[static_cast<std::size_t>(coarse.element_id(ex, ey))] = acc;
    }
  }
  for (int d = 0; d < coarse.num_interior(); ++d) {
    const auto [ix, iy] = coarse.dof_coords(d);
    // Adjacent elements and the local vertex index of this node within each.
    const std::array<int, 4> elems{coarse.element_id(ix - 1, iy - 1), coarse.element_id(ix, iy - 1),
                                   coarse.element_id(ix - 1, iy), coarse.element_id(ix, iy)};
    const std::array<std::size_t, 4> vertex{3, 2, 1, 0};
    std::array<double, 4> x{};
    double total = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      x[k] = vm[static_cast<std::size_t>(elems[k])][vertex[k]];
      total += x[k];
    }
    for (auto& v : x) v /= total;
    w[static_cast<std::size_t>(d)] = x;
  }
  return w;
}

InterpOperator build_pi(const MeshLevel& coarse, const MeshLevel& fine, std::span<const double> beta_fine,
                        InterpMode mode) {
  check_nesting(coarse, fine, beta_fine);
  const auto weights = averaging_weights(coarse, fine, beta_fine, mode);
  const int nc = coarse.elems_per_axis();

  std::vector<Triplet> t;
  for (int e = 0; e < coarse.num_elements(); ++e) {
    const int ex = e % nc;
    const int ey = e / nc;
    const LocalProjection lp = local_projection(coarse, fine, beta_fine, e);
    for (int a = 0; a < 4; ++a) {
      const int vx = ex + (a & 1);
      const int vy = ey + (a >> 1);
      const int row = coarse.dof(vx, vy);
      if (row < 0) continue;
      // This element sits at slot (ex - vx + 1) + 2 (ey - vy + 1) around the node.
      const auto slot = static_cast<std::size_t>((ex - vx + 1) + 2 * (ey - vy + 1));
      const double w = weights[static_cast<std::size_t>(row)][slot];
      for (std::size_t k = 0; k < lp.fine_nodes.size(); ++k) {
        const int col = fine.dof_of_node(lp.fine_nodes[k]);
        if (col < 0) continue;
        t.push_back({row, col, w * lp.at(a, k)});
      }
    }
  }
  InterpOperator op;
  op.p = SparseMatrix::from_triplets(coarse.num_interior(), fine.num_interior(), std::move(t));
  op.e = prolongation(coarse, fine);
  op.mode = mode;
  op.coarse_exponent = coarse.exponent();
  op.fine_exponent = fine.exponent();
  return op;
}

InterpOperator build_pi(const MeshLevel& coarse, const MeshLevel& fine, const CoefficientField& beta,
                        InterpMode mode) {
  InterpOperator op = build_pi(coarse, fine, values_on_fine(beta, fine), mode);
  op.beta_provenance = beta.provenance;
  return op;
}

InterpConstants measure_interp_constants(const InterpOperator& pi, const MeshLevel& coarse, const MeshLevel& fine,
                                         int random_probes, std::uint64_t seed) {
  if (pi.coarse_exponent != coarse.exponent() || pi.fine_exponent != fine.exponent()) {
    throw DimensionError("interpolation operator built for different levels");
  }
  const NormEvaluator norms(fine);
  std::vector<std::vector<double>> probes;
  std::mt19937_64 gen(seed);
  for (int i = 0; i < random_probes; ++i) {
    std::vector<double> v(static_cast<std::size_t>(fine.num_interior()));
    for (auto& x : v) x = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
    probes.push_back(std::move(v));
  }
  for (int k = 1; k <= 4; ++k) {
    for (int l = 1; l <= 4; ++l) {
      probes.push_back(nodal_function(
          fine,
          [k, l](double x, double y, double) {
            return std::sin(k * std::numbers::pi * x) * std::sin(l * std::numbers::pi * y);
          },
          0.0));
    }
  }
  InterpConstants c;
  const double h_coarse = coarse.width();
  for (const auto& v : probes) {
    const double semi = norms.h1_semi(v);
    if (semi == 0.0) continue;
    const auto epv = matvec(pi.e, matvec(pi.p, v));
    std::vector<double> diff(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) diff[i] = v[i] - epv[i];
    c.stability = std::max(c.stability, norms.h1_semi(epv) / semi);
    c.interpolation = std::max(c.interpolation, norms.l2(diff) / (h_coarse * semi));
    ++c.probes;
  }
  return c;
}

}  // namespace lodwave
