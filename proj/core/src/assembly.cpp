#include "lodwave/assembly.hpp"

#include <cmath>

#include "lodwave/error.hpp"

namespace lodwave {

const LocalMatrix& q1_reference_stiffness() {
  static const LocalMatrix k = {{{4.0 / 6, -1.0 / 6, -1.0 / 6, -2.0 / 6},
                                 {-1.0 / 6, 4.0 / 6, -2.0 / 6, -1.0 / 6},
                                 {-1.0 / 6, -2.0 / 6, 4.0 / 6, -1.0 / 6},
                                 {-2.0 / 6, -1.0 / 6, -1.0 / 6, 4.0 / 6}}};
  return k;
}

const LocalMatrix& q1_reference_mass() {
  static const LocalMatrix m = {{{4.0 / 36, 2.0 / 36, 2.0 / 36, 1.0 / 36},
                                 {2.0 / 36, 4.0 / 36, 1.0 / 36, 2.0 / 36},
                                 {2.0 / 36, 1.0 / 36, 4.0 / 36, 2.0 / 36},
                                 {1.0 / 36, 2.0 / 36, 2.0 / 36, 4.0 / 36}}};
  return m;
}

namespace {

void check_values(const MeshLevel& mesh, std::span<const double> values) {
  if (values.size() != static_cast<std::size_t>(mesh.num_elements())) {
    throw DimensionError("expected " + std::to_string(mesh.num_elements()) +
                         " element values, got " + std::to_string(values.size()));
  }
}

SparseMatrix assemble_local(const MeshLevel& mesh, std::span<const double> coeff, const LocalMatrix& ref,
                            double scale) {
  check_values(mesh, coeff);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(mesh.num_elements()) * 16);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    const auto nodes = mesh.element_nodes(e);
    std::array<int, 4> dofs{};
    for (int a = 0; a < 4; ++a) dofs[static_cast<std::size_t>(a)] = mesh.dof_of_node(nodes[static_cast<std::size_t>(a)]);
    const double c = coeff[static_cast<std::size_t>(e)] * scale;
    for (std::size_t a = 0; a < 4; ++a) {
      if (dofs[a] < 0) continue;
      for (std::size_t b = 0; b < 4; ++b) {
        if (dofs[b] < 0) continue;
        t.push_back({dofs[a], dofs[b], c * ref[a][b]});
      }
    }
  }
  return SparseMatrix::from_triplets(mesh.num_interior(), mesh.num_interior(), std::move(t), true);
}

void check_levels(const MeshLevel& mesh, const MeshLevel& fine, const CoefficientField& field) {
  if (fine.exponent() < mesh.exponent()) {
    throw NestingError("assembly level " + std::to_string(mesh.exponent()) + " is finer than integration level " +
                       std::to_string(fine.exponent()));
  }
  if (fine.exponent() < field.eps_exponent) {
    throw NestingError("integration level " + std::to_string(fine.exponent()) +
                       " does not resolve the coefficient level " + std::to_string(field.eps_exponent));
  }
}

}  // namespace

SparseMatrix assemble_stiffness_elementwise(const MeshLevel& mesh, std::span<const double> alpha) {
  return assemble_local(mesh, alpha, q1_reference_stiffness(), 1.0);
}

SparseMatrix assemble_mass_elementwise(const MeshLevel& mesh, std::span<const double> beta) {
  const double h = mesh.width();
  return assemble_local(mesh, beta, q1_reference_mass(), h * h);
}

std::vector<double> assemble_lumped_elementwise(const MeshLevel& mesh, std::span<const double> beta) {
  check_values(mesh, beta);
  const double quarter = 0.25 * mesh.width() * mesh.width();
  std::vector<double> m(static_cast<std::size_t>(mesh.num_interior()), 0.0);
  for (int e = 0; e < mesh.num_elements(); ++e) {
    for (int node : mesh.element_nodes(e)) {
      const int d = mesh.dof_of_node(node);
      if (d >= 0) m[static_cast<std::size_t>(d)] += beta[static_cast<std::size_t>(e)] * quarter;
    }
  }
  return m;
}

SparseMatrix prolongation(const MeshLevel& coarse, const MeshLevel& fine) {
  if (fine.exponent() < coarse.exponent()) {
    throw NestingError("prolongation target level " + std::to_string(fine.exponent()) + " is coarser than " +
                       std::to_string(coarse.exponent()));
  }
  const int r = 1 << (fine.exponent() - coarse.exponent());
  const int nf = fine.elems_per_axis();
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(fine.num_interior()) * 4);
  for (int iy = 1; iy < nf; ++iy) {
    for (int ix = 1; ix < nf; ++ix) {
      const int row = fine.dof(ix, iy);
      const int cx = ix / r;
      const int cy = iy / r;
      const double sx = static_cast<double>(ix - cx * r) / r;
      const double sy = static_cast<double>(iy - cy * r) / r;
      const std::array<double, 2> wx{1.0 - sx, sx};
      const std::array<double, 2> wy{1.0 - sy, sy};
      for (int b = 0; b < 2; ++b) {
        for (int a = 0; a < 2; ++a) {
          const double w = wx[static_cast<std::size_t>(a)] * wy[static_cast<std::size_t>(b)];
          if (w == 0.0) continue;
          const int col = coarse.dof(cx + a, cy + b);
          if (col >= 0) t.push_back({row, col, w});
        }
      }
    }
  }
  return SparseMatrix::from_triplets(fine.num_interior(), coarse.num_interior(), std::move(t));
}

SparseMatrix assemble_stiffness(const MeshLevel& mesh, const MeshLevel& fine, const CoefficientField& alpha) {
  check_levels(mesh, fine, alpha);
  SparseMatrix a = assemble_stiffness_elementwise(fine, values_on_fine(alpha, fine));
  if (mesh == fine) return a;
  return triple_product(prolongation(mesh, fine), a);
}

SparseMatrix assemble_mass(const MeshLevel& mesh, const MeshLevel& fine, const CoefficientField& beta) {
  check_levels(mesh, fine, beta);
  SparseMatrix m = assemble_mass_elementwise(fine, values_on_fine(beta, fine));
  if (mesh == fine) return m;
  return triple_product(prolongation(mesh, fine), m);
}

std::vector<double> assemble_lumped_mass(const MeshLevel& mesh, const MeshLevel& fine,
                                         const CoefficientField& beta) {
  check_levels(mesh, fine, beta);
  auto m = assemble_lumped_elementwise(fine, values_on_fine(beta, fine));
  if (mesh == fine) return m;
  // Coarse hats are fine Q1 functions, so the integral transfers exactly.
  return matvec_transpose(prolongation(mesh, fine), m);
}

FemOperatorSet assemble_operators(const MeshLevel& mesh, const MeshLevel& fine, const CoefficientField& alpha,
                                  const CoefficientField& beta) {
  FemOperatorSet ops;
  ops.stiffness = assemble_stiffness(mesh, fine, alpha);
  ops.mass = assemble_mass(mesh, fine, beta);
  ops.lumped = assemble_lumped_mass(mesh, fine, beta);
  ops.mesh_exponent = mesh.exponent();
  ops.fine_exponent = fine.exponent();
  ops.provenance = "alpha: " + alpha.provenance + "; beta: " + beta.provenance;
  return ops;
}

std::vector<double> nodal_function(const MeshLevel& mesh, const SpaceTimeFunction& g, double t) {
  std::vector<double> v(static_cast<std::size_t>(mesh.num_interior()));
  const double h = mesh.width();
  for (int d = 0; d < mesh.num_interior(); ++d) {
    const auto [ix, iy] = mesh.dof_coords(d);
    v[static_cast<std::size_t>(d)] = g(ix * h, iy * h, t);
  }
  return v;
}

NormEvaluator::NormEvaluator(const MeshLevel& mesh) {
  const std::vector<double> ones(static_cast<std::size_t>(mesh.num_elements()), 1.0);
  l2_ = assemble_mass_elementwise(mesh, ones);
  h1_ = assemble_stiffness_elementwise(mesh, ones);
}

double NormEvaluator::quadratic(const SparseMatrix& g, std::span<const double> v) const {
  const auto gv = matvec(g, v);
  return std::max(0.0, dot(v, gv));
}

double NormEvaluator::l2_squared(std::span<const double> v) const { return quadratic(l2_, v); }
double NormEvaluator::h1_semi_squared(std::span<const double> v) const { return quadratic(h1_, v); }
double NormEvaluator::l2(std::span<const double> v) const { return std::sqrt(l2_squared(v)); }
double NormEvaluator::h1_semi(std::span<const double> v) const { return std::sqrt(h1_semi_squared(v)); }
double NormEvaluator::h1(std::span<const double> v) const {
  return std::sqrt(l2_squared(v) + h1_semi_squared(v));
}

}  // namespace lodwave
