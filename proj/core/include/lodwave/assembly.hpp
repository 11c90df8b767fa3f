#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lodwave/coeff.hpp"
#include "lodwave/grid.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

using LocalMatrix = std::array<std::array<double, 4>, 4>;

/// Q1 element stiffness on a square (independent of the side length in 2D),
/// vertices in lexicographic order (0,0), (1,0), (0,1), (1,1).
const LocalMatrix& q1_reference_stiffness();
/// Q1 element mass on the unit square; scale by side^2.
const LocalMatrix& q1_reference_mass();

/// Stiffness, beta-weighted consistent mass and lumped mass of one mesh level.
struct FemOperatorSet {
  SparseMatrix stiffness;
  SparseMatrix mass;
  std::vector<double> lumped;  ///< m_i = integral of beta * phi_i
  int mesh_exponent = 0;
  int fine_exponent = 0;
  std::string provenance;
};

/// Fine-level assembly from one coefficient value per element of `mesh`.
SparseMatrix assemble_stiffness_elementwise(const MeshLevel& mesh, std::span<const double> alpha);
SparseMatrix assemble_mass_elementwise(const MeshLevel& mesh, std::span<const double> beta);
std::vector<double> assemble_lumped_elementwise(const MeshLevel& mesh, std::span<const double> beta);

/// Nodal values of the coarse hat functions at fine interior nodes
/// (fine interior dofs x coarse interior dofs). Identity when the levels agree.
SparseMatrix prolongation(const MeshLevel& coarse, const MeshLevel& fine);

/// Interior-node matrices on `mesh`, integrated exactly over the elements of
/// `fine` on which the coefficient is constant. Requires
/// eps_exponent <= fine.exponent() and mesh.exponent() <= fine.exponent().
SparseMatrix assemble_stiffness(const MeshLevel& mesh, const MeshLevel& fine, const CoefficientField& alpha);
SparseMatrix assemble_mass(const MeshLevel& mesh, const MeshLevel& fine, const CoefficientField& beta);
std::vector<double> assemble_lumped_mass(const MeshLevel& mesh, const MeshLevel& fine,
                                         const CoefficientField& beta);
FemOperatorSet assemble_operators(const MeshLevel& mesh, const MeshLevel& fine, const CoefficientField& alpha,
                                  const CoefficientField& beta);

using SpaceTimeFunction = std::function<double(double x, double y, double t)>;

/// g(x_i, t) at the interior nodes; boundary values are implicitly zero.
std::vector<double> nodal_function(const MeshLevel& mesh, const SpaceTimeFunction& g, double t);

/// L2 and H1 norms of Q1 functions given by interior nodal values, computed
/// with the unit-coefficient Gram matrices.
class NormEvaluator {
 public:
  explicit NormEvaluator(const MeshLevel& mesh);

  double l2(std::span<const double> v) const;
  double h1_semi(std::span<const double> v) const;
  double h1(std::span<const double> v) const;
  /// Squared norms, for callers that accumulate.
  double l2_squared(std::span<const double> v) const;
  double h1_semi_squared(std::span<const double> v) const;

  const SparseMatrix& l2_gram() const noexcept { return l2_; }
  const SparseMatrix& h1_gram() const noexcept { return h1_; }
  int size() const noexcept { return l2_.rows(); }

 private:
  double quadratic(const SparseMatrix& g, std::span<const double> v) const;
  SparseMatrix l2_;
  SparseMatrix h1_;
};

}  // namespace lodwave
