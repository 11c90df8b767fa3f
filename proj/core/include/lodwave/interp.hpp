#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lodwave/coeff.hpp"
#include "lodwave/grid.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

/// Nodal averaging rule of the quasi-interpolation.
enum class InterpMode {
  Weighted,  ///< weights int_e beta phi_i / int_Omega beta phi_i
  Naive,     ///< equal weights over the adjacent elements
};

std::string to_string(InterpMode mode);
InterpMode parse_interp_mode(const std::string& text);

/// Elementwise beta-weighted L2 projection onto Q1(e), restricted to the
/// fine functions living on the closure of coarse element e.
struct LocalProjection {
  int element = 0;
  std::array<int, 4> coarse_nodes{};  ///< lexicographic vertex order
  std::vector<int> fine_nodes;        ///< fine node ids on the closure of e, row-major
  std::vector<double> block;          ///< 4 x fine_nodes.size(), row-major
  std::array<double, 4> vertex_mass{};  ///< int_e beta phi_a for each vertex

  double at(int a, std::size_t k) const { return block[static_cast<std::size_t>(a) * fine_nodes.size() + k]; }
};

/// beta_fine holds one value per element of `fine`.
LocalProjection local_projection(const MeshLevel& coarse, const MeshLevel& fine, std::span<const double> beta_fine,
                                 int element);

/// For each coarse interior dof, the weights of its four adjacent elements in
/// the order (ex-1, ey-1), (ex, ey-1), (ex-1, ey), (ex, ey). They sum to one.
std::vector<std::array<double, 4>> averaging_weights(const MeshLevel& coarse, const MeshLevel& fine,
                                                     std::span<const double> beta_fine, InterpMode mode);

/// The quasi-interpolation as an explicit sparse matrix
/// P : fine interior dofs -> coarse interior dofs, together with the
/// coarse-to-fine embedding E. P E = I.
struct InterpOperator {
  SparseMatrix p;
  SparseMatrix e;
  InterpMode mode = InterpMode::Weighted;
  int coarse_exponent = 0;
  int fine_exponent = 0;
  std::string beta_provenance;
};

InterpOperator build_pi(const MeshLevel& coarse, const MeshLevel& fine, const CoefficientField& beta,
                        InterpMode mode);
InterpOperator build_pi(const MeshLevel& coarse, const MeshLevel& fine, std::span<const double> beta_fine,
                        InterpMode mode);

struct InterpConstants {
  double stability = 0.0;      ///< max |E P v|_1 / |v|_1
  double interpolation = 0.0;  ///< max ||(1 - E P) v||_0 / (H |v|_1)
  int probes = 0;
};

/// Empirical constants over a fixed probe set: `random_probes` seeded random
/// vectors plus the sine modes sin(k pi x) sin(l pi y), 1 <= k, l <= 4.
InterpConstants measure_interp_constants(const InterpOperator& pi, const MeshLevel& coarse, const MeshLevel& fine,
                                         int random_probes = 8, std::uint64_t seed = 7);

}  // namespace lodwave
