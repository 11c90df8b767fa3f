#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lodwave/assembly.hpp"
#include "lodwave/coeff.hpp"
#include "lodwave/grid.hpp"
#include "lodwave/interp.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

/// Localization order meaning "patch = whole domain".
inline constexpr int kGlobalPatch = std::numeric_limits<int>::max();

std::string ell_label(int ell);

/// Fine-level data shared by every coarse level of a study.
struct FineProblem {
  MeshLevel fine{0};
  CoefficientField alpha;
  CoefficientField beta;
  std::vector<double> alpha_fine;  ///< per fine element
  std::vector<double> beta_fine;
  FemOperatorSet ops;              ///< fine stiffness, mass, lumped mass
};

FineProblem make_fine_problem(const MeshLevel& fine, const CoefficientField& alpha, const CoefficientField& beta);

struct LodOptions {
  SaddleMethod method = SaddleMethod::Auto;
  int threads = 1;
  bool consistent_mass = true;  ///< also assemble M_ms for the non-lumped scheme
};

/// Correctors of the (at most four) interior coarse hats supported on one
/// coarse element, as values on the patch's fine interior dofs.
struct ElementCorrector {
  int element = 0;
  ElementBox box;
  std::vector<int> patch_dofs;              ///< fine interior dofs, ascending
  std::vector<int> coarse_dofs;             ///< interior vertices of the element
  std::vector<std::vector<double>> values;  ///< one column per coarse dof
  double max_residual = 0.0;
};

ElementCorrector element_corrector(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi,
                                   int element, int ell, const LodOptions& options = {});

enum class BasisKind { Lod, Fem };

struct MultiscaleBasis {
  BasisKind kind = BasisKind::Lod;
  int ell = 0;
  InterpMode mode = InterpMode::Weighted;
  int coarse_exponent = 0;
  int fine_exponent = 0;
  SparseMatrix b;               ///< fine interior dofs x coarse interior dofs
  SparseMatrix k;               ///< B^T A B
  std::vector<double> lumped;   ///< coarse lumped mass
  SparseMatrix m_ms;            ///< B^T M B, empty unless requested
  double offline_seconds = 0.0;
  double max_saddle_residual = 0.0;
  int distinct_factorizations = 0;
};

MultiscaleBasis build_basis(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi, int ell,
                            const LodOptions& options = {});
MultiscaleBasis build_basis(const MeshLevel& coarse, const MeshLevel& fine, const CoefficientField& alpha,
                            const CoefficientField& beta, int ell, InterpMode mode, const LodOptions& options = {});

/// Classical Q1 space on the coarse mesh: B = E, without correctors.
MultiscaleBasis fem_basis(const FineProblem& problem, const MeshLevel& coarse, bool consistent_mass = true);

/// m^{-1} K u.
std::vector<double> lumped_apply(const MultiscaleBasis& basis, std::span<const double> u);
void lumped_apply(const MultiscaleBasis& basis, std::span<const double> u, std::span<double> out);

struct DecayStudy {
  std::vector<int> ells;
  std::vector<std::vector<double>> gaps;  ///< gaps[v][i] = |S v - S^ell_i v|_1
  double rate = 0.0;                      ///< mean least-squares slope of log gap per unit ell
};

DecayStudy decay_study(const FineProblem& problem, const MeshLevel& coarse, const InterpOperator& pi,
                       const std::vector<std::vector<double>>& vs, const std::vector<int>& ells,
                       const LodOptions& options = {});

// Binary cache. The file starts with the magic "LODWAVE1", a key block and a
// digest over the payload; load_basis returns false on any mismatch.
struct BasisKey {
  int coarse_exponent = 0;
  int fine_exponent = 0;
  int ell = 0;
  InterpMode mode = InterpMode::Weighted;
  std::uint64_t alpha_digest = 0;
  std::uint64_t beta_digest = 0;
};

BasisKey basis_key(const FineProblem& problem, const MultiscaleBasis& basis);
std::filesystem::path basis_cache_path(const std::filesystem::path& dir, const BasisKey& key);
void save_basis(const MultiscaleBasis& basis, const BasisKey& key, const std::filesystem::path& path);
bool load_basis(const std::filesystem::path& path, const BasisKey& key, MultiscaleBasis& basis);

}  // namespace lodwave
