#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lodwave {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row. All products accumulate in row-major order, so results
/// are bit-reproducible for identical inputs.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Empty (all-zero) matrix.
  SparseMatrix(int rows, int cols);

  /// Duplicates are summed; explicit zeros are kept.
  static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets,
                                    bool symmetric = false);
  /// Takes ownership of raw CSR arrays after validating them.
  static SparseMatrix from_csr(int rows, int cols, std::vector<std::int64_t> row_ptr,
                               std::vector<int> col_idx, std::vector<double> values,
                               bool symmetric = false);
  static SparseMatrix identity(int n);
  static SparseMatrix diagonal(std::span<const double> diag);

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::int64_t nnz() const noexcept { return static_cast<std::int64_t>(values_.size()); }
  bool symmetric() const noexcept { return symmetric_; }
  void set_symmetric(bool s) noexcept { symmetric_ = s; }

  std::span<const std::int64_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const int> col_idx() const noexcept { return col_idx_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> mutable_values() noexcept { return values_; }

  /// Entry (i, j); zero if not stored.
  double coeff(int i, int j) const;
  std::vector<double> diagonal_entries() const;
  double max_abs() const noexcept;

  /// y = A x.
  void multiply(std::span<const double> x, std::span<double> y) const;
  /// y += alpha * A x.
  void multiply_add(double alpha, std::span<const double> x, std::span<double> y) const;

  /// Rows and columns picked by index lists; col_map must be sorted ascending.
  SparseMatrix submatrix(std::span<const int> row_list, std::span<const int> col_list) const;

  /// 0.5 * (A + A^T), flagged symmetric.
  SparseMatrix symmetrized() const;

  friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  bool symmetric_ = false;
  std::vector<std::int64_t> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

std::vector<double> matvec(const SparseMatrix& a, std::span<const double> x);
/// A^T x without forming the transpose.
std::vector<double> matvec_transpose(const SparseMatrix& a, std::span<const double> x);
SparseMatrix transpose(const SparseMatrix& a);
/// alpha * A + beta * B.
SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha = 1.0, double beta = 1.0);
/// Sparse product A B (Gustavson, row by row).
SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b);
/// Galerkin product P^T A P. The result is flagged symmetric iff A is.
SparseMatrix triple_product(const SparseMatrix& p, const SparseMatrix& a);
/// max |A_ij - A_ji|.
double asymmetry(const SparseMatrix& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);

// ---------------------------------------------------------------------------
// Conjugate gradients

struct CgOptions {
  double tol = 1e-10;  ///< on ||b - A x|| / ||b||
  int max_iter = 10000;
  bool diag_precond = true;
};

struct CgResult {
  std::vector<double> x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Reusable preconditioned CG for a fixed matrix. Holds its work vectors so
/// repeated solves (one per time step) do not allocate.
class ConjugateGradient {
 public:
  ConjugateGradient(const SparseMatrix& a, CgOptions options);

  /// Solves A x = b starting from the contents of x. Returns the iteration
  /// count. The final residual is recomputed with a fresh product before
  /// returning. Throws ConvergenceError carrying the residual on failure.
  int solve(std::span<const double> b, std::span<double> x);

  double last_relative_residual() const noexcept { return last_residual_; }
  const CgOptions& options() const noexcept { return options_; }

 private:
  const SparseMatrix& a_;
  CgOptions options_;
  std::vector<double> inv_diag_;
  std::vector<double> r_, z_, p_, q_;
  double last_residual_ = 0.0;
};

CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& options = {});

// ---------------------------------------------------------------------------
// Saddle-point systems  [A C^T; C 0] [q; lambda] = [r; 0]

enum class SaddleMethod {
  Auto,         ///< SchurDirect up to kDirectLimit unknowns, SchurCg beyond
  SchurDirect,  ///< sparse Cholesky of A, dense Cholesky of C A^{-1} C^T
  KktDirect,    ///< sparse LU of the assembled KKT matrix
  SchurCg,      ///< CG on the Schur complement with inner CG solves
};

std::string to_string(SaddleMethod method);

struct SaddleSystem {
  SparseMatrix a;  ///< symmetric, positive definite on ker C
  SparseMatrix c;  ///< constraint rows; all-zero rows are dropped
  std::vector<std::vector<double>> rhs;
};

struct SaddleOptions {
  SaddleMethod method = SaddleMethod::Auto;
  double residual_tol = 1e-10;
  double cg_tol = 1e-13;
  std::string label;  ///< identifies the system in error messages
};

struct SaddleSolution {
  std::vector<std::vector<double>> q;
  std::vector<std::vector<double>> lambda;  ///< full length; zero on dropped rows
  std::vector<int> kept_rows;
  SaddleMethod method = SaddleMethod::SchurDirect;
  double max_residual = 0.0;  ///< worst relative residual over both block rows
};

inline constexpr std::int64_t kDirectLimit = 50000;

/// Solves the constrained system for every right-hand side. Residuals of both
/// block rows are verified with independent products before returning; a
/// violation raises SingularError naming options.label.
SaddleSolution saddle_solve(const SaddleSystem& system, const SaddleOptions& options = {});

// ---------------------------------------------------------------------------
// Largest eigenvalue of D^{-1} A

struct EigenEstimate {
  double value = 0.0;     ///< largest Ritz value
  double residual = 0.0;  ///< ||S y - value y|| for the Ritz pair, S = D^{-1/2} A D^{-1/2}
  int iterations = 0;
  bool converged = false;
  /// value if converged, otherwise value inflated by 5%.
  double conservative() const noexcept { return converged ? value : 1.05 * value; }
};

/// Largest eigenvalue of D^{-1} A for symmetric positive semi-definite A and a
/// positive diagonal D given through its inverse. Runs Lanczos with full
/// reorthogonalisation on D^{-1/2} A D^{-1/2} from a fixed start vector.
EigenEstimate lambda_max(const SparseMatrix& a, std::span<const double> inv_diag,
                         double rel_tol = 1e-6, int max_iter = 400);

}  // namespace lodwave
