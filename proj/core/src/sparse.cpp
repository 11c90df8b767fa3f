#include "lodwave/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lodwave/error.hpp"

namespace lodwave {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}

std::string dims(const SparseMatrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

}  // namespace

SparseMatrix::SparseMatrix(int rows, int cols)
    : rows_(rows), cols_(cols), row_ptr_(static_cast<std::size_t>(rows) + 1, 0) {
  require(rows >= 0 && cols >= 0, "negative matrix dimension");
}

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> triplets,
                                         bool symmetric) {
  SparseMatrix m(rows, cols);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw DimensionError("triplet (" + std::to_string(t.row) + "," + std::to_string(t.col) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  // Stable sort keeps the accumulation order of duplicates deterministic.
  std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  m.col_idx_.reserve(triplets.size());
  m.values_.reserve(triplets.size());
  std::size_t k = 0;
  for (int i = 0; i < rows; ++i) {
    while (k < triplets.size() && triplets[k].row == i) {
      const int j = triplets[k].col;
      double v = 0.0;
      while (k < triplets.size() && triplets[k].row == i && triplets[k].col == j) {
        v += triplets[k].value;
        ++k;
      }
      m.col_idx_.push_back(j);
      m.values_.push_back(v);
    }
    m.row_ptr_[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(m.values_.size());
  }
  m.symmetric_ = symmetric;
  return m;
}

SparseMatrix SparseMatrix::from_csr(int rows, int cols, std::vector<std::int64_t> row_ptr,
                                    std::vector<int> col_idx, std::vector<double> values,
                                    bool symmetric) {
  require(rows >= 0 && cols >= 0, "negative matrix dimension");
  require(row_ptr.size() == static_cast<std::size_t>(rows) + 1 && row_ptr.front() == 0,
          "row_ptr has wrong length");
  require(col_idx.size() == values.size() &&
              static_cast<std::size_t>(row_ptr.back()) == values.size(),
          "CSR arrays disagree in length");
  for (int i = 0; i < rows; ++i) {
    const auto b = row_ptr[static_cast<std::size_t>(i)];
    const auto e = row_ptr[static_cast<std::size_t>(i) + 1];
    require(b <= e, "row_ptr not monotone");
    for (auto k = b; k < e; ++k) {
      const int j = col_idx[static_cast<std::size_t>(k)];
      require(j >= 0 && j < cols, "column index out of range");
      require(k == b || col_idx[static_cast<std::size_t>(k) - 1] < j,
              "column indices not strictly increasing in row " + std::to_string(i));
    }
  }
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_ = std::move(row_ptr);
  m.col_idx_ = std::move(col_idx);
  m.values_ = std::move(values);
  m.symmetric_ = symmetric;
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
  return diagonal(ones);
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> diag) {
  const int n = static_cast<int>(diag.size());
  SparseMatrix m(n, n);
  m.col_idx_.resize(diag.size());
  m.values_.assign(diag.begin(), diag.end());
  for (int i = 0; i < n; ++i) {
    m.col_idx_[static_cast<std::size_t>(i)] = i;
    m.row_ptr_[static_cast<std::size_t>(i) + 1] = i + 1;
  }
  m.symmetric_ = true;
  return m;
}

double SparseMatrix::coeff(int i, int j) const {
  require(i >= 0 && i < rows_ && j >= 0 && j < cols_, "coeff index out of range");
  const auto b = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i)];
  const auto e = col_idx_.begin() + row_ptr_[static_cast<std::size_t>(i) + 1];
  const auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<double> SparseMatrix::diagonal_entries() const {
  const int n = std::min(rows_, cols_);
  std::vector<double> d(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) d[static_cast<std::size_t>(i)] = coeff(i, i);
  return d;
}

double SparseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  require(x.size() == static_cast<std::size_t>(cols_) && y.size() == static_cast<std::size_t>(rows_),
          "matvec dimension mismatch for " + dims(*this));
  const double* val = values_.data();
  const int* col = col_idx_.data();
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    const auto e = row_ptr_[static_cast<std::size_t>(i) + 1];
    for (auto k = row_ptr_[static_cast<std::size_t>(i)]; k < e; ++k) s += val[k] * x[static_cast<std::size_t>(col[k])];
    y[static_cast<std::size_t>(i)] = s;
  }
}

void SparseMatrix::multiply_add(double alpha, std::span<const double> x, std::span<double> y) const {
  require(x.size() == static_cast<std::size_t>(cols_) && y.size() == static_cast<std::size_t>(rows_),
          "matvec dimension mismatch for " + dims(*this));
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    const auto e = row_ptr_[static_cast<std::size_t>(i) + 1];
    for (auto k = row_ptr_[static_cast<std::size_t>(i)]; k < e; ++k) {
      s += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])];
    }
    y[static_cast<std::size_t>(i)] += alpha * s;
  }
}

SparseMatrix SparseMatrix::submatrix(std::span<const int> row_list, std::span<const int> col_list) const {
  require(std::is_sorted(col_list.begin(), col_list.end()), "submatrix column list must be sorted");
  std::vector<int> col_map(static_cast<std::size_t>(cols_), -1);
  for (std::size_t c = 0; c < col_list.size(); ++c) {
    require(col_list[c] >= 0 && col_list[c] < cols_, "submatrix column out of range");
    col_map[static_cast<std::size_t>(col_list[c])] = static_cast<int>(c);
  }
  std::vector<std::int64_t> ptr(row_list.size() + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  for (std::size_t r = 0; r < row_list.size(); ++r) {
    const int i = row_list[r];
    require(i >= 0 && i < rows_, "submatrix row out of range");
    for (auto k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k) {
      const int c = col_map[static_cast<std::size_t>(col_idx_[static_cast<std::size_t>(k)])];
      if (c >= 0) {
        idx.push_back(c);
        val.push_back(values_[static_cast<std::size_t>(k)]);
      }
    }
    ptr[r + 1] = static_cast<std::int64_t>(val.size());
  }
  SparseMatrix m;
  m.rows_ = static_cast<int>(row_list.size());
  m.cols_ = static_cast<int>(col_list.size());
  m.row_ptr_ = std::move(ptr);
  m.col_idx_ = std::move(idx);
  m.values_ = std::move(val);
  return m;
}

SparseMatrix SparseMatrix::symmetrized() const {
  require(rows_ == cols_, "symmetrized needs a square matrix");
  SparseMatrix s = add(*this, transpose(*this), 0.5, 0.5);
  s.symmetric_ = true;
  return s;
}

std::vector<double> matvec(const SparseMatrix& a, std::span<const double> x) {
  std::vector<double> y(static_cast<std::size_t>(a.rows()));
  a.multiply(x, y);
  return y;
}

std::vector<double> matvec_transpose(const SparseMatrix& a, std::span<const double> x) {
  require(x.size() == static_cast<std::size_t>(a.rows()), "transpose matvec dimension mismatch for " + dims(a));
  std::vector<double> y(static_cast<std::size_t>(a.cols()), 0.0);
  const auto ptr = a.row_ptr();
  const auto idx = a.col_idx();
  const auto val = a.values();
  for (int i = 0; i < a.rows(); ++i) {
    const double xi = x[static_cast<std::size_t>(i)];
    for (auto k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      y[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])] += val[static_cast<std::size_t>(k)] * xi;
    }
  }
  return y;
}

SparseMatrix transpose(const SparseMatrix& a) {
  const auto ptr = a.row_ptr();
  const auto idx = a.col_idx();
  const auto val = a.values();
  std::vector<std::int64_t> tptr(static_cast<std::size_t>(a.cols()) + 1, 0);
  for (int j : idx) ++tptr[static_cast<std::size_t>(j) + 1];
  std::partial_sum(tptr.begin(), tptr.end(), tptr.begin());
  std::vector<int> tidx(idx.size());
  std::vector<double> tval(val.size());
  std::vector<std::int64_t> next(tptr.begin(), tptr.end() - 1);
  // Rows are visited in order, so the transposed rows come out sorted.
  for (int i = 0; i < a.rows(); ++i) {
    for (auto k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      const auto pos = static_cast<std::size_t>(next[static_cast<std::size_t>(idx[static_cast<std::size_t>(k)])]++);
      tidx[pos] = i;
      tval[pos] = val[static_cast<std::size_t>(k)];
    }
  }
  return SparseMatrix::from_csr(a.cols(), a.rows(), std::move(tptr), std::move(tidx), std::move(tval),
                                a.symmetric());
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b, double alpha, double beta) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add dimension mismatch " + dims(a) + " vs " + dims(b));
  const auto pa = a.row_ptr();
  const auto ia = a.col_idx();
  const auto va = a.values();
  const auto pb = b.row_ptr();
  const auto ib = b.col_idx();
  const auto vb = b.values();
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;
  idx.reserve(static_cast<std::size_t>(a.nnz() + b.nnz()));
  val.reserve(idx.capacity());
  for (int i = 0; i < a.rows(); ++i) {
    auto ka = pa[static_cast<std::size_t>(i)];
    auto kb = pb[static_cast<std::size_t>(i)];
    const auto ea = pa[static_cast<std::size_t>(i) + 1];
    const auto eb = pb[static_cast<std::size_t>(i) + 1];
    while (ka < ea || kb < eb) {
      const int ja = ka < ea ? ia[static_cast<std::size_t>(ka)] : a.cols();
      const int jb = kb < eb ? ib[static_cast<std::size_t>(kb)] : b.cols();
      if (ja < jb) {
        idx.push_back(ja);
        val.push_back(alpha * va[static_cast<std::size_t>(ka++)]);
      } else if (jb < ja) {
        idx.push_back(jb);
        val.push_back(beta * vb[static_cast<std::size_t>(kb++)]);
      } else {
        idx.push_back(ja);
        val.push_back(alpha * va[static_cast<std::size_t>(ka++)] + beta * vb[static_cast<std::size_t>(kb++)]);
      }
    }
    ptr[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(val.size());
  }
  return SparseMatrix::from_csr(a.rows(), a.cols(), std::move(ptr), std::move(idx), std::move(val),
                                a.symmetric() && b.symmetric());
}

SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  require(a.cols() == b.rows(), "multiply dimension mismatch " + dims(a) + " * " + dims(b));
  const auto pa = a.row_ptr();
  const auto ia = a.col_idx();
  const auto va = a.values();
  const auto pb = b.row_ptr();
  const auto ib = b.col_idx();
  const auto vb = b.values();

  std::vector<double> acc(static_cast<std::size_t>(b.cols()), 0.0);
  std::vector<int> marker(static_cast<std::size_t>(b.cols()), -1);
  std::vector<int> row_cols;
  std::vector<std::int64_t> ptr(static_cast<std::size_t>(a.rows()) + 1, 0);
  std::vector<int> idx;
  std::vector<double> val;

  for (int i = 0; i < a.rows(); ++i) {
    row_cols.clear();
    for (auto k = pa[static_cast<std::size_t>(i)]; k < pa[static_cast<std::size_t>(i) + 1]; ++k) {
      const int m = ia[static_cast<std::size_t>(k)];
      const double av = va[static_cast<std::size_t>(k)];
      for (auto l = pb[static_cast<std::size_t>(m)]; l < pb[static_cast<std::size_t>(m) + 1]; ++l) {
        const int j = ib[static_cast<std::size_t>(l)];
        if (marker[static_cast<std::size_t>(j)] != i) {
          marker[static_cast<std::size_t>(j)] = i;
          acc[static_cast<std::size_t>(j)] = 0.0;
          row_cols.push_back(j);
        }
        acc[static_cast<std::size_t>(j)] += av * vb[static_cast<std::size_t>(l)];
      }
    }
    std::sort(row_cols.begin(), row_cols.end());
    for (int j : row_cols) {
      idx.push_back(j);
      val.push_back(acc[static_cast<std::size_t>(j)]);
    }
    ptr[static_cast<std::size_t>(i) + 1] = static_cast<std::int64_t>(val.size());
  }
  return SparseMatrix::from_csr(a.rows(), b.cols(), std::move(ptr), std::move(idx), std::move(val));
}

SparseMatrix triple_product(const SparseMatrix& p, const SparseMatrix& a) {
  require(a.rows() == a.cols() && a.cols() == p.rows(),
          "triple_product dimension mismatch P " + dims(p) + ", A " + dims(a));
  SparseMatrix r = multiply(transpose(p), multiply(a, p));
  r.set_symmetric(a.symmetric());
  return r;
}

double asymmetry(const SparseMatrix& a) {
  require(a.rows() == a.cols(), "asymmetry needs a square matrix");
  const SparseMatrix d = add(a, transpose(a), 1.0, -1.0);
  return d.max_abs();
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// ---------------------------------------------------------------------------

ConjugateGradient::ConjugateGradient(const SparseMatrix& a, CgOptions options)
    : a_(a), options_(options) {
  require(a.rows() == a.cols(), "CG needs a square matrix, got " + dims(a));
  const auto n = static_cast<std::size_t>(a.rows());
  inv_diag_.assign(n, 1.0);
  if (options_.diag_precond) {
    const auto d = a.diagonal_entries();
    for (std::size_t i = 0; i < n; ++i) inv_diag_[i] = d[i] > 0.0 ? 1.0 / d[i] : 1.0;
  }
  r_.resize(n);
  z_.resize(n);
  p_.resize(n);
  q_.resize(n);
}

int ConjugateGradient::solve(std::span<const double> b, std::span<double> x) {
  const auto n = static_cast<std::size_t>(a_.rows());
  require(b.size() == n && x.size() == n, "CG right-hand side dimension mismatch");
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    last_residual_ = 0.0;
    return 0;
  }
  const double target = options_.tol * bnorm;
  int it = 0;

  // Outer loop restarts from the true residual whenever the recursive one
  // has drifted below tolerance without the true one following.
  for (int restart = 0; restart < 4; ++restart) {
    a_.multiply(x, q_);
    for (std::size_t i = 0; i < n; ++i) r_[i] = b[i] - q_[i];
    double rnorm = norm2(r_);
    if (rnorm <= target) {
      last_residual_ = rnorm / bnorm;
      return it;
    }
    for (std::size_t i = 0; i < n; ++i) z_[i] = inv_diag_[i] * r_[i];
    std::copy(z_.begin(), z_.end(), p_.begin());
    double rz = dot(r_, z_);
    while (it < options_.max_iter) {
      a_.multiply(p_, q_);
      const double pq = dot(p_, q_);
      if (!(pq > 0.0)) break;
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p_[i];
        r_[i] -= alpha * q_[i];
      }
      ++it;
      rnorm = norm2(r_);
      if (rnorm <= target) break;
      for (std::size_t i = 0; i < n; ++i) z_[i] = inv_diag_[i] * r_[i];
      const double rz_new = dot(r_, z_);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p_[i] = z_[i] + beta * p_[i];
    }
    // Independent check of the final iterate.
    a_.multiply(x, q_);
    double true_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = b[i] - q_[i];
      true_res += d * d;
    }
    true_res = std::sqrt(true_res);
    last_residual_ = true_res / bnorm;
    if (true_res <= target) return it;
    if (it >= options_.max_iter) break;
  }
  throw ConvergenceError("CG did not reach tolerance " + std::to_string(options_.tol) + " in " +
                             std::to_string(it) + " iterations (relative residual " +
                             std::to_string(last_residual_) + ")",
                         last_residual_, it);
}

CgResult cg_solve(const SparseMatrix& a, std::span<const double> b, const CgOptions& options) {
  ConjugateGradient cg(a, options);
  CgResult result;
  result.x.assign(b.size(), 0.0);
  result.iterations = cg.solve(b, result.x);
  result.relative_residual = cg.last_relative_residual();
  return result;
}

std::string to_string(SaddleMethod method) {
  switch (method) {
    case SaddleMethod::Auto: return "auto";
    case SaddleMethod::SchurDirect: return "schur-direct";
    case SaddleMethod::KktDirect: return "kkt-direct";
    case SaddleMethod::SchurCg: return "schur-cg";
  }
  return "unknown";
}

}  // namespace lodwave
