#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <cmath>

#include "lodwave/error.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

EigenSparse to_eigen(const SparseMatrix& m) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(m.nnz()));
  const auto ptr = m.row_ptr();
  const auto idx = m.col_idx();
  const auto val = m.values();
  for (int i = 0; i < m.rows(); ++i) {
    for (auto k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      t.emplace_back(i, idx[static_cast<std::size_t>(k)], val[static_cast<std::size_t>(k)]);
    }
  }
  EigenSparse e(m.rows(), m.cols());
  e.setFromTriplets(t.begin(), t.end());
  return e;
}

std::string where(const SaddleOptions& o) { return o.label.empty() ? std::string() : " [" + o.label + "]"; }

struct Reduced {
  SparseMatrix c;
  std::vector<int> kept;
};

Reduced drop_empty_rows(const SparseMatrix& c) {
  Reduced r;
  const auto ptr = c.row_ptr();
  const auto val = c.values();
  for (int i = 0; i < c.rows(); ++i) {
    bool nonzero = false;
    for (auto k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
      if (val[static_cast<std::size_t>(k)] != 0.0) {
        nonzero = true;
        break;
      }
    }
    if (nonzero) r.kept.push_back(i);
  }
  std::vector<int> all_cols(static_cast<std::size_t>(c.cols()));
  for (int j = 0; j < c.cols(); ++j) all_cols[static_cast<std::size_t>(j)] = j;
  r.c = c.submatrix(r.kept, all_cols);
  return r;
}

using Columns = std::vector<std::vector<double>>;

void solve_schur_direct(const SparseMatrix& a, const SparseMatrix& c, const Columns& rhs, Columns& q,
                        Columns& lambda, const SaddleOptions& options) {
  const EigenSparse ea = to_eigen(a);
  Eigen::SimplicialLDLT<EigenSparse> ldlt(ea);
  if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0.0).any()) {
    throw SingularError("sparse Cholesky of the constrained block failed" + where(options));
  }
  const int n = a.rows();
  const int nc = c.rows();
  Eigen::MatrixXd y;
  Eigen::LLT<Eigen::MatrixXd> schur;
  Eigen::MatrixXd ct;
  if (nc > 0) {
    ct = Eigen::MatrixXd(to_eigen(transpose(c)));
    y = ldlt.solve(ct);
    Eigen::MatrixXd s = ct.transpose() * y;
    s = 0.5 * (s + s.transpose()).eval();
    schur.compute(s);
    if (schur.info() != Eigen::Success) {
      throw SingularError("constraint rows are rank deficient" + where(options));
    }
  }
  for (std::size_t r = 0; r < rhs.size(); ++r) {
    const Eigen::Map<const Eigen::VectorXd> b(rhs[r].data(), n);
    Eigen::VectorXd x = ldlt.solve(b);
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(nc);
    if (nc > 0) {
      lam = schur.solve(ct.transpose() * x);
      x -= y * lam;
    }
    q[r].assign(x.data(), x.data() + n);
    lambda[r].assign(lam.data(), lam.data() + nc);
  }
}

void solve_kkt_direct(const SparseMatrix& a, const SparseMatrix& c, const Columns& rhs, Columns& q,
                      Columns& lambda, const SaddleOptions& options) {
  const int n = a.rows();
  const int nc = c.rows();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nnz() + 2 * c.nnz()));
  auto push = [&t](const SparseMatrix& m, int row_off, int col_off, bool transposed) {
    const auto ptr = m.row_ptr();
    const auto idx = m.col_idx();
    const auto val = m.values();
    for (int i = 0; i < m.rows(); ++i) {
      for (auto k = ptr[static_cast<std::size_t>(i)]; k < ptr[static_cast<std::size_t>(i) + 1]; ++k) {
        const int j = idx[static_cast<std::size_t>(k)];
        const double v = val[static_cast<std::size_t>(k)];
        if (transposed) t.emplace_back(col_off + j, row_off + i, v);
        else t.emplace_back(row_off + i, col_off + j, v);
      }
    }
  };
  push(a, 0, 0, false);
  push(c, n, 0, false);
  push(c, n, 0, true);
  EigenSparse kkt(n + nc, n + nc);
  kkt.setFromTriplets(t.begin(), t.end());
  kkt.makeCompressed();
  Eigen::SparseLU<EigenSparse> lu;
  lu.analyzePattern(kkt);
  lu.factorize(kkt);
  if (lu.info() != Eigen::Success) {
    throw SingularError("sparse LU of the KKT matrix failed" + where(options));
  }
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + nc);
  for (std::size_t r = 0; r < rhs.size(); ++r) {
    b.head(n) = Eigen::Map<const Eigen::VectorXd>(rhs[r].data(), n);
    b.tail(nc).setZero();
    const Eigen::VectorXd x = lu.solve(b);
    q[r].assign(x.data(), x.data() + n);
    lambda[r].assign(x.data() + n, x.data() + n + nc);
  }
}

void solve_schur_cg(const SparseMatrix& a, const SparseMatrix& c, const Columns& rhs, Columns& q,
                    Columns& lambda, const SaddleOptions& options) {
  const auto n = static_cast<std::size_t>(a.rows());
  const auto nc = static_cast<std::size_t>(c.rows());
  CgOptions inner{options.cg_tol, 20 * static_cast<int>(n) + 100, true};
  ConjugateGradient cg(a, inner);
  auto solve_a = [&](std::span<const double> b) {
    std::vector<double> x(n, 0.0);
    cg.solve(b, x);
    return x;
  };
  // Outer CG on S = C A^{-1} C^T, which is SPD for full-rank C.
  auto apply_s = [&](std::span<const double> v) { return matvec(c, solve_a(matvec_transpose(c, v))); };

  for (std::size_t r = 0; r < rhs.size(); ++r) {
    const auto x0 = solve_a(rhs[r]);
    std::vector<double> lam(nc, 0.0);
    if (nc > 0) {
      const auto g = matvec(c, x0);
      const double gnorm = norm2(g);
      if (gnorm > 0.0) {
        std::vector<double> res = g;
        std::vector<double> p = res;
        double rr = dot(res, res);
        for (std::size_t it = 0; it < 10 * nc + 50 && std::sqrt(rr) > options.cg_tol * gnorm; ++it) {
          const auto sp = apply_s(p);
          const double ps = dot(p, sp);
          if (!(ps > 0.0)) throw SingularError("Schur complement not positive definite" + where(options));
          const double alpha = rr / ps;
          for (std::size_t i = 0; i < nc; ++i) {
            lam[i] += alpha * p[i];
            res[i] -= alpha * sp[i];
          }
          const double rr_new = dot(res, res);
          for (std::size_t i = 0; i < nc; ++i) p[i] = res[i] + rr_new / rr * p[i];
          rr = rr_new;
        }
      }
    }
    auto b = rhs[r];
    const auto ctl = matvec_transpose(c, lam);
    for (std::size_t i = 0; i < n; ++i) b[i] -= ctl[i];
    q[r] = solve_a(b);
    lambda[r] = std::move(lam);
  }
}

}  // namespace

SaddleSolution saddle_solve(const SaddleSystem& system, const SaddleOptions& options) {
  const SparseMatrix& a = system.a;
  if (a.rows() != a.cols()) throw DimensionError("saddle block A must be square");
  if (system.c.rows() > 0 && system.c.cols() != a.cols()) {
    throw DimensionError("constraint matrix has " + std::to_string(system.c.cols()) +
                         " columns, A has " + std::to_string(a.cols()));
  }
  for (const auto& r : system.rhs) {
    if (r.size() != static_cast<std::size_t>(a.rows())) throw DimensionError("saddle rhs length mismatch");
  }

  Reduced reduced = system.c.rows() > 0 ? drop_empty_rows(system.c) : Reduced{SparseMatrix(0, a.cols()), {}};
  const SparseMatrix& c = reduced.c;

  SaddleMethod method = options.method;
  if (method == SaddleMethod::Auto) {
    method = a.rows() + c.rows() <= kDirectLimit ? SaddleMethod::SchurDirect : SaddleMethod::SchurCg;
  }

  SaddleSolution sol;
  sol.method = method;
  sol.kept_rows = reduced.kept;
  Columns q(system.rhs.size());
  Columns lam(system.rhs.size());
  switch (method) {
    case SaddleMethod::SchurDirect: solve_schur_direct(a, c, system.rhs, q, lam, options); break;
    case SaddleMethod::KktDirect: solve_kkt_direct(a, c, system.rhs, q, lam, options); break;
    case SaddleMethod::SchurCg: solve_schur_cg(a, c, system.rhs, q, lam, options); break;
    case SaddleMethod::Auto: break;
  }

  // Residual check with fresh products, independent of the solve path.
  const double cmax = c.rows() > 0 ? c.max_abs() : 0.0;
  for (std::size_t r = 0; r < system.rhs.size(); ++r) {
    const auto& b = system.rhs[r];
    const double bnorm = norm2(b);
    auto res = matvec(a, q[r]);
    if (c.rows() > 0) {
      const auto ctl = matvec_transpose(c, lam[r]);
      for (std::size_t i = 0; i < res.size(); ++i) res[i] += ctl[i];
    }
    for (std::size_t i = 0; i < res.size(); ++i) res[i] -= b[i];
    const double rel1 = bnorm > 0.0 ? norm2(res) / bnorm : norm2(res);
    double rel2 = 0.0;
    if (c.rows() > 0) {
      const double scale = cmax * norm2(q[r]);
      const double cq = norm2(matvec(c, q[r]));
      rel2 = scale > 0.0 ? cq / scale : cq;
    }
    const double worst = std::max(rel1, rel2);
    sol.max_residual = std::max(sol.max_residual, worst);
    if (!(worst <= options.residual_tol)) {
      throw SingularError("saddle residual " + std::to_string(worst) + " exceeds tolerance" + where(options));
    }
  }

  sol.q = std::move(q);
  sol.lambda.resize(system.rhs.size());
  for (std::size_t r = 0; r < system.rhs.size(); ++r) {
    sol.lambda[r].assign(static_cast<std::size_t>(system.c.rows()), 0.0);
    for (std::size_t k = 0; k < reduced.kept.size(); ++k) {
      sol.lambda[r][static_cast<std::size_t>(reduced.kept[k])] = lam[r][k];
    }
  }
  return sol;
}

}  // namespace lodwave
