#include <doctest.h>

#include <random>

#include "checks.hpp"
#include "lodwave/error.hpp"
#include "lodwave/sparse.hpp"

using namespace lodwave;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

SparseMatrix random_sparse(int rows, int cols, double density, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<Triplet> t;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (std::abs(dist(gen)) < density) t.push_back({i, j, dist(gen)});
  return SparseMatrix::from_triplets(rows, cols, t);
}

void check_oracle(const oracle::Check& c) {
  INFO(c.name << ": deviation " << c.deviation << " vs tolerance " << c.tolerance);
  CHECK(c.ok());
}

}  // namespace

TEST_CASE("csr construction") {
  const auto a = SparseMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 0, 3.0}, {1, 2, 4.0}});
  CHECK(a.nnz() == 3);
  CHECK(a.coeff(1, 2) == 5.0);
  CHECK(a.coeff(0, 0) == 0.0);
  const auto ci = a.col_idx();
  CHECK(ci[1] < ci[2]);
  CHECK_THROWS_AS(SparseMatrix::from_csr(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), Error);
}

TEST_CASE("identity products") {
  const auto a = random_sparse(7, 7, 0.4, 1);
  const auto x = random_vector(7, 2);
  CHECK(matvec(SparseMatrix::identity(7), x) == x);
  CHECK(oracle::dense(triple_product(SparseMatrix::identity(7), a)) == oracle::dense(a));
}

TEST_CASE("transpose, add and multiply against dense") {
  const auto a = random_sparse(6, 4, 0.5, 3);
  const auto b = random_sparse(4, 5, 0.5, 4);
  const auto c = random_sparse(6, 4, 0.5, 5);
  const auto da = oracle::dense(a);
  CHECK((oracle::dense(transpose(a)) - da.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((oracle::dense(add(a, c, 2.0, -0.5)) - (2.0 * da - 0.5 * oracle::dense(c))).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK((oracle::dense(multiply(a, b)) - da * oracle::dense(b)).cwiseAbs().maxCoeff() <= 1e-15);
  const auto x = random_vector(6, 6);
  CHECK((oracle::to_eigen(matvec_transpose(a, x)) - da.transpose() * oracle::to_eigen(x)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("triple product of a symmetric matrix is symmetric") {
  for (std::uint64_t seed = 10; seed < 15; ++seed) {
    const auto s = random_sparse(8, 8, 0.4, seed);
    const auto a = add(s, transpose(s)).symmetrized();
    const auto p = random_sparse(8, 5, 0.5, seed + 100);
    const auto g = triple_product(p, a);
    CHECK(g.symmetric());
    CHECK(asymmetry(g) <= 1e-14 * g.max_abs());
  }
}

TEST_CASE("products are bit-reproducible") {
  const auto a = random_sparse(50, 50, 0.2, 7);
  const auto p = random_sparse(50, 20, 0.2, 8);
  CHECK(triple_product(p, a) == triple_product(p, a));
  const auto x = random_vector(50, 9);
  CHECK(matvec(a, x) == matvec(a, x));
}

TEST_CASE("dense oracle comparisons") {
  check_oracle(oracle::triple_product_3x3());
  check_oracle(oracle::cg_laplacian_1d());
  check_oracle(oracle::cg_singular_on_range());
  check_oracle(oracle::saddle_projection());
  check_oracle(oracle::saddle_random_kkt(SaddleMethod::SchurDirect));
  check_oracle(oracle::saddle_random_kkt(SaddleMethod::KktDirect));
  check_oracle(oracle::saddle_random_kkt(SaddleMethod::SchurCg));
  check_oracle(oracle::lambda_laplacian_1d());
  check_oracle(oracle::lambda_fine_fem());
}

TEST_CASE("cg with identity converges in one iteration") {
  const auto b = random_vector(9, 12);
  const auto r = cg_solve(SparseMatrix::identity(9), b);
  CHECK(r.iterations == 1);
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(r.x[i] == doctest::Approx(b[i]).epsilon(1e-14));
}

TEST_CASE("cg reports non-convergence with its residual") {
  std::vector<Triplet> t;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    t.push_back({i, i, 2.0});
    if (i) t.push_back({i, i - 1, -1.0});
    if (i + 1 < n) t.push_back({i, i + 1, -1.0});
  }
  const auto a = SparseMatrix::from_triplets(n, n, t, true);
  try {
    cg_solve(a, std::vector<double>(n, 1.0), {1e-12, 3, false});
    FAIL("expected non-convergence");
  } catch (const ConvergenceError& e) {
    CHECK(e.iterations() == 3);
    CHECK(e.residual() > 1e-12);
  }
}

TEST_CASE("saddle without constraints is a plain solve") {
  const auto s = random_sparse(10, 10, 0.3, 21);
  const auto a = add(multiply(transpose(s), s), SparseMatrix::identity(10)).symmetrized();
  SaddleSystem sys{a, SparseMatrix(0, 10), {random_vector(10, 22)}};
  const auto sol = saddle_solve(sys);
  const auto want = cg_solve(a, sys.rhs[0], {1e-14, 1000, true});
  for (std::size_t i = 0; i < 10; ++i) CHECK(sol.q[0][i] == doctest::Approx(want.x[i]).epsilon(1e-10));
}

TEST_CASE("saddle methods agree and drop empty rows") {
  const int n = 40;
  const auto s = random_sparse(n, n, 0.15, 31);
  const auto a = add(multiply(transpose(s), s), SparseMatrix::identity(n)).symmetrized();
  auto c = random_sparse(5, n, 0.3, 32);
  // Append an all-zero row, which must be ignored.
  std::vector<Triplet> t;
  for (int i = 0; i < c.rows(); ++i)
    for (auto k = c.row_ptr()[i]; k < c.row_ptr()[i + 1]; ++k) t.push_back({i, c.col_idx()[k], c.values()[k]});
  c = SparseMatrix::from_triplets(6, n, t);
  SaddleSystem sys{a, c, {random_vector(n, 33), random_vector(n, 34)}};

  SaddleOptions opts;
  opts.method = SaddleMethod::KktDirect;
  const auto ref = saddle_solve(sys, opts);
  CHECK(ref.kept_rows.size() == 5);
  for (auto m : {SaddleMethod::SchurDirect, SaddleMethod::SchurCg, SaddleMethod::Auto}) {
    opts.method = m;
    const auto sol = saddle_solve(sys, opts);
    CHECK(sol.max_residual <= 1e-10);
    for (std::size_t r = 0; r < 2; ++r) {
      const auto cq = matvec(c, sol.q[r]);
      for (double v : cq) CHECK(std::abs(v) <= 1e-10);
      for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i)
        CHECK(sol.q[r][i] == doctest::Approx(ref.q[r][i]).epsilon(1e-9));
    }
  }
}

TEST_CASE("saddle breakdown names the system") {
  // A vanishes on ker C, so the constrained problem is singular.
  const auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}}, true);
  const auto c = SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}});
  SaddleSystem sys{a, c, {{1.0, 1.0}}};
  SaddleOptions opts;
  opts.label = "patch 17";
  for (auto m : {SaddleMethod::SchurDirect, SaddleMethod::KktDirect}) {
    opts.method = m;
    try {
      saddle_solve(sys, opts);
      FAIL("expected breakdown");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("patch 17") != std::string::npos);
    }
  }
}

TEST_CASE("largest eigenvalue of a diagonal") {
  const auto a = SparseMatrix::diagonal(std::vector<double>{1.0, 2.0, 3.0});
  const auto est = lambda_max(a, std::vector<double>{1.0, 1.0, 1.0});
  CHECK(est.converged);
  CHECK(est.value == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(est.conservative() == est.value);
}
