#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "lodwave/error.hpp"
#include "lodwave/sparse.hpp"

namespace lodwave {

EigenEstimate lambda_max(const SparseMatrix& a, std::span<const double> inv_diag, double rel_tol,
                         int max_iter) {
  if (a.rows() != a.cols() || inv_diag.size() != static_cast<std::size_t>(a.rows())) {
    throw DimensionError("lambda_max dimension mismatch");
  }
  const auto n = static_cast<std::size_t>(a.rows());
  EigenEstimate est;
  if (n == 0) {
    est.converged = true;
    return est;
  }
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(inv_diag[i] > 0.0)) throw DomainError("lambda_max needs a positive diagonal");
    s[i] = std::sqrt(inv_diag[i]);
  }

  const int steps = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, max_iter))));
  std::vector<std::vector<double>> basis;
  basis.reserve(static_cast<std::size_t>(steps) + 1);
  std::vector<double> alpha;
  std::vector<double> beta;

  std::vector<double> v(n);
  std::mt19937_64 gen(0x5eed);
  for (auto& x : v) x = static_cast<double>(gen() >> 11) * 0x1.0p-53 + 0.5;
  const double v0 = norm2(v);
  for (auto& x : v) x /= v0;
  basis.push_back(v);

  std::vector<double> w(n);
  std::vector<double> tmp(n);
  double previous = 0.0;
  for (int k = 0; k < steps; ++k) {
    const auto& q = basis.back();
    for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] * q[i];
    a.multiply(tmp, w);
    for (std::size_t i = 0; i < n; ++i) w[i] *= s[i];
    const double ak = dot(w, q);
    alpha.push_back(ak);
    // Full reorthogonalisation, twice for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        const double c = dot(w, b);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * b[i];
      }
    }
    const double bk = norm2(w);

    const auto m = alpha.size();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), static_cast<Eigen::Index>(m));
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), static_cast<Eigen::Index>(m - 1)))
                                : Eigen::VectorXd();
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const auto top = static_cast<Eigen::Index>(m - 1);
    const double theta = tri.eigenvalues()(top);
    const double resid = std::abs(bk * tri.eigenvectors()(top, top));

    est.value = theta;
    est.residual = resid;
    est.iterations = k + 1;
    const double scale = std::max(std::abs(theta), 1e-300);
    if (resid <= rel_tol * scale || bk <= 1e-14 * scale ||
        (k >= 10 && std::abs(theta - previous) <= 1e-14 * scale && resid <= 1e-3 * scale)) {
      est.converged = true;
      return est;
    }
    previous = theta;
    beta.push_back(bk);
    for (std::size_t i = 0; i < n; ++i) w[i] /= bk;
    basis.push_back(w);
  }
  est.converged = est.iterations == static_cast<int>(n);
  return est;
}

}  // namespace lodwave
