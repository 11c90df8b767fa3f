#include <doctest.h>

#include <cmath>
#include <numbers>

#include "checks.hpp"
#include "lodwave/assembly.hpp"
#include "lodwave/error.hpp"
#include "lodwave/interp.hpp"

using namespace lodwave;

namespace {

void check_oracle(const oracle::Check& c) {
  INFO(c.name << ": deviation " << c.deviation << " vs tolerance " << c.tolerance);
  CHECK(c.ok());
}

CoefficientField constant_field(double v) {
  CoefficientField f;
  f.values = {v};
  f.lo = f.hi = v;
  return f;
}

double max_dev_identity(const SparseMatrix& a) {
  const auto d = oracle::dense(a);
  return (d - oracle::MatrixXd::Identity(d.rows(), d.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("dense oracle comparisons") {
  check_oracle(oracle::local_projection_hat());
  check_oracle(oracle::interpolation_bubble());
  check_oracle(oracle::interpolation_random(InterpMode::Weighted));
  check_oracle(oracle::interpolation_random(InterpMode::Naive));
  check_oracle(oracle::averaging_weights_1124());
}

TEST_CASE("local projection reproduces bilinears and constants") {
  const MeshLevel coarse(2), fine(4);
  const auto beta = values_on_fine(random_field(4, 0.5, 4.0, 3), fine);
  const auto lp = local_projection(coarse, fine, beta, coarse.element_id(2, 1));
  const double x0 = 2 * coarse.width(), y0 = coarse.width();
  auto bilinear = [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y + 5.0 * x * y; };
  std::array<double, 4> got{};
  std::array<double, 4> ones{};
  for (std::size_t k = 0; k < lp.fine_nodes.size(); ++k) {
    const int node = lp.fine_nodes[k];
    const int ix = node % fine.nodes_per_axis();
    const int iy = node / fine.nodes_per_axis();
    for (int a = 0; a < 4; ++a) {
      got[static_cast<std::size_t>(a)] += lp.at(a, k) * bilinear(ix * fine.width(), iy * fine.width());
      ones[static_cast<std::size_t>(a)] += lp.at(a, k);
    }
  }
  for (int a = 0; a < 4; ++a) {
    const double x = x0 + (a & 1) * coarse.width();
    const double y = y0 + ((a >> 1) & 1) * coarse.width();
    CHECK(got[static_cast<std::size_t>(a)] == doctest::Approx(bilinear(x, y)).epsilon(1e-12));
    CHECK(ones[static_cast<std::size_t>(a)] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("averaging weights") {
  const MeshLevel coarse(2), fine(4);
  const auto unit = values_on_fine(constant_field(1.0), fine);
  for (auto mode : {InterpMode::Weighted, InterpMode::Naive})
    for (const auto& w : averaging_weights(coarse, fine, unit, mode))
      for (double x : w) CHECK(x == doctest::Approx(0.25).epsilon(1e-14));
  const auto beta = values_on_fine(random_field(4, 0.5, 4.0, 5), fine);
  for (const auto& w : averaging_weights(coarse, fine, beta, InterpMode::Weighted))
    CHECK(w[0] + w[1] + w[2] + w[3] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("coarse equals fine gives the identity") {
  const MeshLevel mesh(3);
  const auto pi = build_pi(mesh, mesh, random_field(3, 0.5, 4.0, 7), InterpMode::Weighted);
  CHECK(max_dev_identity(pi.p) <= 1e-14);
  CHECK(max_dev_identity(pi.e) == 0.0);
}

TEST_CASE("projection property") {
  for (auto [kc, kf] : {std::pair{1, 3}, std::pair{2, 4}, std::pair{3, 6}})
    for (auto mode : {InterpMode::Weighted, InterpMode::Naive}) {
      const MeshLevel coarse(kc), fine(kf);
      const auto pi = build_pi(coarse, fine, random_field(kf, 0.5, 4.0, 11), mode);
      CHECK(max_dev_identity(multiply(pi.p, pi.e)) <= 1e-12);
    }
}

TEST_CASE("locality") {
  // Row i of P only touches fine dofs inside the closure of the four
  // elements around coarse node i.
  const MeshLevel coarse(3), fine(5);
  const auto pi = build_pi(coarse, fine, random_field(5, 0.5, 4.0, 13), InterpMode::Weighted);
  for (int i = 0; i < coarse.num_interior(); ++i) {
    const auto [cx, cy] = coarse.dof_coords(i);
    for (auto k = pi.p.row_ptr()[i]; k < pi.p.row_ptr()[i + 1]; ++k) {
      const auto [fx, fy] = fine.dof_coords(pi.p.col_idx()[k]);
      CHECK(std::abs(fx - 4 * cx) <= 4);
      CHECK(std::abs(fy - 4 * cy) <= 4);
    }
  }
}

TEST_CASE("constants are preserved away from the boundary") {
  const MeshLevel coarse(3), fine(5);
  const auto pi = build_pi(coarse, fine, random_field(5, 0.5, 4.0, 17), InterpMode::Weighted);
  const std::vector<double> ones(static_cast<std::size_t>(fine.num_interior()), 1.0);
  const auto p1 = matvec(pi.p, ones);
  for (int i = 0; i < coarse.num_interior(); ++i) {
    const auto [cx, cy] = coarse.dof_coords(i);
    if (cx >= 2 && cy >= 2 && cx <= 6 && cy <= 6) CHECK(p1[static_cast<std::size_t>(i)] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("modes coincide for constant beta") {
  const MeshLevel coarse(2), fine(5);
  const auto c = constant_field(2.7);
  const auto w = build_pi(coarse, fine, c, InterpMode::Weighted);
  const auto n = build_pi(coarse, fine, c, InterpMode::Naive);
  CHECK((oracle::dense(w.p) - oracle::dense(n.p)).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("kernel dimension on a patch") {
  const MeshLevel coarse(2), fine(4);
  const auto pi = build_pi(coarse, fine, random_field(4, 0.5, 4.0, 19), InterpMode::Weighted);
  const auto patch = element_patch(coarse, coarse.element_id(1, 1), 1, fine);
  std::vector<int> rows;
  for (int i = 0; i < coarse.num_interior(); ++i) rows.push_back(i);
  const auto sub = oracle::dense(pi.p.submatrix(rows, patch.fine_dofs));
  Eigen::FullPivLU<oracle::MatrixXd> lu(sub);
  int nonzero_rows = 0;
  for (Eigen::Index r = 0; r < sub.rows(); ++r) nonzero_rows += sub.row(r).cwiseAbs().maxCoeff() > 0 ? 1 : 0;
  CHECK(lu.rank() == nonzero_rows);
  CHECK(oracle::kernel(sub).cols() == static_cast<Eigen::Index>(patch.fine_dofs.size()) - nonzero_rows);
}

TEST_CASE("interpolation constants") {
  const MeshLevel fine(5);
  const auto one = constant_field(1.0);
  std::vector<InterpConstants> seq;
  for (int k = 1; k <= 4; ++k) {
    const MeshLevel coarse(k);
    for (auto mode : {InterpMode::Weighted, InterpMode::Naive}) {
      const auto c = measure_interp_constants(build_pi(coarse, fine, one, mode), coarse, fine);
      CHECK(std::isfinite(c.stability));
      CHECK(std::isfinite(c.interpolation));
      CHECK(c.probes == 24);
      if (mode == InterpMode::Weighted) seq.push_back(c);
    }
  }
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const double rs = seq[i].stability / seq[i - 1].stability;
    const double ri = seq[i].interpolation / seq[i - 1].interpolation;
    // Bounded under refinement; rough probes make the interpolation ratio shrink.
    CHECK(rs <= 2.0);
    CHECK(ri <= 2.0);
  }
}

TEST_CASE("coarse functions have zero interpolation residual") {
  const MeshLevel coarse(2), fine(4);
  const auto pi = build_pi(coarse, fine, random_field(4, 0.5, 4.0, 23), InterpMode::Weighted);
  const std::vector<double> v{0.3, -1.0, 2.0, 0.5, 0.1, 0.7, -0.2, 1.1, 0.9};
  const auto ev = matvec(pi.e, v);
  const auto back = matvec(pi.e, matvec(pi.p, ev));
  for (std::size_t i = 0; i < ev.size(); ++i) CHECK(std::abs(back[i] - ev[i]) <= 1e-12);
}

TEST_CASE("mode names") {
  CHECK(parse_interp_mode(to_string(InterpMode::Naive)) == InterpMode::Naive);
  CHECK(parse_interp_mode(to_string(InterpMode::Weighted)) == InterpMode::Weighted);
  CHECK_THROWS_AS(parse_interp_mode("clement"), ConfigError);
}
