#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lodwave/dynamics.hpp"
#include "lodwave/lod.hpp"

using namespace lodwave;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

// Fine stiffness apply, the inner kernel of every reference step.
void BM_Spmv(benchmark::State& state) {
  const auto k = static_cast<int>(state.range(0));
  const MeshLevel mesh(k);
  const auto a = assemble_stiffness(mesh, mesh, random_field(k, 1.0, 2.5, 1));
  const auto x = random_vector(static_cast<std::size_t>(a.cols()), 2);
  std::vector<double> y(x.size());
  for (auto _ : state) {
    a.multiply(x, y);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * a.nnz());
}
BENCHMARK(BM_Spmv)->Arg(6)->Arg(7)->Arg(8);

void BM_LocalProjection(benchmark::State& state) {
  const MeshLevel coarse(static_cast<int>(state.range(0))), fine(7);
  const auto beta = values_on_fine(random_field(6, 0.5, 4.0, 3), fine);
  const int e = coarse.element_id(coarse.elems_per_axis() / 2, coarse.elems_per_axis() / 2);
  for (auto _ : state) benchmark::DoNotOptimize(local_projection(coarse, fine, beta, e));
}
BENCHMARK(BM_LocalProjection)->Arg(3)->Arg(5);

// One element's correctors: patch assembly plus the saddle solve.
void BM_ElementCorrector(benchmark::State& state) {
  const MeshLevel coarse(4), fine(7);
  const auto problem = make_fine_problem(fine, random_field(6, 1.0, 2.5, 4), random_field(6, 0.5, 4.0, 5));
  const auto pi = build_pi(coarse, fine, problem.beta, InterpMode::Weighted);
  const int ell = static_cast<int>(state.range(0));
  const int e = coarse.element_id(8, 8);
  for (auto _ : state) benchmark::DoNotOptimize(element_corrector(problem, coarse, pi, e, ell));
}
BENCHMARK(BM_ElementCorrector)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

// Full online loop, lumped against consistent mass, on a coarse LOD basis.
struct OnlineFixture {
  MultiscaleBasis basis;
  Forcing lumped, consistent;
  TimeGrid grid;
  explicit OnlineFixture(int k) {
    const MeshLevel coarse(k), fine(7);
    const auto problem = make_fine_problem(fine, random_field(6, 1.0, 2.5, 6), random_field(6, 0.5, 4.0, 7));
    const auto pi = build_pi(coarse, fine, problem.beta, InterpMode::Weighted);
    basis = build_basis(problem, coarse, pi, 2);
    const auto shape = nodal_function(
        fine, [](double x, double y, double) { return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y); },
        0.0);
    auto g = [](double t) { return std::cos(0.5 * std::numbers::pi * t); };
    lumped = separable_forcing(matvec(pi.p, shape), g);
    consistent = separable_forcing(matvec_transpose(basis.b, matvec(problem.ops.mass, shape)), g);
    grid = make_time_grid(1.0, 256);
  }
};

void BM_LeapfrogLumped(benchmark::State& state) {
  const OnlineFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(leapfrog_lumped(f.basis, f.lumped, f.grid).final_state);
  state.SetItemsProcessed(state.iterations() * f.grid.steps);
}
BENCHMARK(BM_LeapfrogLumped)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_LeapfrogConsistent(benchmark::State& state) {
  const OnlineFixture f(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(leapfrog_consistent(f.basis.m_ms, f.basis.k, f.consistent, f.grid).final_state);
  state.SetItemsProcessed(state.iterations() * f.grid.steps);
}
BENCHMARK(BM_LeapfrogConsistent)->Arg(4)->Arg(5)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
