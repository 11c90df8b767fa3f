// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "checks.hpp"
#include "lodwave/dynamics.hpp"
#include "lodwave/experiment.hpp"
#include "lodwave/metrics.hpp"

using namespace lodwave;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

int failures = 0;

void verdict(int id, const std::string& title, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s [%2d] %s: %s\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
}

void progress(const std::string& line) {
  std::fprintf(stderr, "  %s\n", line.c_str());
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(gen);
  return v;
}

CoefficientField constant_field(double v) {
  CoefficientField f;
  f.values = {v};
  f.lo = f.hi = v;
  return f;
}

// (variant, ell) -> H exponent -> record
using Curves = std::map<std::pair<Variant, int>, std::map<int, const ErrorRecord*>>;

Curves curves_of(const ExperimentReport& report) {
  Curves c;
  for (const auto& r : report.records) c[{r.variant, r.ell}][r.h_exponent] = &r;
  return c;
}

const ErrorRecord* find(const Curves& c, Variant v, int ell, int h) {
  const auto it = c.find({v, ell});
  if (it == c.end()) return nullptr;
  const auto jt = it->second.find(h);
  return jt == it->second.end() || !jt->second->ok ? nullptr : jt->second;
}

double a_form(const SparseMatrix& a, const std::vector<double>& u, const std::vector<double>& w) {
  return dot(u, matvec(a, w));
}

std::string energy_floor(const ExperimentReport& report, int& rows, bool& ok) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& r : report.records) {
    if (!is_lumped(r.variant)) continue;
    ++rows;
    if (!r.min_energy || !(*r.min_energy >= 0.0)) ok = false;
    if (r.min_energy) lowest = std::min(lowest, *r.min_energy);
  }
  return fmt(lowest);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lodwave acceptance run"};
  std::string out = "acceptance-out";
  app.add_option("--out", out, "directory for the experiment reports");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);

  // Example 1 sweep shared by the convergence, ablation, saturation and
  // energy criteria.
  auto ex1 = example_defaults("example1");
  ex1.variants = {Variant::MllodWeighted, Variant::MllodNaive, Variant::Fem};
  ex1.ells = {2, 4};
  ex1.naive_ell = 4;
  ex1.timing = false;
  ex1.deterministic = true;
  std::fprintf(stderr, "example 1 sweep\n");
  const auto t1 = Clock::now();
  const auto rep1 = run_experiment(ex1, progress);
  const double ex1_seconds = seconds_since(t1);
  emit_report(rep1, fs::path(out) / "example1");
  const auto c1 = curves_of(rep1);

  {
    bool ok = rep1.failed_rows() == 0;
    std::string errs;
    std::vector<double> e;
    for (int h = 1; h <= 6; ++h) {
      const auto* r = find(c1, Variant::MllodWeighted, 4, h);
      if (!r) {
        ok = false;
        continue;
      }
      e.push_back(r->rel_err_h1);
      errs += (errs.empty() ? "" : " ") + fmt(r->rel_err_h1);
    }
    bool monotone = e.size() == 6;
    for (std::size_t i = 1; i < e.size(); ++i) monotone = monotone && e[i] < e[i - 1];
    double mean = 0.0;
    if (e.size() == 6) mean = (eoc(e[2], e[3]) + eoc(e[3], e[4]) + eoc(e[4], e[5])) / 3.0;
    const double finest = e.empty() ? 1.0 : e.back();
    ok = ok && monotone && mean >= 1.7 && finest <= 5e-3 && ex1_seconds <= 1800.0;
    verdict(1, "example 1 convergence", ok,
            "errors " + errs + "; mean eoc " + fmt(mean) + " (>= 1.7); finest " + fmt(finest) + " (<= 5e-3); " +
                fmt(ex1_seconds) + " s");
  }

  {
    const auto* n5 = find(c1, Variant::MllodNaive, 4, 5);
    const auto* n6 = find(c1, Variant::MllodNaive, 4, 6);
    const auto* w5 = find(c1, Variant::MllodWeighted, 4, 5);
    const auto* w6 = find(c1, Variant::MllodWeighted, 4, 6);
    const auto* f4 = find(c1, Variant::Fem, 0, 4);
    const bool have = n5 && n6 && w5 && w6 && f4;
    const double en = have ? eoc(n5->rel_err_h1, n6->rel_err_h1) : 0.0;
    const double ew = have ? eoc(w5->rel_err_h1, w6->rel_err_h1) : 0.0;
    const double fem = have ? f4->rel_err_h1 : 0.0;
    verdict(2, "naive averaging ablation", have && en <= 1.5 && ew >= 1.7 && fem >= 0.05,
            "naive eoc " + fmt(en) + " (<= 1.5); weighted eoc " + fmt(ew) + " (>= 1.7); FEM at 2^-4 " + fmt(fem) +
                " (>= 0.05)");
  }

  {
    const auto* a5 = find(c1, Variant::MllodWeighted, 2, 5);
    const auto* a6 = find(c1, Variant::MllodWeighted, 2, 6);
    const auto* b5 = find(c1, Variant::MllodWeighted, 4, 5);
    const auto* b6 = find(c1, Variant::MllodWeighted, 4, 6);
    const bool have = a5 && a6 && b5 && b6;
    const double r2 = have ? a6->rel_err_h1 / a5->rel_err_h1 : 0.0;
    const double r4 = have ? b6->rel_err_h1 / b5->rel_err_h1 : 1.0;
    verdict(3, "localization saturation", have && r2 >= 0.7 && r4 <= 0.45,
            "ell=2 ratio " + fmt(r2) + " (>= 0.7); ell=4 ratio " + fmt(r4) + " (<= 0.45)");
  }

  {
    std::fprintf(stderr, "timing study\n");
    auto tc = ex1;
    tc.timing_h = {4, 5, 6};
    tc.timing_repeats = 3;
    tc.timing_ell = 4;
    const auto rows = timing_study(tc, progress);
    bool ok = rows.size() == 3;
    std::string detail = "speed-ups";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail += " " + fmt(rows[i].speedup());
      ok = ok && rows[i].lumped_iterations == 0;
      if (i > 0) ok = ok && rows[i].speedup() > rows[i - 1].speedup();
    }
    const double last = rows.empty() ? 0.0 : rows.back().speedup();
    ok = ok && last >= 10.0;
    std::int64_t lumped_iters = 0;
    for (const auto& r : rows) lumped_iters += r.lumped_iterations;
    verdict(4, "speed-up structure", ok,
            detail + " (monotone, finest >= 10); lumped solver iterations " + std::to_string(lumped_iters));
  }

  {
    const auto t0 = Clock::now();
    const MeshLevel coarse(2), fine(4);
    const auto problem = make_fine_problem(fine, random_field(4, 1.0, 8.0, 3), random_field(4, 1.0, 8.0, 4));
    const auto pi = build_pi(coarse, fine, problem.beta, InterpMode::Weighted);
    const auto basis = build_basis(problem, coarse, pi, kGlobalPatch);
    const auto& a = problem.ops.stiffness;
    const auto nf = static_cast<std::size_t>(fine.num_interior());
    const auto nc = static_cast<std::size_t>(coarse.num_interior());
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 20; ++t) {
      auto w = random_vector(nf, 100 + t);
      const auto epw = matvec(pi.e, matvec(pi.p, w));
      for (std::size_t i = 0; i < nf; ++i) w[i] -= epw[i];
      const auto sv = matvec(basis.b, random_vector(nc, 200 + t));
      worst = std::max(worst, std::abs(a_form(a, sv, w)) / std::sqrt(a_form(a, sv, sv) * a_form(a, w, w)));
    }
    const double secs = seconds_since(t0);
    verdict(5, "orthogonality of the global space", worst <= 1e-9 && secs <= 10.0,
            "max |a(Sv,w)|/(|Sv|_a |w|_a) " + fmt(worst) + " (<= 1e-9); " + fmt(secs) + " s");
  }

  {
    const MeshLevel coarse(3), fine(5);
    const auto problem = make_fine_problem(fine, random_field(5, 1.0, 2.5, 31), random_field(5, 0.5, 4.0, 32));
    const auto pi = build_pi(coarse, fine, problem.beta, InterpMode::Weighted);
    std::vector<std::vector<double>> vs;
    for (std::uint64_t t = 0; t < 5; ++t)
      vs.push_back(random_vector(static_cast<std::size_t>(coarse.num_interior()), 400 + t));
    const auto study = decay_study(problem, coarse, pi, vs, {1, 2, 3, 4, 5});
    bool ok = study.gaps.size() == 5;
    double weakest = std::numeric_limits<double>::infinity();
    for (const auto& g : study.gaps) {
      for (std::size_t i = 1; i < g.size(); ++i) ok = ok && g[i] <= g[i - 1];
      weakest = std::min(weakest, g.front() / g.back());
    }
    ok = ok && weakest >= 10.0;
    verdict(6, "corrector decay", ok, "smallest gap reduction ell 1 -> 5 " + fmt(weakest) + " (>= 10), non-increasing");
  }

  {
    const MeshLevel fine(7);
    const auto beta = random_field(6, 0.5, 4.0, 2);
    const auto u = nodal_function(
        fine, [](double x, double y, double) { return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y); },
        0.0);
    const double exact = dot(u, matvec(assemble_mass(fine, fine, beta), u));
    std::vector<double> errs;
    for (int k = 2; k <= 5; ++k) {
      const MeshLevel coarse(k);
      const auto pu = matvec(build_pi(coarse, fine, beta, InterpMode::Weighted).p, u);
      const auto m = assemble_lumped_mass(coarse, fine, beta);
      double b = 0.0;
      for (std::size_t i = 0; i < pu.size(); ++i) b += m[i] * pu[i] * pu[i];
      errs.push_back(std::abs(exact - b));
    }
    double mean = 0.0;
    for (std::size_t i = 1; i < errs.size(); ++i) mean += eoc(errs[i - 1], errs[i]);
    mean /= static_cast<double>(errs.size() - 1);
    verdict(7, "lumped b-form rate", mean >= 1.7,
            "errors " + fmt(errs[0]) + " " + fmt(errs[1]) + " " + fmt(errs[2]) + " " + fmt(errs[3]) + "; mean eoc " +
                fmt(mean) + " (>= 1.7)");
  }

  {
    const MeshLevel mesh(4);
    const auto problem = make_fine_problem(mesh, random_field(4, 1.0, 2.5, 5), random_field(4, 0.5, 4.0, 6));
    const auto basis = build_basis(problem, mesh, build_pi(mesh, mesh, problem.beta, InterpMode::Weighted), 2);
    const auto shape = nodal_function(
        mesh, [](double x, double y, double) { return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y); },
        0.0);
    const auto forcing = separable_forcing(shape, [](double t) { return std::cos(0.5 * std::numbers::pi * t); });
    const auto grid = make_time_grid(1.0, 64);
    LeapfrogOptions opts;
    opts.snapshot_stride = 1;
    const auto lod = leapfrog_lumped(basis, forcing, grid, opts);
    const auto fem = leapfrog_lumped(problem.ops, forcing, grid, opts);
    double traj = lod.snapshots.size() == fem.snapshots.size() ? 0.0 : 1.0;
    for (std::size_t s = 0; s < std::min(lod.snapshots.size(), fem.snapshots.size()); ++s)
      for (std::size_t i = 0; i < lod.snapshots[s].size(); ++i)
        traj = std::max(traj, std::abs(lod.snapshots[s][i] - fem.snapshots[s][i]));

    double modes = 0.0;
    for (auto [kc, kf] : {std::pair{2, 5}, std::pair{3, 6}}) {
      const MeshLevel coarse(kc), fine(kf);
      const auto c = constant_field(2.7);
      const auto w = build_pi(coarse, fine, c, InterpMode::Weighted);
      const auto n = build_pi(coarse, fine, c, InterpMode::Naive);
      modes = std::max(modes, add(w.p, n.p, 1.0, -1.0).max_abs());
    }
    verdict(8, "degenerate cases", traj <= 1e-12 && modes <= 1e-13,
            "coarse=fine trajectory gap " + fmt(traj) + " (<= 1e-12); weighted vs naive for constant beta " + fmt(modes) +
                " (<= 1e-13)");
  }

  {
    const auto t0 = Clock::now();
    const auto suite = oracle::run_suite();
    const double secs = seconds_since(t0);
    std::string bad;
    for (const auto& c : suite)
      if (!c.ok()) bad += " " + c.name + "=" + fmt(c.deviation) + ">" + fmt(c.tolerance);
    verdict(9, "dense oracle comparisons", bad.empty() && secs <= 120.0,
            std::to_string(suite.size()) + " checks in " + fmt(secs) + " s" + (bad.empty() ? "" : ";" + bad));
  }

  // Example 3 feeds the energy criterion too, so run it first.
  auto ex3 = example_defaults("example3");
  ex3.variants = {Variant::MllodWeighted};
  ex3.ells = {4};
  ex3.timing = false;
  ex3.deterministic = true;
  std::fprintf(stderr, "example 3 sweep\n");
  const auto rep3 = run_experiment(ex3, progress);
  emit_report(rep3, fs::path(out) / "example3");
  const auto c3 = curves_of(rep3);

  {
    int rows = 0;
    bool ok = true;
    const std::string low1 = energy_floor(rep1, rows, ok);
    const std::string low3 = energy_floor(rep3, rows, ok);

    // A step 5% above the sharp bound on a multiscale operator.
    const MeshLevel coarse(3), fine(5);
    const auto problem = make_fine_problem(fine, random_field(5, 1.0, 2.5, 51), random_field(5, 0.5, 4.0, 52));
    const auto basis = build_basis(problem, coarse, build_pi(coarse, fine, problem.beta, InterpMode::Weighted), 2);
    const auto cfl = cfl_dt(basis.k, basis.lumped, 0.0, 1.0);
    const int steps = 400;
    const auto check = homogeneous_energy_test(basis.k, basis.lumped, make_time_grid(1.05 * cfl.dt_max * steps, steps));
    ok = ok && rows > 0 && check.exploded;
    verdict(10, "energy and instability detector", ok,
            std::to_string(rows) + " lumped rows, min energy " + low1 + " / " + low3 + " (>= 0); 1.05 dt_max run " +
                (check.exploded ? "exploded at step " + std::to_string(check.steps_run + 1) : "stayed bounded"));
  }

  {
    std::vector<double> e3;
    std::string errs;
    bool within = true;
    std::string ratios;
    for (int h = 1; h <= 6; ++h) {
      const auto* r3 = find(c3, Variant::MllodWeighted, 4, h);
      const auto* r1 = find(c1, Variant::MllodWeighted, 4, h);
      if (!r3 || !r1) {
        within = false;
        continue;
      }
      e3.push_back(r3->rel_err_h1);
      errs += (errs.empty() ? "" : " ") + fmt(r3->rel_err_h1);
      const double q = r3->rel_err_h1 / r1->rel_err_h1;
      within = within && q <= 10.0 && q >= 0.1;
      ratios += (ratios.empty() ? "" : " ") + fmt(q);
    }
    double mean = 0.0;
    if (e3.size() == 6) mean = (eoc(e3[1], e3[2]) + eoc(e3[2], e3[3]) + eoc(e3[3], e3[4])) / 3.0;
    verdict(11, "high contrast", rep3.failed_rows() == 0 && e3.size() == 6 && mean >= 1.7 && within,
            "errors " + errs + "; middle mean eoc " + fmt(mean) + " (>= 1.7); ratio to example 1 " + ratios +
                " (within 10x)");
  }

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
