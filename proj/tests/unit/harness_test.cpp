#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "lodwave/error.hpp"
#include "lodwave/experiment.hpp"

using namespace lodwave;
namespace fs = std::filesystem;

namespace {

fs::path tmp_dir(const std::string& name) {
  const fs::path dir = fs::path(LODWAVE_TEST_TMP) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

// Small sweep that exercises every variant in a few seconds.
ExperimentConfig small_config() {
  auto c = example_defaults("custom");
  c.fine = 4;
  c.eps = 3;
  c.h_min = 1;
  c.h_max = 3;
  c.ells = {1, 2};
  c.naive_ell = 2;
  c.timing = false;
  c.deterministic = true;
  return c;
}

}  // namespace

TEST_CASE("example defaults") {
  const auto e1 = example_defaults("example1");
  CHECK(e1.fine == 7);
  CHECK(e1.eps == 6);
  CHECK(e1.h_min == 1);
  CHECK(e1.h_max == 6);
  CHECK(e1.ells == std::vector<int>{2, 3, 4});
  CHECK(e1.dt_factor == 0.25);
  CHECK(e1.dt_on_fine);
  CHECK(e1.alpha_range == std::pair{1.0, 2.5});
  CHECK(e1.beta_range == std::pair{0.5, 4.0});
  const auto e2 = example_defaults("example2");
  CHECK(e2.dt_factor == 0.15);
  CHECK_FALSE(e2.dt_on_fine);
  CHECK(e2.forcing == ForcingKind::Quadratic);
  const auto e3 = example_defaults("example3");
  CHECK(e3.dt_factor == 0.01);
  REQUIRE(e3.rescale.has_value());
  CHECK(*e3.rescale == std::pair{0.01, 100.0});
  CHECK_THROWS_AS(example_defaults("example4"), ConfigError);
}

TEST_CASE("settings") {
  auto c = example_defaults("example1");
  apply_setting(c, "hmin", "2");
  apply_setting(c, "ell", "2,inf");
  apply_setting(c, "dt-rule", "H");
  apply_setting(c, "variants", "fem,mllod_naive");
  apply_setting(c, "rescale", "0.5,2");
  CHECK(c.h_min == 2);
  CHECK(c.ells == std::vector<int>{2, std::numeric_limits<int>::max()});
  CHECK_FALSE(c.dt_on_fine);
  CHECK(c.variants == std::vector<Variant>{Variant::Fem, Variant::MllodNaive});
  CHECK(c.rescale == std::pair{0.5, 2.0});
  apply_setting(c, "rescale", "none");
  CHECK_FALSE(c.rescale.has_value());
  CHECK_THROWS_AS(apply_setting(c, "colour", "blue"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "hmin", "two"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "variants", "mllod"), ConfigError);
}

TEST_CASE("validation") {
  auto c = small_config();
  CHECK_NOTHROW(validate(c));
  c.h_max = 5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config();
  c.eps = 5;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = small_config();
  c.ells = {0};
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("config file and echo replay") {
  const auto dir = tmp_dir("config");
  {
    std::ofstream out(dir / "run.cfg");
    out << "# comment line\nexample = example2\nhmax = 4   # trailing comment\n\nell = 3\n";
  }
  const auto kv = read_config_file(dir / "run.cfg");
  REQUIRE(kv.size() == 3);
  CHECK(kv[0] == std::pair<std::string, std::string>{"example", "example2"});
  CHECK(kv[1].second == "4");

  auto c = example_defaults("example3");
  c.seed = 99;
  c.ells = {2, std::numeric_limits<int>::max()};
  const auto text = echo_config(c);
  {
    std::ofstream out(dir / "echo.cfg");
    out << text;
  }
  auto replay = example_defaults("custom");
  for (const auto& [k, v] : read_config_file(dir / "echo.cfg")) apply_setting(replay, k, v);
  CHECK(echo_config(replay) == text);
}

TEST_CASE("sweep, report files and determinism") {
  const auto c = small_config();
  const auto report = run_experiment(c);
  CHECK(report.failed_rows() == 0);
  // 3 H values x (2 ell x 2 weighted variants + 2 naive + 1 FEM)
  CHECK(report.records.size() == 21);
  CHECK(report.references.size() >= 1);
  for (const auto& r : report.records) {
    CHECK(r.rel_err_h1 >= 0.0);
    CHECK(r.err_dt_l2 >= 0.0);
    if (is_lumped(r.variant)) CHECK(r.solver_iterations == 0);
    else CHECK(r.solver_iterations > 0);
    if (is_lumped(r.variant)) {
      REQUIRE(r.min_energy.has_value());
      CHECK(*r.min_energy >= 0.0);
    }
    CHECK(r.eoc.has_value() == (r.h_exponent > c.h_min));
  }
  CHECK(std::is_sorted(report.records.begin(), report.records.end(), [](const ErrorRecord& a, const ErrorRecord& b) {
    return std::tuple(static_cast<int>(a.variant), a.ell, a.h_exponent) <
           std::tuple(static_cast<int>(b.variant), b.ell, b.h_exponent);
  }));

  const auto dir = tmp_dir("report-a");
  emit_report(report, dir);
  const auto rows = lines(dir / "errors.csv");
  CHECK(rows.front() == "example,variant,ell,H,rel_err_H1,err_dt_L2,eoc,offline_s,online_s");
  CHECK(rows.size() == report.records.size() + 1);
  CHECK(fs::exists(dir / "timing.csv"));
  CHECK(fs::exists(dir / "config.echo.txt"));
  CHECK(fs::exists(dir / "diagnostics.csv"));

  const auto plot = lines(dir / "plot_mllod_weighted_ell2.dat");
  REQUIRE(plot.size() == 4);
  CHECK(plot[0][0] == '#');
  double prev = 2.0;
  for (std::size_t i = 1; i < plot.size(); ++i) {
    const double h = std::stod(plot[i].substr(0, plot[i].find(' ')));
    CHECK(h < prev);
    prev = h;
  }
  CHECK(fs::exists(dir / "plot_fem.dat"));

  const auto again = tmp_dir("report-b");
  emit_report(run_experiment(c), again);
  CHECK(slurp(dir / "errors.csv") == slurp(again / "errors.csv"));
}

TEST_CASE("eoc between consecutive levels") {
  std::vector<ErrorRecord> recs(3);
  for (int i = 0; i < 3; ++i) {
    recs[static_cast<std::size_t>(i)].example = "x";
    recs[static_cast<std::size_t>(i)].h_exponent = i + 1;
    recs[static_cast<std::size_t>(i)].rel_err_h1 = 0.16 / (1 << (2 * i));
  }
  recs[2].h_exponent = 4;  // gap: no eoc for this one
  fill_eoc(recs);
  CHECK_FALSE(recs[0].eoc.has_value());
  REQUIRE(recs[1].eoc.has_value());
  CHECK(*recs[1].eoc == doctest::Approx(2.0));
  CHECK_FALSE(recs[2].eoc.has_value());
}

TEST_CASE("report directory errors name the path") {
  ExperimentReport report;
  report.config = small_config();
  const auto dir = tmp_dir("blocked");
  { std::ofstream(dir / "file") << "x"; }
  try {
    emit_report(report, dir / "file" / "sub");
    FAIL("expected an I/O error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("file") != std::string::npos);
  }
}

#ifdef LODWAVE_CLI
namespace {
int run_cli(const std::string& args) {
  const std::string cmd = std::string(LODWAVE_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_CASE("command line exit codes and echo replay") {
  const auto dir = tmp_dir("cli");
  const std::string small =
      "custom --fine 4 --eps 3 --hmin 1 --hmax 2 --ell 1 --naive-ell 1 --variants mllod_weighted,fem --timing false -q "
      "--deterministic";
  CHECK(run_cli(small + " --out " + (dir / "a").string()) == 0);
  CHECK(fs::exists(dir / "a" / "errors.csv"));

  CHECK(run_cli("--config " + (dir / "a" / "config.echo.txt").string() + " --deterministic -q --out " +
                (dir / "b").string()) == 0);
  CHECK(slurp(dir / "a" / "errors.csv") == slurp(dir / "b" / "errors.csv"));

  CHECK(run_cli("custom --hmax 9 --fine 4 -q --out " + (dir / "c").string()) == 1);
  CHECK(run_cli("custom --colour blue -q") == 1);
  CHECK(run_cli("example7 -q") == 1);

  // A coarse step far above the stability limit makes the rows blow up.
  CHECK(run_cli("custom --fine 4 --eps 3 --hmin 2 --hmax 2 --ell 1 --variants mllod_weighted --dt-rule H --dt-factor 2 "
                "--t-final 20 --timing false -q --out " +
                (dir / "d").string()) == 2);
}
#endif
