// Command-line front end: runs one example sweep and writes the report files.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "lodwave/error.hpp"
#include "lodwave/experiment.hpp"

namespace {

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Every flag maps onto a config-file key of the same meaning.
const std::vector<Flag> kFlags = {
    {"--hmin", "hmin", "coarsest H exponent (H = 2^-E)"},
    {"--hmax", "hmax", "finest H exponent"},
    {"--ell", "ell", "localization orders, comma separated; 'inf' for global patches"},
    {"--naive-ell", "naive_ell", "localization order of the naive-averaging rows"},
    {"--fine", "fine", "fine mesh exponent (h = 2^-E)"},
    {"--eps", "eps", "coefficient cell exponent (eps = 2^-E)"},
    {"--seed", "seed", "seed of the random coefficients; beta uses seed + 1"},
    {"--variants", "variants", "mllod_weighted,lod_weighted,mllod_naive,lod_naive,fem"},
    {"--alpha-file", "alpha_file", "raster file for alpha ('nx ny' header, then values)"},
    {"--beta-file", "beta_file", "raster file for beta"},
    {"--alpha-pattern", "alpha_pattern", "structured alpha, e.g. checkerboard:block=8,lo=1,hi=18"},
    {"--beta-pattern", "beta_pattern", "structured beta, e.g. stripes:width=4,values=1/18"},
    {"--alpha-range", "alpha_range", "range lo,hi of random alpha"},
    {"--beta-range", "beta_range", "range lo,hi of random beta"},
    {"--rescale", "rescale", "map both fields onto lo,hi ('none' to disable)"},
    {"--t-final", "t_final", "final time T"},
    {"--dt-factor", "dt_factor", "time step factor"},
    {"--dt-rule", "dt_rule", "'h': dt = factor*h, 'H': dt = factor*H"},
    {"--cfl-delta", "cfl_delta", "safety delta of the CFL check"},
    {"--forcing", "forcing", "cosine | quadratic"},
    {"--eval-cap", "eval_cap", "maximum number of error evaluation times per row"},
    {"--timing", "timing", "run the lumped vs non-lumped timing study (true/false)"},
    {"--timing-h", "timing_h", "H exponents of the timing study"},
    {"--timing-repeats", "timing_repeats", "timed repetitions per scheme (minimum is reported)"},
    {"--timing-ell", "timing_ell", "localization order of the timing study"},
    {"--out", "out", "output directory"},
    {"--cache-dir", "cache_dir", "directory for cached multiscale bases (empty: off)"},
    {"--threads", "threads", "worker threads for corrector problems"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mass-lumped LOD wave solver: convergence sweeps and timing study"};
  app.footer(
      "Defaults per example:\n"
      "  example1  random alpha in [1,2.5], beta in [0.5,4], eps 2^-6, h 2^-7, dt = 0.25h, timing on\n"
      "  example2  structured fields in [1,18], quadratic-in-time forcing, dt = 0.15H\n"
      "  example3  example1 fields rescaled to [0.01,100], dt = 0.01H\n"
      "  custom    same as example1 without timing\n"
      "Common: T = 1, H = 2^-1..2^-6, ell = 2,3,4, naive rows at ell 4, seed 1, eval cap 512.\n"
      "Exit codes: 0 success, 2 some rows failed, 1 configuration or fatal error.");

  std::string example;
  std::string config_file;
  bool deterministic = false;
  bool quiet = false;
  app.add_option("example", example, "example1 | example2 | example3 | custom");
  app.add_option("--config", config_file, "file of 'key = value' lines; flags override it");
  app.add_flag("--deterministic", deterministic, "byte-reproducible output (wall times omitted from errors.csv)");
  app.add_flag("-q,--quiet", quiet, "no progress output");
  std::vector<std::string> values(kFlags.size());
  std::vector<CLI::Option*> options;
  for (std::size_t i = 0; i < kFlags.size(); ++i) {
    options.push_back(app.add_option(kFlags[i].name, values[i], kFlags[i].help));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  lodwave::ExperimentReport report;
  try {
    std::vector<std::pair<std::string, std::string>> file_settings;
    if (!config_file.empty()) file_settings = lodwave::read_config_file(config_file);
    if (example.empty()) {
      for (const auto& [k, v] : file_settings) {
        if (k == "example") example = v;
      }
    }
    if (example.empty()) throw lodwave::ConfigError("no example given (positional argument or 'example' key)");

    lodwave::ExperimentConfig config = lodwave::example_defaults(example);
    for (const auto& [k, v] : file_settings) {
      if (k != "example") lodwave::apply_setting(config, k, v);
    }
    for (std::size_t i = 0; i < kFlags.size(); ++i) {
      if (options[i]->count() > 0) lodwave::apply_setting(config, kFlags[i].key, values[i]);
    }
    if (deterministic) config.deterministic = true;
    lodwave::validate(config);

    lodwave::ProgressSink progress;
    if (!quiet) progress = [](const std::string& m) { std::cerr << m << std::endl; };
    report = lodwave::run_experiment(config, progress);
    lodwave::emit_report(report, config.out);
    if (!quiet) std::cerr << "wrote " << report.records.size() << " rows to " << config.out << '\n';
  } catch (const std::exception& e) {
    std::cerr << "lodwave: " << e.what() << '\n';
    return 1;
  }
  if (report.failed_rows() > 0) {
    std::cerr << "lodwave: " << report.failed_rows() << " row(s) failed; see diagnostics.csv\n";
    return 2;
  }
  return 0;
}
