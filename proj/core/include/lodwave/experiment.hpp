#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lodwave/coeff.hpp"
#include "lodwave/lod.hpp"

namespace lodwave {

enum class Variant { MllodWeighted, LodWeighted, MllodNaive, LodNaive, Fem };

std::string to_string(Variant v);
Variant parse_variant(const std::string& text);
bool is_lumped(Variant v);
InterpMode interp_mode(Variant v);

/// Spatial shape of a separable forcing f(x, t) = shape(x) g(t).
enum class ForcingKind {
  Cosine,     ///< sin(pi x1) sin(pi x2) cos(pi t / 2)
  Quadratic,  ///< sin(3 pi x1) x2 (1 - x2) t^2
};

std::string to_string(ForcingKind f);
ForcingKind parse_forcing(const std::string& text);

struct ExperimentConfig {
  std::string example = "example1";
  int h_min = 1;  ///< coarsest H exponent
  int h_max = 6;  ///< finest H exponent
  std::vector<int> ells{2, 3, 4};
  int naive_ell = 4;  ///< localization of the naive-averaging rows
  int fine = 7;
  int eps = 6;
  std::uint64_t seed = 1;
  double t_final = 1.0;
  double dt_factor = 0.25;
  bool dt_on_fine = true;  ///< dt = factor * h, otherwise factor * H
  double cfl_delta = 0.1;
  std::vector<Variant> variants{Variant::MllodWeighted, Variant::LodWeighted, Variant::MllodNaive,
                                Variant::LodNaive, Variant::Fem};
  ForcingKind forcing = ForcingKind::Cosine;

  // Coefficients: files win over patterns, patterns over random ranges.
  std::string alpha_file;
  std::string beta_file;
  std::string alpha_pattern;
  std::string beta_pattern;
  std::pair<double, double> alpha_range{1.0, 2.5};
  std::pair<double, double> beta_range{0.5, 4.0};
  std::optional<std::pair<double, double>> rescale;  ///< maps both fields onto this range

  int eval_cap = 512;  ///< at most this many error evaluation times per row
  bool timing = false;
  std::vector<int> timing_h{4, 5, 6};
  int timing_repeats = 3;
  int timing_ell = 4;

  std::string out = "lodwave-out";
  std::string cache_dir;  ///< basis cache; empty disables it
  bool deterministic = false;
  int threads = 1;
};

/// Defaults of one of example1 | example2 | example3 | custom.
ExperimentConfig example_defaults(const std::string& example);

/// Applies one `key = value` setting. Throws ConfigError for unknown keys or
/// malformed values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);
/// Reads `key = value` lines ('#' starts a comment) into an ordered list.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);
/// Checks the cross-field invariants; throws ConfigError.
void validate(const ExperimentConfig& config);
/// Replayable `key = value` text of every setting.
std::string echo_config(const ExperimentConfig& config);

struct ErrorRecord {
  std::string example;
  Variant variant = Variant::MllodWeighted;
  int ell = 0;  ///< 0 for the FEM rows
  int h_exponent = 0;
  double rel_err_h1 = 0.0;
  double err_dt_l2 = 0.0;
  std::optional<double> eoc;
  double offline_s = 0.0;
  double online_s = 0.0;
  // Diagnostics.
  double rel_err_energy = 0.0;  ///< relative error in the alpha-energy norm
  double dt = 0.0;
  int steps = 0;
  double cfl_dt_max = 0.0;  ///< lumped schemes only
  std::optional<double> min_energy;  ///< homogeneous energy test, lumped schemes only
  std::int64_t solver_iterations = 0;
  int evaluated = 0;
  bool ok = true;
  std::string message;
};

struct TimingRow {
  int h_exponent = 0;
  double offline_s = 0.0;
  double lumped_s = 0.0;
  double nonlumped_s = 0.0;
  std::int64_t lumped_iterations = 0;
  std::int64_t nonlumped_iterations = 0;
  int steps = 0;
  double speedup() const noexcept { return lumped_s > 0.0 ? nonlumped_s / lumped_s : 0.0; }
};

struct ReferenceInfo {
  int steps = 0;
  std::vector<int> h_exponents;
  double cfl_dt_max = 0.0;
  double online_s = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::uint64_t alpha_digest = 0;
  std::uint64_t beta_digest = 0;
  std::string alpha_provenance;
  std::string beta_provenance;
  std::vector<ErrorRecord> records;
  std::vector<TimingRow> timing;
  std::vector<ReferenceInfo> references;
  std::vector<std::string> notes;
  int failed_rows() const;
};

using ProgressSink = std::function<void(const std::string&)>;

/// Coefficient fields described by the config.
std::pair<CoefficientField, CoefficientField> make_fields(const ExperimentConfig& config);

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressSink& progress = {});
ExperimentReport run_example1(ExperimentConfig config, const ProgressSink& progress = {});
ExperimentReport run_example2(ExperimentConfig config, const ProgressSink& progress = {});
ExperimentReport run_example3(ExperimentConfig config, const ProgressSink& progress = {});
std::vector<TimingRow> timing_study(const ExperimentConfig& config, const ProgressSink& progress = {});

/// Fills eoc between consecutive H exponents of the same (variant, ell) curve.
void fill_eoc(std::vector<ErrorRecord>& records);

/// Writes errors.csv, diagnostics.csv, timing.csv, config.echo.txt and one
/// plot-data file per curve. Throws Error naming the path on I/O failure.
void emit_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace lodwave
