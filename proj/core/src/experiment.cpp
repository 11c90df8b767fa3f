#include "lodwave/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "lodwave/dynamics.hpp"
#include "lodwave/error.hpp"
#include "lodwave/metrics.hpp"

namespace lodwave {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::MllodWeighted: return "mllod_weighted";
    case Variant::LodWeighted: return "lod_weighted";
    case Variant::MllodNaive: return "mllod_naive";
    case Variant::LodNaive: return "lod_naive";
    case Variant::Fem: return "fem";
  }
  return "?";
}

Variant parse_variant(const std::string& text) {
  for (Variant v : {Variant::MllodWeighted, Variant::LodWeighted, Variant::MllodNaive, Variant::LodNaive, Variant::Fem}) {
    if (to_string(v) == text) return v;
  }
  throw ConfigError("unknown variant '" + text + "'");
}

bool is_lumped(Variant v) { return v == Variant::MllodWeighted || v == Variant::MllodNaive || v == Variant::Fem; }

InterpMode interp_mode(Variant v) {
  return v == Variant::MllodNaive || v == Variant::LodNaive ? InterpMode::Naive : InterpMode::Weighted;
}

std::string to_string(ForcingKind f) { return f == ForcingKind::Cosine ? "cosine" : "quadratic"; }

ForcingKind parse_forcing(const std::string& text) {
  if (text == "cosine") return ForcingKind::Cosine;
  if (text == "quadratic") return ForcingKind::Quadratic;
  throw ConfigError("unknown forcing '" + text + "'");
}

int ExperimentReport::failed_rows() const {
  return static_cast<int>(std::count_if(records.begin(), records.end(), [](const ErrorRecord& r) { return !r.ok; }));
}

// ---------------------------------------------------------------------------
// Configuration

ExperimentConfig example_defaults(const std::string& example) {
  ExperimentConfig c;
  c.example = example;
  if (example == "example1") {
    c.timing = true;
  } else if (example == "example2") {
    c.dt_factor = 0.15;
    c.dt_on_fine = false;
    c.forcing = ForcingKind::Quadratic;
    c.alpha_pattern = "inclusions:count=60,size=3,background=1,value=18,seed=5";
    c.beta_pattern = "stripes:width=4,values=1/18";
  } else if (example == "example3") {
    c.dt_factor = 0.01;
    c.dt_on_fine = false;
    c.rescale = std::pair{0.01, 100.0};
  } else if (example != "custom") {
    throw ConfigError("unknown example '" + example + "' (expected example1, example2, example3 or custom)");
  }
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("invalid value '" + text + "' for " + key);
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("invalid boolean '" + text + "' for " + key);
}

int parse_ell(const std::string& key, const std::string& text) {
  if (trim(text) == "inf") return kGlobalPatch;
  return parse_number<int>(key, text);
}

std::pair<double, double> parse_range(const std::string& key, const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError(key + " needs 'lo,hi', got '" + text + "'");
  return {parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1])};
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + ell_label(v[i]);
  return s;
}

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string v = trim(value);
  if (key == "example") {
    example_defaults(v);  // validates the name
    c.example = v;
  } else if (key == "hmin") {
    c.h_min = parse_number<int>(key, v);
  } else if (key == "hmax") {
    c.h_max = parse_number<int>(key, v);
  } else if (key == "ell") {
    c.ells.clear();
    for (const auto& p : split(v, ',')) c.ells.push_back(parse_ell(key, p));
  } else if (key == "naive_ell") {
    c.naive_ell = parse_ell(key, v);
  } else if (key == "fine") {
    c.fine = parse_number<int>(key, v);
  } else if (key == "eps") {
    c.eps = parse_number<int>(key, v);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, v);
  } else if (key == "t_final") {
    c.t_final = parse_number<double>(key, v);
  } else if (key == "dt_factor") {
    c.dt_factor = parse_number<double>(key, v);
  } else if (key == "dt_rule") {
    if (v != "h" && v != "H") throw ConfigError("dt_rule must be 'h' or 'H'");
    c.dt_on_fine = v == "h";
  } else if (key == "cfl_delta") {
    c.cfl_delta = parse_number<double>(key, v);
  } else if (key == "variants") {
    c.variants.clear();
    for (const auto& p : split(v, ',')) c.variants.push_back(parse_variant(p));
  } else if (key == "forcing") {
    c.forcing = parse_forcing(v);
  } else if (key == "alpha_file") {
    c.alpha_file = v;
  } else if (key == "beta_file") {
    c.beta_file = v;
  } else if (key == "alpha_pattern") {
    if (!v.empty()) parse_pattern(v);
    c.alpha_pattern = v;
  } else if (key == "beta_pattern") {
    if (!v.empty()) parse_pattern(v);
    c.beta_pattern = v;
  } else if (key == "alpha_range") {
    c.alpha_range = parse_range(key, v);
  } else if (key == "beta_range") {
    c.beta_range = parse_range(key, v);
  } else if (key == "rescale") {
    if (v == "none" || v.empty()) {
      c.rescale.reset();
    } else {
      c.rescale = parse_range(key, v);
    }
  } else if (key == "eval_cap") {
    c.eval_cap = parse_number<int>(key, v);
  } else if (key == "timing") {
    c.timing = parse_bool(key, v);
  } else if (key == "timing_h") {
    c.timing_h.clear();
    for (const auto& p : split(v, ',')) c.timing_h.push_back(parse_number<int>(key, p));
  } else if (key == "timing_repeats") {
    c.timing_repeats = parse_number<int>(key, v);
  } else if (key == "timing_ell") {
    c.timing_ell = parse_ell(key, v);
  } else if (key == "out") {
    c.out = v;
  } else if (key == "cache_dir") {
    c.cache_dir = v;
  } else if (key == "deterministic") {
    c.deterministic = parse_bool(key, v);
  } else if (key == "threads") {
    c.threads = parse_number<int>(key, v);
  } else {
    throw ConfigError("unknown setting '" + raw_key + "'");
  }
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

namespace {
void check_timing_levels(const ExperimentConfig& c) {
  for (int k : c.timing_h) {
    if (k < 1 || k > c.fine) throw ConfigError("timing H exponents must lie in [1, fine]");
  }
}
}  // namespace

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.fine < 1 || c.fine > MeshLevel::kMaxExponent) fail("fine exponent must lie in [1, 14]");
  if (c.h_min < 1 || c.h_max < c.h_min) fail("need 1 <= hmin <= hmax");
  if (c.h_max > c.fine) fail("fine exponent must be >= hmax");
  if (c.alpha_file.empty() || c.beta_file.empty()) {
    if (c.eps < 0 || c.eps > c.fine) fail("eps exponent must lie in [0, fine]");
  }
  if (c.ells.empty()) fail("ell list is empty");
  for (int l : c.ells) {
    if (l < 1) fail("localization orders must be >= 1");
  }
  if (c.naive_ell < 1 || c.timing_ell < 1) fail("localization orders must be >= 1");
  if (!(c.t_final > 0.0)) fail("t_final must be positive");
  if (!(c.dt_factor > 0.0)) fail("dt_factor must be positive");
  if (!(c.cfl_delta >= 0.0 && c.cfl_delta < 1.0)) fail("cfl_delta must lie in [0, 1)");
  if (c.variants.empty()) fail("variant list is empty");
  for (const auto& [name, r] : {std::pair{"alpha_range", c.alpha_range}, std::pair{"beta_range", c.beta_range}}) {
    if (!(r.first > 0.0 && r.first < r.second)) fail(std::string(name) + " needs 0 < lo < hi");
  }
  if (c.rescale && !(c.rescale->first > 0.0 && c.rescale->first < c.rescale->second)) fail("rescale needs 0 < lo < hi");
  if (c.eval_cap < 2) fail("eval_cap must be >= 2");
  if (c.threads < 1) fail("threads must be >= 1");
  if (c.timing_repeats < 1) fail("timing_repeats must be >= 1");
  if (c.timing) check_timing_levels(c);
  if (c.out.empty()) fail("output directory is empty");
}

std::string echo_config(const ExperimentConfig& c) {
  std::ostringstream o;
  std::string variants;
  for (std::size_t i = 0; i < c.variants.size(); ++i) variants += (i ? "," : "") + to_string(c.variants[i]);
  std::string timing_h;
  for (std::size_t i = 0; i < c.timing_h.size(); ++i) timing_h += (i ? "," : "") + std::to_string(c.timing_h[i]);
  o << "example = " << c.example << '\n'
    << "hmin = " << c.h_min << '\n'
    << "hmax = " << c.h_max << '\n'
    << "ell = " << join_ints(c.ells) << '\n'
    << "naive_ell = " << ell_label(c.naive_ell) << '\n'
    << "fine = " << c.fine << '\n'
    << "eps = " << c.eps << '\n'
    << "seed = " << c.seed << '\n'
    << "t_final = " << num(c.t_final) << '\n'
    << "dt_factor = " << num(c.dt_factor) << '\n'
    << "dt_rule = " << (c.dt_on_fine ? "h" : "H") << '\n'
    << "cfl_delta = " << num(c.cfl_delta) << '\n'
    << "variants = " << variants << '\n'
    << "forcing = " << to_string(c.forcing) << '\n'
    << "alpha_file = " << c.alpha_file << '\n'
    << "beta_file = " << c.beta_file << '\n'
    << "alpha_pattern = " << c.alpha_pattern << '\n'
    << "beta_pattern = " << c.beta_pattern << '\n'
    << "alpha_range = " << num(c.alpha_range.first) << ',' << num(c.alpha_range.second) << '\n'
    << "beta_range = " << num(c.beta_range.first) << ',' << num(c.beta_range.second) << '\n'
    << "rescale = " << (c.rescale ? num(c.rescale->first) + "," + num(c.rescale->second) : std::string("none")) << '\n'
    << "eval_cap = " << c.eval_cap << '\n'
    << "timing = " << (c.timing ? "true" : "false") << '\n'
    << "timing_h = " << timing_h << '\n'
    << "timing_repeats = " << c.timing_repeats << '\n'
    << "timing_ell = " << ell_label(c.timing_ell) << '\n'
    << "out = " << c.out << '\n'
    << "cache_dir = " << c.cache_dir << '\n'
    << "deterministic = " << (c.deterministic ? "true" : "false") << '\n'
    << "threads = " << c.threads << '\n';
  return o.str();
}

// ---------------------------------------------------------------------------
// Fields and forcing

std::pair<CoefficientField, CoefficientField> make_fields(const ExperimentConfig& c) {
  auto make = [&](const std::string& file, const std::string& pattern, std::pair<double, double> range,
                  std::uint64_t seed) {
    if (!file.empty()) return load_field(file);
    if (!pattern.empty()) return structured_field(c.eps, parse_pattern(pattern));
    return random_field(c.eps, range.first, range.second, seed);
  };
  CoefficientField alpha = make(c.alpha_file, c.alpha_pattern, c.alpha_range, c.seed);
  CoefficientField beta = make(c.beta_file, c.beta_pattern, c.beta_range, c.seed + 1);
  if (c.rescale) {
    alpha = rescale_field(alpha, c.rescale->first, c.rescale->second);
    beta = rescale_field(beta, c.rescale->first, c.rescale->second);
  }
  for (const auto* f : {&alpha, &beta}) {
    if (f->eps_exponent > c.fine) {
      throw ConfigError("coefficient resolution 2^-" + std::to_string(f->eps_exponent) +
                        " is finer than the fine mesh 2^-" + std::to_string(c.fine));
    }
  }
  return {std::move(alpha), std::move(beta)};
}

namespace {

double shape_value(ForcingKind kind, double x, double y) {
  using std::numbers::pi;
  if (kind == ForcingKind::Cosine) return std::sin(pi * x) * std::sin(pi * y);
  return std::sin(3.0 * pi * x) * y * (1.0 - y);
}

std::function<double(double)> time_factor(ForcingKind kind) {
  if (kind == ForcingKind::Cosine) return [](double t) { return std::cos(0.5 * std::numbers::pi * t); };
  return [](double t) { return t * t; };
}

std::vector<double> shape_on(const MeshLevel& mesh, ForcingKind kind) {
  return nodal_function(mesh, [kind](double x, double y, double) { return shape_value(kind, x, y); }, 0.0);
}

double step_for(const ExperimentConfig& c, int h_exponent) {
  return c.dt_factor * std::ldexp(1.0, -(c.dt_on_fine ? c.fine : h_exponent));
}

struct Emitter {
  const ProgressSink& sink;
  void operator()(const std::string& m) const {
    if (sink) sink(m);
  }
};

/// Basis for (H, mode, ell), optionally through the on-disk cache.
MultiscaleBasis obtain_basis(const ExperimentConfig& c, const FineProblem& problem, const MeshLevel& coarse,
                             const InterpOperator& pi, int ell, bool consistent) {
  LodOptions opts;
  opts.threads = c.threads;
  opts.consistent_mass = consistent;
  if (c.cache_dir.empty()) return build_basis(problem, coarse, pi, ell, opts);
  MultiscaleBasis b;
  b.coarse_exponent = coarse.exponent();
  b.fine_exponent = problem.fine.exponent();
  b.ell = ell;
  b.mode = pi.mode;
  const BasisKey key = basis_key(problem, b);
  const auto path = basis_cache_path(c.cache_dir, key);
  if (load_basis(path, key, b) && (!consistent || b.m_ms.rows() > 0)) return b;
  b = build_basis(problem, coarse, pi, ell, opts);
  std::filesystem::create_directories(c.cache_dir);
  save_basis(b, key, path);
  return b;
}

struct RowContext {
  const ExperimentConfig& config;
  const FineProblem& problem;
  const NormEvaluator& fine_norms;
  const std::vector<double>& fine_shape;
  const ReferenceSolution& reference;
};

ErrorRecord run_row(const RowContext& ctx, const MeshLevel& coarse, const InterpOperator& pi_mode, const MultiscaleBasis& basis, Variant variant, int ell,
                    const NormEvaluator& coarse_norms) {
  const ExperimentConfig& c = ctx.config;
  ErrorRecord rec;
  rec.example = c.example;
  rec.variant = variant;
  rec.ell = variant == Variant::Fem ? 0 : ell;
  rec.h_exponent = coarse.exponent();
  rec.offline_s = basis.offline_seconds;
  try {
    const int key = coarse.exponent();
    const TimeGrid grid = make_time_grid(c.t_final, ctx.reference.probe(key).coarse_steps);
    rec.dt = grid.dt();
    rec.steps = grid.steps;

    std::vector<double> shape;
    if (variant == Variant::Fem) {
      shape = shape_on(coarse, c.forcing);
    } else if (is_lumped(variant)) {
      shape = matvec(pi_mode.p, ctx.fine_shape);
    } else {
      shape = matvec_transpose(basis.b, matvec(ctx.problem.ops.mass, ctx.fine_shape));
    }
    const Forcing forcing = separable_forcing(std::move(shape), time_factor(c.forcing));

    ErrorAccumulator acc(ctx.reference, key, basis.b, ctx.fine_norms, coarse_norms, grid.dt(),
                         &ctx.problem.ops.stiffness);
    LeapfrogOptions opts;
    opts.observer = acc.observer();
    WaveTrajectory traj;
    if (is_lumped(variant)) {
      const CflResult cfl = cfl_dt(basis.k, basis.lumped, c.cfl_delta, c.t_final);
      rec.cfl_dt_max = cfl.dt_max;
      opts.dt_max = cfl.dt_max;
      opts.allow_unstable = true;
      if (grid.dt() > cfl.dt_max) rec.message = "dt above CFL bound " + num(cfl.dt_max) + "; ";
      rec.min_energy = homogeneous_energy_test(basis.k, basis.lumped, grid).min_energy;
      traj = leapfrog_lumped(basis, forcing, grid, opts);
    } else {
      traj = leapfrog_consistent(basis.m_ms, basis.k, forcing, grid, CgOptions{1e-8, 10000, true}, opts);
    }
    rec.online_s = traj.online_seconds;
    rec.solver_iterations = traj.solver_iterations;
    const ErrorValues ev = acc.result();
    rec.rel_err_h1 = ev.rel_err_h1;
    rec.err_dt_l2 = ev.err_dt_l2;
    rec.rel_err_energy = ev.rel_err_energy;
    rec.evaluated = ev.evaluated;
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.rel_err_h1 = std::numeric_limits<double>::quiet_NaN();
    rec.err_dt_l2 = std::numeric_limits<double>::quiet_NaN();
    rec.message += e.what();
  }
  return rec;
}

int variant_rank(Variant v) { return static_cast<int>(v); }

}  // namespace

void fill_eoc(std::vector<ErrorRecord>& records) {
  std::map<std::tuple<std::string, int, int, int>, ErrorRecord*> index;
  for (auto& r : records) index[{r.example, variant_rank(r.variant), r.ell, r.h_exponent}] = &r;
  for (auto& r : records) {
    r.eoc.reset();
    const auto it = index.find({r.example, variant_rank(r.variant), r.ell, r.h_exponent - 1});
    if (it == index.end()) continue;
    const ErrorRecord& prev = *it->second;
    if (r.ok && prev.ok && r.rel_err_h1 > 0.0 && prev.rel_err_h1 > 0.0) r.eoc = eoc(prev.rel_err_h1, r.rel_err_h1);
  }
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressSink& progress) {
  validate(config);
  const Emitter say{progress};
  ExperimentReport report;
  report.config = config;

  auto [alpha, beta] = make_fields(config);
  report.alpha_digest = field_digest(alpha);
  report.beta_digest = field_digest(beta);
  report.alpha_provenance = alpha.provenance;
  report.beta_provenance = beta.provenance;

  const MeshLevel fine(config.fine);
  const FineProblem problem = make_fine_problem(fine, alpha, beta);
  const NormEvaluator fine_norms(fine);
  const std::vector<double> fine_shape = shape_on(fine, config.forcing);
  const Forcing fine_forcing = separable_forcing(fine_shape, time_factor(config.forcing));

  // Coarse step counts and the reference plan.
  std::vector<int> levels;
  std::map<int, int> coarse_steps;
  for (int k = config.h_min; k <= config.h_max; ++k) {
    levels.push_back(k);
    coarse_steps[k] = grid_for_step(config.t_final, step_for(config, k)).steps;
  }
  const CflResult fine_cfl = cfl_dt(problem.ops.stiffness, problem.ops.lumped, config.cfl_delta, config.t_final);
  const int n_stable = fine_cfl.grid.steps;
  auto ref_steps_for = [&](std::int64_t n) { return n * ((n_stable + n - 1) / n); };

  std::vector<std::vector<int>> groups;
  {
    std::int64_t l = 1;
    int max_steps = 0;
    for (int k : levels) {
      l = std::lcm(l, static_cast<std::int64_t>(coarse_steps[k]));
      max_steps = std::max(max_steps, coarse_steps[k]);
      if (l > (std::int64_t{1} << 40)) break;
    }
    if (l <= (std::int64_t{1} << 40) && ref_steps_for(l) <= 4 * std::int64_t{std::max(n_stable, max_steps)}) {
      groups.push_back(levels);
    } else {
      std::map<int, std::vector<int>> by_steps;
      for (int k : levels) by_steps[coarse_steps[k]].push_back(k);
      for (auto& [n, ks] : by_steps) groups.push_back(ks);
    }
  }

  std::map<int, InterpOperator> pi_weighted;
  for (int k : levels) pi_weighted.emplace(k, build_pi(MeshLevel(k), fine, problem.beta_fine, InterpMode::Weighted));

  for (const auto& group : groups) {
    std::int64_t l = 1;
    for (int k : group) l = std::lcm(l, static_cast<std::int64_t>(coarse_steps[k]));
    const std::int64_t n_ref = ref_steps_for(l);
    if (n_ref > std::numeric_limits<int>::max()) throw ConfigError("reference step count overflows");
    const TimeGrid ref_grid = make_time_grid(config.t_final, static_cast<int>(n_ref));
    std::vector<ReferenceProbe> probes;
    for (int k : group) {
      probes.push_back({k, coarse_steps[k], evaluation_stride(coarse_steps[k], config.eval_cap), &pi_weighted.at(k).p});
    }
    say("reference: " + std::to_string(ref_grid.steps) + " fine steps (stable limit " + std::to_string(n_stable) + ")");
    const ReferenceSolution reference = record_reference(problem.ops, fine_forcing, ref_grid, probes);
    report.references.push_back({ref_grid.steps, group, fine_cfl.dt_max, reference.online_seconds});
    const RowContext ctx{config, problem, fine_norms, fine_shape, reference};

    for (int k : group) {
      const MeshLevel coarse(k);
      const NormEvaluator coarse_norms(coarse);
      const InterpOperator& pw = pi_weighted.at(k);
      std::unique_ptr<InterpOperator> pn;

      // (mode, ell) -> variants sharing one basis.
      std::map<std::pair<int, int>, std::vector<Variant>> plan;
      for (Variant v : config.variants) {
        if (v == Variant::Fem) {
          plan[{-1, 0}].push_back(v);
        } else if (interp_mode(v) == InterpMode::Weighted) {
          for (int ell : config.ells) plan[{0, ell}].push_back(v);
        } else {
          plan[{1, config.naive_ell}].push_back(v);
        }
      }
      for (const auto& [spec, vs] : plan) {
        const bool consistent = std::any_of(vs.begin(), vs.end(), [](Variant v) { return !is_lumped(v); });
        const int ell = spec.second;
        MultiscaleBasis basis;
        const InterpOperator* pm = &pw;
        try {
          if (spec.first == -1) {
            basis = fem_basis(problem, coarse, false);
          } else {
            if (spec.first == 1) {
              if (!pn) pn = std::make_unique<InterpOperator>(build_pi(coarse, fine, problem.beta_fine, InterpMode::Naive));
              pm = pn.get();
            }
            basis = obtain_basis(config, problem, coarse, *pm, ell, consistent);
          }
        } catch (const std::exception& e) {
          for (Variant v : vs) {
            ErrorRecord rec;
            rec.example = config.example;
            rec.variant = v;
            rec.ell = v == Variant::Fem ? 0 : ell;
            rec.h_exponent = k;
            rec.ok = false;
            rec.rel_err_h1 = rec.err_dt_l2 = std::numeric_limits<double>::quiet_NaN();
            rec.message = e.what();
            report.records.push_back(rec);
            say("row failed: " + to_string(v) + " H=2^-" + std::to_string(k) + ": " + e.what());
          }
          continue;
        }
        for (Variant v : vs) {
          ErrorRecord rec = run_row(ctx, coarse, *pm, basis, v, ell, coarse_norms);
          say(to_string(v) + " ell=" + ell_label(rec.ell) + " H=2^-" + std::to_string(k) + ": " +
              (rec.ok ? "rel_err_H1=" + num(rec.rel_err_h1) : "FAILED " + rec.message));
          report.records.push_back(std::move(rec));
        }
      }
    }
  }

  std::stable_sort(report.records.begin(), report.records.end(), [](const ErrorRecord& a, const ErrorRecord& b) {
    return std::tuple(variant_rank(a.variant), a.ell, a.h_exponent) <
           std::tuple(variant_rank(b.variant), b.ell, b.h_exponent);
  });
  fill_eoc(report.records);
  report.notes.push_back("rel_err_H1 = max_n ||u_ref - B u||_1 / max_n ||u_ref||_1 over the evaluation steps");
  report.notes.push_back("online_s in errors.csv includes streaming error evaluation; timing.csv times the bare loop");

  if (config.timing) report.timing = timing_study(config, progress);
  return report;
}

ExperimentReport run_example1(ExperimentConfig config, const ProgressSink& progress) {
  config.example = "example1";
  return run_experiment(config, progress);
}

ExperimentReport run_example2(ExperimentConfig config, const ProgressSink& progress) {
  config.example = "example2";
  return run_experiment(config, progress);
}

ExperimentReport run_example3(ExperimentConfig config, const ProgressSink& progress) {
  config.example = "example3";
  return run_experiment(config, progress);
}

std::vector<TimingRow> timing_study(const ExperimentConfig& config, const ProgressSink& progress) {
  validate(config);
  check_timing_levels(config);
  const Emitter say{progress};
  auto [alpha, beta] = make_fields(config);
  const MeshLevel fine(config.fine);
  const FineProblem problem = make_fine_problem(fine, alpha, beta);
  const std::vector<double> fine_shape = shape_on(fine, config.forcing);

  std::vector<TimingRow> rows;
  for (int k : config.timing_h) {
    const MeshLevel coarse(k);
    const InterpOperator pi = build_pi(coarse, fine, problem.beta_fine, InterpMode::Weighted);
    ExperimentConfig serial = config;
    serial.threads = 1;
    const MultiscaleBasis basis = obtain_basis(serial, problem, coarse, pi, config.timing_ell, true);
    const TimeGrid grid = grid_for_step(config.t_final, step_for(config, k));
    const Forcing lumped_f = separable_forcing(matvec(pi.p, fine_shape), time_factor(config.forcing));
    const Forcing consistent_f = separable_forcing(
        matvec_transpose(basis.b, matvec(problem.ops.mass, fine_shape)), time_factor(config.forcing));
    const CgOptions cg{1e-8, 10000, true};

    // Warm-up on a short horizon with the same step.
    const int warm = std::min(grid.steps, 8);
    const TimeGrid warm_grid{grid.dt() * warm, warm};
    leapfrog_lumped(basis, lumped_f, warm_grid);
    leapfrog_consistent(basis.m_ms, basis.k, consistent_f, warm_grid, cg);

    TimingRow row;
    row.h_exponent = k;
    row.steps = grid.steps;
    row.offline_s = basis.offline_seconds;
    row.lumped_s = std::numeric_limits<double>::infinity();
    row.nonlumped_s = std::numeric_limits<double>::infinity();
    for (int rep = 0; rep < config.timing_repeats; ++rep) {
      const WaveTrajectory a = leapfrog_lumped(basis, lumped_f, grid);
      row.lumped_s = std::min(row.lumped_s, a.online_seconds);
      row.lumped_iterations = a.solver_iterations;
      const WaveTrajectory b = leapfrog_consistent(basis.m_ms, basis.k, consistent_f, grid, cg);
      row.nonlumped_s = std::min(row.nonlumped_s, b.online_seconds);
      row.nonlumped_iterations = b.solver_iterations;
    }
    say("timing H=2^-" + std::to_string(k) + ": lumped " + num(row.lumped_s) + " s, non-lumped " +
        num(row.nonlumped_s) + " s, speed-up " + num(row.speedup()));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lodwave
