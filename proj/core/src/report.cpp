#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "lodwave/error.hpp"
#include "lodwave/experiment.hpp"

namespace lodwave {

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_file(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void close_file(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

std::string ell_field(const ErrorRecord& r) { return r.variant == Variant::Fem ? "0" : ell_label(r.ell); }

}  // namespace

void emit_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  const bool det = report.config.deterministic;

  {
    const auto path = dir / "errors.csv";
    auto out = open_file(path);
    out << "example,variant,ell,H,rel_err_H1,err_dt_L2,eoc,offline_s,online_s\n";
    for (const auto& r : report.records) {
      out << r.example << ',' << to_string(r.variant) << ',' << ell_field(r) << ','
          << num(std::ldexp(1.0, -r.h_exponent)) << ',' << num(r.rel_err_h1) << ',' << num(r.err_dt_l2) << ','
          << (r.eoc ? num(*r.eoc) : "") << ',' << (det ? "nan" : num(r.offline_s)) << ','
          << (det ? "nan" : num(r.online_s)) << '\n';
    }
    close_file(out, path);
  }
  {
    const auto path = dir / "diagnostics.csv";
    auto out = open_file(path);
    out << "example,variant,ell,H_exponent,rel_err_energy,dt,steps,cfl_dt_max,min_energy,solver_iterations,evaluated,status,message\n";
    for (const auto& r : report.records) {
      std::string msg = r.message;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ';';
      }
      out << r.example << ',' << to_string(r.variant) << ',' << ell_field(r) << ',' << r.h_exponent << ','
          << num(r.rel_err_energy) << ',' << num(r.dt) << ',' << r.steps << ',' << num(r.cfl_dt_max) << ','
          << (r.min_energy ? num(*r.min_energy) : "") << ',' << r.solver_iterations << ',' << r.evaluated << ','
          << (r.ok ? "ok" : "failed") << ',' << msg << '\n';
    }
    close_file(out, path);
  }
  {
    const auto path = dir / "timing.csv";
    auto out = open_file(path);
    out << "H,offline_s,lumped_online_s,nonlumped_online_s,speedup,lumped_solver_iterations,"
           "nonlumped_solver_iterations,steps\n";
    for (const auto& t : report.timing) {
      out << num(std::ldexp(1.0, -t.h_exponent)) << ',' << num(t.offline_s) << ',' << num(t.lumped_s) << ','
          << num(t.nonlumped_s) << ',' << num(t.speedup()) << ',' << t.lumped_iterations << ','
          << t.nonlumped_iterations << ',' << t.steps << '\n';
    }
    close_file(out, path);
  }
  {
    const auto path = dir / "config.echo.txt";
    auto out = open_file(path);
    out << echo_config(report.config);
    char digest[64];
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(report.alpha_digest));
    out << "# alpha: " << report.alpha_provenance << " digest " << digest << '\n';
    std::snprintf(digest, sizeof digest, "%016llx", static_cast<unsigned long long>(report.beta_digest));
    out << "# beta: " << report.beta_provenance << " digest " << digest << '\n';
    out << "# random generator: " << kRandomGeneratorName << '\n';
    for (const auto& r : report.references) {
      out << "# reference: " << r.steps << " steps for H exponents";
      for (int k : r.h_exponents) out << ' ' << k;
      out << ", fine CFL dt_max " << num(r.cfl_dt_max) << '\n';
    }
    for (const auto& n : report.notes) out << "# " << n << '\n';
    close_file(out, path);
  }

  // One two-column file per curve, rows by descending H.
  std::map<std::pair<Variant, int>, std::map<int, double>> curves;
  for (const auto& r : report.records) {
    if (r.ok) curves[{r.variant, r.ell}][r.h_exponent] = r.rel_err_h1;
  }
  for (const auto& [key, points] : curves) {
    const std::string name = "plot_" + to_string(key.first) +
                             (key.first == Variant::Fem ? std::string() : "_ell" + ell_label(key.second)) + ".dat";
    const auto path = dir / name;
    auto out = open_file(path);
    out << "# H rel_err_H1\n";
    for (const auto& [k, e] : points) out << num(std::ldexp(1.0, -k)) << ' ' << num(e) << '\n';
    close_file(out, path);
  }
}

}  // namespace lodwave
