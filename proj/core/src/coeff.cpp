#include "lodwave/coeff.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "lodwave/error.hpp"

namespace lodwave {

double CoefficientField::min_value() const { return *std::min_element(values.begin(), values.end()); }
double CoefficientField::max_value() const { return *std::max_element(values.begin(), values.end()); }

namespace {

void check_eps(int eps_exponent) {
  if (eps_exponent < 0 || eps_exponent > MeshLevel::kMaxExponent) {
    throw BoundsError("coefficient exponent " + std::to_string(eps_exponent) + " out of range");
  }
}

void check_bounds(double lo, double hi) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) {
    throw DomainError("coefficient bounds must satisfy 0 < lo <= hi < inf");
  }
}

double unit_uniform(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("pattern key '" + key + "' expects a number, got '" + text + "'");
  }
  return v;
}

}  // namespace

CoefficientField random_field(int eps_exponent, double lo, double hi, std::uint64_t seed) {
  check_eps(eps_exponent);
  if (!(lo > 0.0) || !(lo < hi) || !std::isfinite(hi)) {
    throw DomainError("random_field needs 0 < lo < hi < inf");
  }
  CoefficientField field;
  field.eps_exponent = eps_exponent;
  field.lo = lo;
  field.hi = hi;
  field.provenance = std::string("random ") + kRandomGeneratorName + " seed=" + std::to_string(seed) +
                     " range=[" + format_double(lo) + "," + format_double(hi) + "]";
  std::mt19937_64 gen(seed);
  const std::size_t count = std::size_t{1} << (2 * eps_exponent);
  field.values.resize(count);
  for (auto& v : field.values) v = std::clamp(lo + (hi - lo) * unit_uniform(gen), lo, hi);
  return field;
}

PatternSpec parse_pattern(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = text.substr(0, colon);
  std::vector<std::pair<std::string, std::string>> kv;
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("pattern item '" + item + "' lacks '='");
      kv.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
  }
  auto unknown = [&](const std::string& key) {
    return ConfigError("pattern '" + name + "' has no key '" + key + "'");
  };

  if (name == "checkerboard") {
    Checkerboard p;
    for (const auto& [k, v] : kv) {
      if (k == "block") p.block = static_cast<int>(parse_number(k, v));
      else if (k == "lo") p.lo = parse_number(k, v);
      else if (k == "hi") p.hi = parse_number(k, v);
      else throw unknown(k);
    }
    return p;
  }
  if (name == "stripes") {
    Stripes p;
    for (const auto& [k, v] : kv) {
      if (k == "width") {
        p.width = static_cast<int>(parse_number(k, v));
      } else if (k == "values") {
        p.values.clear();
        std::stringstream vs(v);
        std::string item;
        while (std::getline(vs, item, '/')) p.values.push_back(parse_number(k, item));
      } else {
        throw unknown(k);
      }
    }
    return p;
  }
  if (name == "inclusions") {
    Inclusions p;
    for (const auto& [k, v] : kv) {
      if (k == "count") p.count = static_cast<int>(parse_number(k, v));
      else if (k == "size") p.size = static_cast<int>(parse_number(k, v));
      else if (k == "background") p.background = parse_number(k, v);
      else if (k == "value") p.value = parse_number(k, v);
      else if (k == "seed") p.seed = static_cast<std::uint64_t>(parse_number(k, v));
      else throw unknown(k);
    }
    return p;
  }
  throw ConfigError("unknown coefficient pattern '" + name + "'");
}

std::string describe_pattern(const PatternSpec& pattern) {
  struct Visitor {
    std::string operator()(const Checkerboard& p) const {
      return "checkerboard:block=" + std::to_string(p.block) + ",lo=" + format_double(p.lo) +
             ",hi=" + format_double(p.hi);
    }
    std::string operator()(const Stripes& p) const {
      std::string s = "stripes:width=" + std::to_string(p.width) + ",values=";
      for (std::size_t i = 0; i < p.values.size(); ++i) {
        if (i) s += '/';
        s += format_double(p.values[i]);
      }
      return s;
    }
    std::string operator()(const Inclusions& p) const {
      return "inclusions:count=" + std::to_string(p.count) + ",size=" + std::to_string(p.size) +
             ",background=" + format_double(p.background) + ",value=" + format_double(p.value) +
             ",seed=" + std::to_string(p.seed);
    }
  };
  return std::visit(Visitor{}, pattern);
}

CoefficientField structured_field(int eps_exponent, const PatternSpec& pattern) {
  check_eps(eps_exponent);
  const int n = 1 << eps_exponent;
  CoefficientField field;
  field.eps_exponent = eps_exponent;
  field.values.assign(static_cast<std::size_t>(n) * n, 0.0);
  field.provenance = "structured " + describe_pattern(pattern);

  if (const auto* p = std::get_if<Checkerboard>(&pattern)) {
    if (p->block < 1) throw ConfigError("checkerboard block must be >= 1");
    check_bounds(p->lo, p->hi);
    for (int cy = 0; cy < n; ++cy) {
      for (int cx = 0; cx < n; ++cx) {
        const bool odd = ((cx / p->block) + (cy / p->block)) % 2 == 1;
        field.values[static_cast<std::size_t>(cy * n + cx)] = odd ? p->hi : p->lo;
      }
    }
  } else if (const auto* p = std::get_if<Stripes>(&pattern)) {
    if (p->width < 1 || p->values.empty()) throw ConfigError("stripes need width >= 1 and values");
    for (int cy = 0; cy < n; ++cy) {
      const double v = p->values[static_cast<std::size_t>(cy / p->width) % p->values.size()];
      if (!(v > 0.0)) throw DomainError("stripe values must be positive");
      for (int cx = 0; cx < n; ++cx) field.values[static_cast<std::size_t>(cy * n + cx)] = v;
    }
  } else {
    const auto& inc = std::get<Inclusions>(pattern);
    if (inc.count < 0 || inc.size < 1) throw ConfigError("inclusions need count >= 0 and size >= 1");
    if (!(inc.background > 0.0) || !(inc.value > 0.0)) throw DomainError("inclusion values must be positive");
    std::fill(field.values.begin(), field.values.end(), inc.background);
    std::mt19937_64 gen(inc.seed);
    const int span = std::max(1, n - inc.size + 1);
    for (int i = 0; i < inc.count; ++i) {
      const int x0 = static_cast<int>(gen() % static_cast<std::uint64_t>(span));
      const int y0 = static_cast<int>(gen() % static_cast<std::uint64_t>(span));
      for (int cy = y0; cy < std::min(n, y0 + inc.size); ++cy) {
        for (int cx = x0; cx < std::min(n, x0 + inc.size); ++cx) {
          field.values[static_cast<std::size_t>(cy * n + cx)] = inc.value;
        }
      }
    }
  }
  field.lo = field.min_value();
  field.hi = field.max_value();
  return field;
}

CoefficientField rescale_field(const CoefficientField& field, double new_lo, double new_hi) {
  if (!(new_lo > 0.0) || !(new_lo < new_hi) || !std::isfinite(new_hi)) {
    throw DomainError("rescale_field needs 0 < new_lo < new_hi < inf");
  }
  const double vmin = field.min_value();
  const double vmax = field.max_value();
  CoefficientField out = field;
  out.lo = new_lo;
  out.hi = new_hi;
  out.provenance = field.provenance + " rescaled=[" + format_double(new_lo) + "," +
                   format_double(new_hi) + "]";
  if (vmax <= vmin) {
    std::fill(out.values.begin(), out.values.end(), new_lo);
    return out;
  }
  const double scale = (new_hi - new_lo) / (vmax - vmin);
  for (auto& v : out.values) v = std::clamp(new_lo + (v - vmin) * scale, new_lo, new_hi);
  return out;
}

CoefficientField load_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open coefficient file " + path.string());

  std::string line;
  int line_no = 0;
  auto next_nonempty = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_nonempty()) throw ParseError("empty coefficient file " + path.string(), 1);
  long nx = 0;
  long ny = 0;
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> nx >> ny) || (hs >> extra)) {
      throw ParseError("header must be 'nx ny' in " + path.string(), line_no);
    }
  }
  if (nx != ny || nx < 1 || !std::has_single_bit(static_cast<unsigned long>(nx)) ||
      nx > (1L << MeshLevel::kMaxExponent)) {
    throw ParseError("header needs nx == ny == 2^k, got " + std::to_string(nx) + " " +
                         std::to_string(ny),
                     line_no);
  }

  CoefficientField field;
  field.eps_exponent = std::countr_zero(static_cast<unsigned long>(nx));
  const std::size_t expected = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
  field.values.reserve(expected);
  while (next_nonempty()) {
    std::istringstream ls(line);
    std::string token;
    while (ls >> token) {
      double v = 0.0;
      const auto* end = token.data() + token.size();
      const auto [ptr, ec] = std::from_chars(token.data(), end, v);
      if (ec != std::errc() || ptr != end) {
        throw ParseError("invalid number '" + token + "'", line_no);
      }
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParseError("coefficient value " + token + " is not positive and finite", line_no);
      }
      if (field.values.size() == expected) {
        throw ParseError("more than " + std::to_string(expected) + " values", line_no);
      }
      field.values.push_back(v);
    }
  }
  if (field.values.size() != expected) {
    throw ParseError("expected " + std::to_string(expected) + " values, found " +
                         std::to_string(field.values.size()),
                     line_no);
  }
  field.lo = field.min_value();
  field.hi = field.max_value();
  field.provenance = "file " + path.string();
  return field;
}

void save_field(const CoefficientField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write coefficient file " + path.string());
  const int n = field.cells_per_axis();
  out << n << ' ' << n << '\n' << std::setprecision(17);
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      if (cx) out << ' ';
      out << field.at(cx, cy);
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing coefficient file " + path.string());
}

std::vector<double> values_on_fine(const CoefficientField& field, const MeshLevel& fine) {
  if (fine.exponent() < field.eps_exponent) {
    throw NestingError("fine level " + std::to_string(fine.exponent()) +
                       " does not resolve coefficient level " + std::to_string(field.eps_exponent));
  }
  const int shift = fine.exponent() - field.eps_exponent;
  const int n = fine.elems_per_axis();
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int ey = 0; ey < n; ++ey) {
    for (int ex = 0; ex < n; ++ex) {
      out[static_cast<std::size_t>(ey * n + ex)] = field.at(ex >> shift, ey >> shift);
    }
  }
  return out;
}

std::uint64_t field_digest(const CoefficientField& field) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t e = field.eps_exponent;
  mix(reinterpret_cast<const unsigned char*>(&e), sizeof e);
  mix(reinterpret_cast<const unsigned char*>(field.values.data()), field.values.size() * sizeof(double));
  return h;
}

}  // namespace lodwave
