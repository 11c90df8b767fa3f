#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lodwave/grid.hpp"

namespace lodwave {

/// Piecewise-constant coefficient on the 2^eps x 2^eps cell mesh, row-major
/// from the bottom-left cell. Every value lies in [lo, hi] with lo > 0.
struct CoefficientField {
  int eps_exponent = 0;
  std::vector<double> values;
  double lo = 1.0;
  double hi = 1.0;
  std::string provenance;

  int cells_per_axis() const noexcept { return 1 << eps_exponent; }
  double at(int cx, int cy) const { return values[static_cast<std::size_t>(cy * cells_per_axis() + cx)]; }
  double min_value() const;
  double max_value() const;
};

/// Name of the generator used by random_field; echoed into every report.
inline constexpr const char* kRandomGeneratorName = "std::mt19937_64";

/// I.i.d. uniform values on [lo, hi] from a seeded std::mt19937_64. The
/// uniform variate is built from the top 53 bits of each draw, so fields are
/// identical across standard library implementations.
CoefficientField random_field(int eps_exponent, double lo, double hi, std::uint64_t seed);

/// Square blocks of `block` cells alternating between lo and hi.
struct Checkerboard {
  int block = 8;
  double lo = 1.0;
  double hi = 18.0;
};

/// Horizontal bands `width` cells tall cycling through `values` from the bottom.
struct Stripes {
  int width = 4;
  std::vector<double> values{1.0, 18.0};
};

/// `count` square inclusions of `size` cells with value `value` on a constant
/// background. Positions come from a seeded std::mt19937_64, so the pattern is
/// deterministic for a given seed.
struct Inclusions {
  int count = 0;
  int size = 2;
  double background = 1.0;
  double value = 18.0;
  std::uint64_t seed = 1;
};

using PatternSpec = std::variant<Checkerboard, Stripes, Inclusions>;

/// Parses "checkerboard:block=8,lo=1,hi=18", "stripes:width=4,values=1/18" or
/// "inclusions:count=40,size=2,background=1,value=18,seed=3".
/// Throws ConfigError for unknown patterns or keys.
PatternSpec parse_pattern(const std::string& text);
std::string describe_pattern(const PatternSpec& pattern);

CoefficientField structured_field(int eps_exponent, const PatternSpec& pattern);

/// Monotone affine map of the field's [min, max] onto [new_lo, new_hi].
/// A constant field maps to new_lo.
CoefficientField rescale_field(const CoefficientField& field, double new_lo, double new_hi);

/// Raster text format: first line "nx ny", then nx*ny values row-major from
/// the bottom-left cell.
CoefficientField load_field(const std::filesystem::path& path);
void save_field(const CoefficientField& field, const std::filesystem::path& path);

/// Per-fine-element values; each fine element inherits the value of its cell.
std::vector<double> values_on_fine(const CoefficientField& field, const MeshLevel& fine);

/// FNV-1a digest of the exponent and the raw bytes of the values.
std::uint64_t field_digest(const CoefficientField& field);

}  // namespace lodwave
