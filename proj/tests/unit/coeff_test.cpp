#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "lodwave/coeff.hpp"
#include "lodwave/error.hpp"

using namespace lodwave;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "lodwave-coeff-test";
  fs::create_directories(dir);
  return dir / name;
}
}  // namespace

TEST_CASE("random fields are seeded") {
  const auto a = random_field(6, 1.0, 2.5, 42);
  const auto b = random_field(6, 1.0, 2.5, 42);
  CHECK(a.values == b.values);
  CHECK(a.values.size() == 4096);
  for (std::uint64_t s : {1u, 2u, 3u}) CHECK(random_field(6, 1.0, 2.5, s).values != random_field(6, 1.0, 2.5, s + 1).values);
  CHECK_THROWS_AS(random_field(2, 2.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(random_field(2, 0.0, 1.0, 1), DomainError);
}

TEST_CASE("random field range and mean") {
  const auto f = random_field(6, 0.5, 4.0, 7);
  CHECK(f.min_value() >= 0.5);
  CHECK(f.max_value() <= 4.0);
  // Mean of 4096 uniforms on [1, 2.5]: sd of the mean is 1.5 / sqrt(12 * 4096).
  const auto g = random_field(6, 1.0, 2.5, 7);
  const double mean = std::accumulate(g.values.begin(), g.values.end(), 0.0) / 4096.0;
  CHECK(std::abs(mean - 1.75) <= 0.05);
}

TEST_CASE("checkerboard pattern") {
  const auto f = structured_field(6, Checkerboard{8, 1.0, 18.0});
  for (int cy = 0; cy < 64; ++cy)
    for (int cx = 0; cx < 64; ++cx) CHECK(f.at(cx, cy) == (((cx / 8 + cy / 8) % 2 == 0) ? 1.0 : 18.0));
}

TEST_CASE("stripes and empty inclusions") {
  const auto s = structured_field(4, Stripes{4, {1.0, 18.0}});
  for (int cy = 0; cy < 16; ++cy)
    for (int cx = 0; cx < 16; ++cx) CHECK(s.at(cx, cy) == ((cy / 4) % 2 == 0 ? 1.0 : 18.0));
  const auto c = structured_field(4, Inclusions{0, 2, 1.0, 18.0, 3});
  CHECK(std::all_of(c.values.begin(), c.values.end(), [](double v) { return v == 1.0; }));
  const auto i = structured_field(5, Inclusions{10, 3, 1.0, 18.0, 3});
  CHECK(i.min_value() == 1.0);
  CHECK(i.max_value() == 18.0);
  CHECK(structured_field(5, Inclusions{10, 3, 1.0, 18.0, 3}).values == i.values);
}

TEST_CASE("pattern parsing") {
  CHECK(std::holds_alternative<Checkerboard>(parse_pattern("checkerboard:block=4,lo=1,hi=18")));
  const auto s = std::get<Stripes>(parse_pattern("stripes:width=4,values=1/18/3"));
  CHECK(s.values == std::vector<double>{1.0, 18.0, 3.0});
  CHECK_THROWS_AS(parse_pattern("spirals:n=3"), ConfigError);
  CHECK_THROWS_AS(parse_pattern("stripes:colour=red"), ConfigError);
}

TEST_CASE("rescale") {
  const auto f = random_field(6, 0.5, 4.0, 9);
  const auto r = rescale_field(f, 0.01, 100.0);
  CHECK(r.min_value() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(r.max_value() == doctest::Approx(100.0).epsilon(1e-12));
  const auto back = rescale_field(r, f.min_value(), f.max_value());
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(std::abs(back.values[i] - f.values[i]) <= 1e-12 * f.values[i]);
  const auto same = rescale_field(f, f.min_value(), f.max_value());
  for (std::size_t i = 0; i < f.values.size(); ++i) CHECK(same.values[i] == doctest::Approx(f.values[i]).epsilon(1e-15));

  const auto flat = structured_field(3, Inclusions{0, 2, 2.0, 3.0, 1});
  const auto flat_r = rescale_field(flat, 0.5, 7.0);
  CHECK(std::all_of(flat_r.values.begin(), flat_r.values.end(), [](double v) { return v == 0.5; }));
  CHECK_THROWS_AS(rescale_field(f, 2.0, 1.0), DomainError);
}

TEST_CASE("raster round trip") {
  const auto f = random_field(2, 1.0, 2.0, 5);
  const auto path = scratch("roundtrip.txt");
  save_field(f, path);
  const auto g = load_field(path);
  CHECK(g.eps_exponent == 2);
  CHECK(g.values == f.values);
}

TEST_CASE("raster errors") {
  {
    std::ofstream out(scratch("short.txt"));
    out << "4 4\n";
    for (int i = 0; i < 15; ++i) out << "1.0 ";
  }
  CHECK_THROWS_AS(load_field(scratch("short.txt")), ParseError);
  {
    std::ofstream out(scratch("negative.txt"));
    out << "2 2\n1.0 2.0\n-1.0 3.0\n";
  }
  try {
    load_field(scratch("negative.txt"));
    FAIL("negative value accepted");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  {
    std::ofstream out(scratch("header.txt"));
    out << "3 4\n";
  }
  CHECK_THROWS_AS(load_field(scratch("header.txt")), ParseError);
}

TEST_CASE("values on the fine mesh") {
  const auto f = random_field(6, 1.0, 2.5, 11);
  const MeshLevel fine(7);
  const auto v = values_on_fine(f, fine);
  CHECK(v.size() == 16384);
  for (int fy = 0; fy < 128; ++fy)
    for (int fx = 0; fx < 128; ++fx) CHECK(v[static_cast<std::size_t>(fine.element_id(fx, fy))] == f.at(fx / 2, fy / 2));
  CHECK(std::set<double>(v.begin(), v.end()) == std::set<double>(f.values.begin(), f.values.end()));
  CHECK(values_on_fine(f, MeshLevel(6)) == f.values);
  CHECK_THROWS_AS(values_on_fine(f, MeshLevel(5)), NestingError);
}

TEST_CASE("field digest tracks values") {
  auto f = random_field(3, 1.0, 2.0, 1);
  const auto d = field_digest(f);
  CHECK(field_digest(random_field(3, 1.0, 2.0, 1)) == d);
  f.values[5] *= 1.0 + 1e-15;
  CHECK(field_digest(f) != d);
}
