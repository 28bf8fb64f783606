#include "doctest.h"
#include "support.hpp"

#include "swlrtr/cube_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

using namespace swlrtr;
using namespace swlrtr::testing;

namespace {

// Little-endian byte writers for the fixture, independent of the library.
void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
void put_u64(std::vector<unsigned char>& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}
void put_f64(std::vector<unsigned char>& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }
void put_f32(std::vector<unsigned char>& b, float v) { put_u32(b, std::bit_cast<std::uint32_t>(v)); }

std::vector<unsigned char> header(std::uint32_t dtype, std::uint32_t n1, std::uint32_t n2, std::uint32_t n3,
                                  double lo = 0.0, double hi = 1.0) {
  std::vector<unsigned char> b;
  for (char c : std::string("SWLRTRC1")) b.push_back(static_cast<unsigned char>(c));
  put_u32(b, 1);
  put_u32(b, dtype);
  put_u32(b, 1);
  put_u32(b, n1);
  put_u32(b, n2);
  put_u32(b, n3);
  put_f64(b, lo);
  put_f64(b, hi);
  return b;
}

void dump(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

std::vector<unsigned char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("hand-assembled 2x2x2 fixture decodes to the expected values") {
  TempDir dir("io");
  // Payload order: band, row, column. Value = 100 b + 10 r + c.
  std::vector<unsigned char> f64 = header(2, 2, 2, 2, -3.0, 5.0);
  std::vector<unsigned char> f32 = header(1, 2, 2, 2);
  for (int b = 0; b < 2; ++b)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        put_f64(f64, 100.0 * b + 10.0 * r + c + 0.25);
        put_f32(f32, static_cast<float>(100 * b + 10 * r + c) + 0.5f);
      }
  REQUIRE(f64.size() == 48 + 8 * 8);
  dump(dir / "a.cube", f64);
  dump(dir / "b.cube", f32);

  const HsiCube a = read_cube(dir / "a.cube");
  CHECK(a.rows() == 2);
  CHECK(a.cols() == 2);
  CHECK(a.bands() == 2);
  CHECK(a.range == ValueRange{-3.0, 5.0});
  const HsiCube b = read_cube(dir / "b.cube");
  for (int band = 0; band < 2; ++band)
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        CHECK(a.data(r, c, band) == 100.0 * band + 10.0 * r + c + 0.25);
        CHECK(b.data(r, c, band) == 100.0 * band + 10.0 * r + c + 0.5);
      }
  const CubeHeader h = read_cube_header(dir / "b.cube");
  CHECK(h.sample_type == SampleType::Float32);
  CHECK(h.payload_bytes() == 32);

  // Writing the decoded cube back reproduces the fixture byte for byte.
  write_cube(a, dir / "a2.cube");
  CHECK(slurp(dir / "a2.cube") == f64);
  write_cube(b, dir / "b2.cube", SampleType::Float32);
  CHECK(slurp(dir / "b2.cube") == f32);
}

TEST_CASE("write then read is the identity") {
  TempDir dir("io");
  HsiCube cube(random_tensor({5, 3, 4}, 9), ValueRange{2.0, 7.5});
  write_cube(cube, dir / "x.cube");
  CHECK(read_cube(dir / "x.cube") == cube);
}

TEST_CASE("malformed files are rejected with a precise reason") {
  TempDir dir("io");
  auto bytes = header(2, 2, 1, 1);
  put_f64(bytes, 0.5);
  put_f64(bytes, 0.25);

  auto trunc = bytes;
  trunc.pop_back();
  dump(dir / "trunc.cube", trunc);
  CHECK_THROWS_WITH_AS(read_cube(dir / "trunc.cube"), doctest::Contains("truncated payload"), IoError);

  auto magic = bytes;
  magic[0] = 'X';
  dump(dir / "magic.cube", magic);
  CHECK_THROWS_WITH_AS(read_cube(dir / "magic.cube"), doctest::Contains("bad magic"), IoError);

  auto nan = header(2, 2, 1, 1);
  put_f64(nan, 0.5);
  put_f64(nan, std::numeric_limits<double>::quiet_NaN());
  dump(dir / "nan.cube", nan);
  CHECK_THROWS_WITH_AS(read_cube(dir / "nan.cube"), doctest::Contains("non-finite"), IoError);

  auto dtype = bytes;
  dtype[12] = 7;
  dump(dir / "dtype.cube", dtype);
  CHECK_THROWS_AS(read_cube(dir / "dtype.cube"), IoError);

  dump(dir / "short.cube", std::vector<unsigned char>(bytes.begin(), bytes.begin() + 20));
  CHECK_THROWS_WITH_AS(read_cube(dir / "short.cube"), doctest::Contains("truncated header"), IoError);

  CHECK_THROWS_AS(read_cube(dir / "missing.cube"), IoError);
}

TEST_CASE("normalize maps the global range onto [0, 1]") {
  Tensor3 t({1, 2, 1}, std::vector<double>{0.0, 255.0});
  const HsiCube n = normalize(HsiCube(t));
  CHECK(n.data(0, 0, 0) == 0.0);
  CHECK(n.data(0, 1, 0) == 1.0);
  CHECK(n.range == ValueRange{0.0, 255.0});
  CHECK(denormalize(n) == t);

  const Tensor3 r = random_tensor({4, 5, 3}, 17, 10.0);
  const HsiCube rn = normalize(HsiCube(r));
  CHECK(rn.data.flat().minCoeff() == 0.0);
  CHECK(rn.data.flat().maxCoeff() == 1.0);
  for (Index i = 0; i + 1 < r.size(); ++i) {
    const double a = r.values()[static_cast<std::size_t>(i)];
    const double b = r.values()[static_cast<std::size_t>(i + 1)];
    const double na = rn.data.values()[static_cast<std::size_t>(i)];
    const double nb = rn.data.values()[static_cast<std::size_t>(i + 1)];
    CHECK((a < b) == (na < nb));
  }
  CHECK(max_abs_diff(denormalize(rn), r) < 1e-12);

  const HsiCube twice = normalize(rn);
  CHECK(max_abs_diff(twice.data, rn.data) <= 1e-15);
  CHECK(twice.range == rn.range);

  CHECK_THROWS_AS(normalize(HsiCube(Tensor3({2, 2, 2}, 3.0))), std::invalid_argument);
}

TEST_CASE("key = value files") {
  TempDir dir("io");
  {
    std::ofstream out(dir / "a.cfg");
    out << "# comment\n p = 5 \n\nlambda1=0.3  # trailing\n";
  }
  const auto kv = read_key_values(dir / "a.cfg");
  REQUIRE(kv.size() == 2);
  CHECK(kv[0] == std::pair<std::string, std::string>{"p", "5"});
  CHECK(kv[1] == std::pair<std::string, std::string>{"lambda1", "0.3"});
  {
    std::ofstream out(dir / "b.cfg");
    out << "p = 5\np = 6\n";
  }
  CHECK_THROWS_WITH_AS(read_key_values(dir / "b.cfg"), doctest::Contains("duplicate"), IoError);
  {
    std::ofstream out(dir / "c.cfg");
    out << "novalue\n";
  }
  CHECK_THROWS_AS(read_key_values(dir / "c.cfg"), IoError);
}
