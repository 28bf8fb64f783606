#pragma once

// Hyperspectral cube container and its on-disk format.
//
// File layout (all integers and samples little-endian):
//
//   offset  size  field
//   0       8     magic "SWLRTRC1"
//   8       4     format version (1)
//   12      4     sample type: 1 = float32, 2 = float64
//   16      4     byte order tag: 1 = little-endian
//   20      4     rows    (n1)
//   24      4     columns (n2)
//   28      4     bands   (n3)
//   32      8     range min (float64)
//   40      8     range max (float64)
//   48      ...   payload, band-sequential: for band, for row, for column
//
// The range fields record the original value range that normalize() mapped
// onto [0, 1]; an unnormalized cube stores {0, 1}.

#include "swlrtr/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace swlrtr {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SampleType : std::uint32_t { Float32 = 1, Float64 = 2 };

inline constexpr char kCubeMagic[8] = {'S', 'W', 'L', 'R', 'T', 'R', 'C', '1'};
inline constexpr std::uint32_t kCubeVersion = 1;
inline constexpr std::uint32_t kLittleEndianTag = 1;
inline constexpr std::size_t kCubeHeaderBytes = 48;

struct ValueRange {
  double min = 0.0;
  double max = 1.0;
  friend bool operator==(const ValueRange&, const ValueRange&) = default;
};

struct CubeHeader {
  std::uint32_t version = kCubeVersion;
  SampleType sample_type = SampleType::Float64;
  std::uint32_t byte_order = kLittleEndianTag;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::uint32_t bands = 0;
  ValueRange range{};

  std::size_t sample_bytes() const { return sample_type == SampleType::Float32 ? 4 : 8; }
  std::uintmax_t payload_bytes() const {
    return std::uintmax_t{rows} * cols * bands * sample_bytes();
  }
};

struct HsiCube {
  Tensor3 data;  // rows x cols x bands
  ValueRange range{};

  HsiCube() = default;
  explicit HsiCube(Tensor3 t, ValueRange r = {}) : data(std::move(t)), range(r) {}

  Index rows() const { return data.dims().d1; }
  Index cols() const { return data.dims().d2; }
  Index bands() const { return data.dims().d3; }
  Dims3 dims() const { return data.dims(); }

  friend bool operator==(const HsiCube&, const HsiCube&) = default;
};

CubeHeader read_cube_header(const std::filesystem::path& path);
HsiCube read_cube(const std::filesystem::path& path);
void write_cube(const HsiCube& cube, const std::filesystem::path& path,
                SampleType sample_type = SampleType::Float64);

// Global affine map of all values onto [0, 1]. The source range is composed
// with the cube's existing range so that denormalize() recovers the
// original values. Throws std::invalid_argument for a constant cube.
HsiCube normalize(const HsiCube& cube);
Tensor3 denormalize(const HsiCube& cube);

// Plain "key = value" text, '#' starts a comment. Keys are returned in file
// order; duplicate keys are an error.
std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path);

}  // namespace swlrtr
