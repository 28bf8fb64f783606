#include "swlrtr/cube_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>

namespace swlrtr {

namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
}

template <typename T>
void put(std::vector<unsigned char>& buf, T v) {
  v = to_little(v);
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.insert(buf.end(), raw, raw + sizeof(T));
}

template <typename T>
T get(const unsigned char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return to_little(v);
}

CubeHeader parse_header(const unsigned char* raw, const std::filesystem::path& path) {
  if (std::memcmp(raw, kCubeMagic, sizeof(kCubeMagic)) != 0) {
    throw IoError(path.string() + ": bad magic");
  }
  CubeHeader h;
  h.version = get<std::uint32_t>(raw + 8);
  const auto sample = get<std::uint32_t>(raw + 12);
  h.byte_order = get<std::uint32_t>(raw + 16);
  h.rows = get<std::uint32_t>(raw + 20);
  h.cols = get<std::uint32_t>(raw + 24);
  h.bands = get<std::uint32_t>(raw + 28);
  h.range.min = get<double>(raw + 32);
  h.range.max = get<double>(raw + 40);

  if (h.version != kCubeVersion) {
    throw IoError(path.string() + ": unsupported format version " + std::to_string(h.version));
  }
  if (sample != 1 && sample != 2) {
    throw IoError(path.string() + ": unsupported sample type " + std::to_string(sample));
  }
  h.sample_type = static_cast<SampleType>(sample);
  if (h.byte_order != kLittleEndianTag) {
    throw IoError(path.string() + ": unsupported byte order tag " + std::to_string(h.byte_order));
  }
  if (h.rows == 0 || h.cols == 0 || h.bands == 0) {
    throw IoError(path.string() + ": zero dimension in header");
  }
  if (!std::isfinite(h.range.min) || !std::isfinite(h.range.max)) {
    throw IoError(path.string() + ": non-finite value range in header");
  }
  return h;
}

}  // namespace

CubeHeader read_cube_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open file");
  unsigned char raw[kCubeHeaderBytes];
  in.read(reinterpret_cast<char*>(raw), sizeof(raw));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(raw))) {
    throw IoError(path.string() + ": truncated header");
  }
  return parse_header(raw, path);
}

HsiCube read_cube(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open file");
  unsigned char raw[kCubeHeaderBytes];
  in.read(reinterpret_cast<char*>(raw), sizeof(raw));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(raw))) {
    throw IoError(path.string() + ": truncated header");
  }
  const CubeHeader h = parse_header(raw, path);

  std::vector<unsigned char> payload(static_cast<std::size_t>(h.payload_bytes()));
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
    throw IoError(path.string() + ": truncated payload");
  }

  Tensor3 t({h.rows, h.cols, h.bands});
  const std::size_t step = h.sample_bytes();
  const unsigned char* p = payload.data();
  for (Index b = 0; b < h.bands; ++b) {
    for (Index r = 0; r < h.rows; ++r) {
      for (Index c = 0; c < h.cols; ++c, p += step) {
        const double v = h.sample_type == SampleType::Float32 ? static_cast<double>(get<float>(p))
                                                              : get<double>(p);
        if (!std::isfinite(v)) throw IoError(path.string() + ": non-finite value in payload");
        t(r, c, b) = v;
      }
    }
  }
  return HsiCube(std::move(t), h.range);
}

void write_cube(const HsiCube& cube, const std::filesystem::path& path, SampleType sample_type) {
  if (!cube.data.all_finite()) throw std::invalid_argument("write_cube: non-finite values");
  std::vector<unsigned char> buf;
  const std::size_t step = sample_type == SampleType::Float32 ? 4 : 8;
  buf.reserve(kCubeHeaderBytes + static_cast<std::size_t>(cube.data.size()) * step);
  buf.insert(buf.end(), kCubeMagic, kCubeMagic + sizeof(kCubeMagic));
  put<std::uint32_t>(buf, kCubeVersion);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(sample_type));
  put<std::uint32_t>(buf, kLittleEndianTag);
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(cube.rows()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(cube.cols()));
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(cube.bands()));
  put<double>(buf, cube.range.min);
  put<double>(buf, cube.range.max);
  for (Index b = 0; b < cube.bands(); ++b) {
    for (Index r = 0; r < cube.rows(); ++r) {
      for (Index c = 0; c < cube.cols(); ++c) {
        if (sample_type == SampleType::Float32) {
          put<float>(buf, static_cast<float>(cube.data(r, c, b)));
        } else {
          put<double>(buf, cube.data(r, c, b));
        }
      }
    }
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(path.string() + ": write failed");
}

HsiCube normalize(const HsiCube& cube) {
  const auto v = cube.data.flat();
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  if (!(hi > lo)) throw std::invalid_argument("normalize: constant cube (max == min)");
  HsiCube out = cube;
  if (lo == 0.0 && hi == 1.0) return out;
  out.data.flat() = (v.array() - lo) / (hi - lo);
  const double span = cube.range.max - cube.range.min;
  out.range = {cube.range.min + lo * span, cube.range.min + hi * span};
  return out;
}

Tensor3 denormalize(const HsiCube& cube) {
  Tensor3 t = cube.data;
  t.flat() = cube.range.min + (cube.range.max - cube.range.min) * t.flat().array();
  return t;
}

std::vector<std::pair<std::string, std::string>> read_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string() + ": cannot open file");
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string{};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  std::vector<std::pair<std::string, std::string>> out;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw IoError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    if (!seen.insert(key).second) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

}  // namespace swlrtr
