#pragma once

#include "swlrtr/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

namespace swlrtr::testing {

inline Tensor3 random_tensor(Dims3 d, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, scale);
  Tensor3 t(d);
  for (double& v : t.values()) v = nd(rng);
  return t;
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

// Haar-ish orthonormal columns via QR of a Gaussian matrix.
inline Matrix random_orthonormal(Index rows, Index cols, std::uint64_t seed) {
  const Matrix g = random_matrix(rows, cols, seed);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  return q;
}

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  return (a.flat() - b.flat()).cwiseAbs().maxCoeff();
}

// Scratch directory removed at scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("swlrtr-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace swlrtr::testing
