#pragma once

// Dense third-order tensors and the multilinear algebra built on them.
//
// Storage layout: element (i, j, k) of a d1 x d2 x d3 tensor lives at
// linear offset i + d1 * (j + d2 * k), i.e. column-major with the first
// index fastest.
//
// Unfolding convention: unfold(t, n) returns a matrix with one column per
// index of mode n and one row per combination of the remaining indices.
// Rows enumerate the remaining indices with the lower-numbered mode fastest:
//
//   mode 1: row = j + d2 * k
//   mode 2: row = i + d1 * k
//   mode 3: row = i + d1 * j
//
// This is the transpose of the usual Kolda-Bader X_(n), so for a Tucker
// product X = G x1 U1 x2 U2 x3 U3 we have
//
//   unfold(X, 1) = (U3 kron U2) * unfold(G, 1) * U1^T
//
// and the analogous identities for modes 2 and 3.

#include <Eigen/Dense>

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace swlrtr {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims3 {
  Index d1 = 0;
  Index d2 = 0;
  Index d3 = 0;

  constexpr Index operator[](int mode) const {
    return mode == 1 ? d1 : mode == 2 ? d2 : d3;
  }
  constexpr Index numel() const { return d1 * d2 * d3; }
  friend constexpr bool operator==(const Dims3&, const Dims3&) = default;
};

class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims3 dims, double fill = 0.0);
  Tensor3(Dims3 dims, std::vector<double> values);

  const Dims3& dims() const { return dims_; }
  Index size() const { return static_cast<Index>(values_.size()); }

  double& operator()(Index i, Index j, Index k) {
    return values_[static_cast<std::size_t>(i + dims_.d1 * (j + dims_.d2 * k))];
  }
  double operator()(Index i, Index j, Index k) const {
    return values_[static_cast<std::size_t>(i + dims_.d1 * (j + dims_.d2 * k))];
  }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  // Zero-copy views of the storage. The n1*n2 x n3 matrix view coincides
  // with unfold(*this, 3).
  Eigen::Map<Vector> flat() { return {values_.data(), size()}; }
  Eigen::Map<const Vector> flat() const { return {values_.data(), size()}; }
  Eigen::Map<Matrix> as_matrix() { return {values_.data(), dims_.d1 * dims_.d2, dims_.d3}; }
  Eigen::Map<const Matrix> as_matrix() const {
    return {values_.data(), dims_.d1 * dims_.d2, dims_.d3};
  }

  bool all_finite() const;

  Tensor3& operator+=(const Tensor3& o);
  Tensor3& operator-=(const Tensor3& o);
  Tensor3& operator*=(double s);

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  Dims3 dims_{};
  std::vector<double> values_;
};

struct SvdResult {
  Matrix u;   // m x r, orthonormal columns
  Vector s;   // r, nonincreasing, nonnegative
  Matrix vt;  // r x n, orthonormal rows
};

struct TuckerFactors {
  Tensor3 core;
  std::array<Matrix, 3> u;  // u[j] is d_{j+1} x r_{j+1}

  Tensor3 reconstruct() const;
};

Matrix unfold(const Tensor3& t, int mode);
Tensor3 fold(const Matrix& m, int mode, Dims3 dims);

// (t x_n u)(.., j, ..) = sum_{i_n} t(.., i_n, ..) * u(j, i_n); u is J x I_n.
Tensor3 mode_product(const Tensor3& t, const Matrix& u, int mode);

Matrix kronecker(const Matrix& a, const Matrix& b);

double frobenius_norm(const Tensor3& t);
double l1_norm(const Tensor3& t);
double inner(const Tensor3& a, const Tensor3& b);

// Thin SVD with a deterministic sign convention: the first entry of every
// left singular vector whose magnitude is non-negligible is positive.
SvdResult thin_svd(const Matrix& m);

// The r leading left singular vectors of m, completed to an orthonormal
// set with the sign convention above when r exceeds min(rows, cols).
Matrix leading_left_vectors(const Matrix& m, Index r);

// Truncated higher-order SVD. ranks[j] must lie in [1, d_{j+1}].
TuckerFactors hosvd(const Tensor3& t, std::array<Index, 3> ranks);

// Full multilinear ranks: min(d_j, prod of the other dims) per mode.
std::array<Index, 3> full_ranks(Dims3 dims);

// Orthonormal-columns check: ||Q^T Q - I||_F.
double orthonormality_error(const Matrix& q);

}  // namespace swlrtr
