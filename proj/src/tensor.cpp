#include "swlrtr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace swlrtr {

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) {
    throw std::invalid_argument("invalid mode index " + std::to_string(mode) +
                                " (expected 1, 2 or 3)");
  }
}

void check_same_dims(const Dims3& a, const Dims3& b) {
  if (!(a == b)) throw std::invalid_argument("tensor dimension mismatch");
}

// Flip singular pairs so the first non-negligible entry of each left
// singular vector is positive.
void fix_signs(Matrix& u, Matrix* vt) {
  for (Index c = 0; c < u.cols(); ++c) {
    for (Index r = 0; r < u.rows(); ++r) {
      const double x = u(r, c);
      if (std::abs(x) > 1e-12) {
        if (x < 0) {
          u.col(c) = -u.col(c);
          if (vt != nullptr) vt->row(c) = -vt->row(c);
        }
        break;
      }
    }
  }
}

}  // namespace

Tensor3::Tensor3(Dims3 dims, double fill) : dims_(dims) {
  if (dims.d1 < 1 || dims.d2 < 1 || dims.d3 < 1) {
    throw std::invalid_argument("tensor dimensions must be positive");
  }
  values_.assign(static_cast<std::size_t>(dims.numel()), fill);
}

Tensor3::Tensor3(Dims3 dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  if (dims.d1 < 1 || dims.d2 < 1 || dims.d3 < 1) {
    throw std::invalid_argument("tensor dimensions must be positive");
  }
  if (static_cast<Index>(values_.size()) != dims.numel()) {
    throw std::invalid_argument("value count does not match tensor dimensions");
  }
}

bool Tensor3::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor3& Tensor3::operator+=(const Tensor3& o) {
  check_same_dims(dims_, o.dims_);
  flat() += o.flat();
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& o) {
  check_same_dims(dims_, o.dims_);
  flat() -= o.flat();
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  flat() *= s;
  return *this;
}

Matrix unfold(const Tensor3& t, int mode) {
  check_mode(mode);
  const auto [d1, d2, d3] = t.dims();
  switch (mode) {
    case 1: {
      Eigen::Map<const Matrix> m(t.values().data(), d1, d2 * d3);
      return m.transpose();
    }
    case 2: {
      Matrix out(d1 * d3, d2);
      for (Index k = 0; k < d3; ++k) {
        Eigen::Map<const Matrix> slice(t.values().data() + d1 * d2 * k, d1, d2);
        out.middleRows(d1 * k, d1) = slice;
      }
      return out;
    }
    default:
      return t.as_matrix();
  }
}

Tensor3 fold(const Matrix& m, int mode, Dims3 dims) {
  check_mode(mode);
  const auto [d1, d2, d3] = dims;
  const Index expect_rows = dims.numel() / dims[mode];
  if (m.cols() != dims[mode] || m.rows() != expect_rows) {
    throw std::invalid_argument("matrix shape does not match dims for mode-" +
                                std::to_string(mode) + " fold");
  }
  Tensor3 t(dims);
  switch (mode) {
    case 1: {
      Eigen::Map<Matrix>(t.values().data(), d1, d2 * d3) = m.transpose();
      break;
    }
    case 2: {
      for (Index k = 0; k < d3; ++k) {
        Eigen::Map<Matrix>(t.values().data() + d1 * d2 * k, d1, d2) = m.middleRows(d1 * k, d1);
      }
      break;
    }
    default:
      t.as_matrix() = m;
  }
  return t;
}

Tensor3 mode_product(const Tensor3& t, const Matrix& u, int mode) {
  check_mode(mode);
  const auto [d1, d2, d3] = t.dims();
  if (u.cols() != t.dims()[mode]) {
    throw std::invalid_argument("mode-" + std::to_string(mode) + " product: matrix has " +
                                std::to_string(u.cols()) + " columns, tensor mode size is " +
                                std::to_string(t.dims()[mode]));
  }
  const Index j = u.rows();
  switch (mode) {
    case 1: {
      Tensor3 out({j, d2, d3});
      Eigen::Map<const Matrix> in(t.values().data(), d1, d2 * d3);
      Eigen::Map<Matrix>(out.values().data(), j, d2 * d3).noalias() = u * in;
      return out;
    }
    case 2: {
      Tensor3 out({d1, j, d3});
      for (Index k = 0; k < d3; ++k) {
        Eigen::Map<const Matrix> in(t.values().data() + d1 * d2 * k, d1, d2);
        Eigen::Map<Matrix>(out.values().data() + d1 * j * k, d1, j).noalias() =
            in * u.transpose();
      }
      return out;
    }
    default: {
      Tensor3 out({d1, d2, j});
      out.as_matrix().noalias() = t.as_matrix() * u.transpose();
      return out;
    }
  }
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double frobenius_norm(const Tensor3& t) { return t.flat().norm(); }

double l1_norm(const Tensor3& t) { return t.flat().lpNorm<1>(); }

double inner(const Tensor3& a, const Tensor3& b) {
  check_same_dims(a.dims(), b.dims());
  return a.flat().dot(b.flat());
}

SvdResult thin_svd(const Matrix& m) {
  if (!m.allFinite()) throw std::invalid_argument("thin_svd: non-finite input");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdResult r{svd.matrixU(), svd.singularValues(), svd.matrixV().transpose()};
  fix_signs(r.u, &r.vt);
  return r;
}

Matrix leading_left_vectors(const Matrix& m, Index r) {
  if (r < 1 || r > m.rows()) throw std::invalid_argument("requested rank out of range");
  if (r <= std::min(m.rows(), m.cols())) return thin_svd(m).u.leftCols(r);
  if (!m.allFinite()) throw std::invalid_argument("thin_svd: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  Matrix u = svd.matrixU().leftCols(r);
  fix_signs(u, nullptr);
  return u;
}

std::array<Index, 3> full_ranks(Dims3 dims) {
  const Index n = dims.numel();
  return {std::min(dims.d1, n / dims.d1), std::min(dims.d2, n / dims.d2),
          std::min(dims.d3, n / dims.d3)};
}

TuckerFactors hosvd(const Tensor3& t, std::array<Index, 3> ranks) {
  TuckerFactors f;
  for (int j = 0; j < 3; ++j) {
    const int mode = j + 1;
    if (ranks[j] < 1 || ranks[j] > t.dims()[mode]) {
      throw std::invalid_argument("hosvd: rank " + std::to_string(ranks[j]) + " out of range for mode " +
                                  std::to_string(mode));
    }
    f.u[j] = leading_left_vectors(unfold(t, mode).transpose(), ranks[j]);
  }
  f.core = mode_product(mode_product(mode_product(t, f.u[0].transpose(), 1), f.u[1].transpose(), 2),
                        f.u[2].transpose(), 3);
  return f;
}

Tensor3 TuckerFactors::reconstruct() const {
  return mode_product(mode_product(mode_product(core, u[0], 1), u[1], 2), u[2], 3);
}

double orthonormality_error(const Matrix& q) {
  return (q.transpose() * q - Matrix::Identity(q.cols(), q.cols())).norm();
}

}  // namespace swlrtr
