#include "swlrtr/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace swlrtr {

namespace {

struct Eigenpairs {
  Vector values;   // descending
  Matrix vectors;  // matching columns
};

Eigenpairs signal_eigenpairs(const NoiseEstimate& est) {
  const Matrix rs = est.data_corr - est.noise_corr;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rs);
  const Index n = rs.rows();
  Eigenpairs out{eig.eigenvalues().reverse(), eig.eigenvectors().rowwise().reverse()};
  for (Index c = 0; c < n; ++c) {
    Index r = 0;
    while (r < n && std::abs(out.vectors(r, c)) <= 1e-12) ++r;
    if (r < n && out.vectors(r, c) < 0) out.vectors.col(c) *= -1.0;
  }
  return out;
}

}  // namespace

NoiseEstimate estimate_noise(const Tensor3& y, double ridge) {
  const Index bands = y.dims().d3;
  const Index pixels = y.dims().d1 * y.dims().d2;
  if (bands < 3) throw std::invalid_argument("noise estimation needs at least 3 bands");
  if (pixels <= bands) {
    throw std::invalid_argument("noise estimation needs more pixels (" + std::to_string(pixels) +
                                ") than bands (" + std::to_string(bands) + ")");
  }

  const auto ym = y.as_matrix();
  const Matrix gram = ym.transpose() * ym;
  const double rho = ridge * gram.trace() / static_cast<double>(bands);

  // Column b of coef holds e_b - beta_b so that residuals = Y * coef.
  Matrix coef = Matrix::Identity(bands, bands);
  Matrix sub(bands - 1, bands - 1);
  Vector rhs(bands - 1);
  for (Index b = 0; b < bands; ++b) {
    auto src = [b](Index i) { return i < b ? i : i + 1; };
    for (Index i = 0; i < bands - 1; ++i) {
      rhs(i) = gram(src(i), b);
      for (Index j = 0; j < bands - 1; ++j) sub(i, j) = gram(src(i), src(j));
      sub(i, i) += rho;
    }
    const Vector beta = sub.ldlt().solve(rhs);
    for (Index i = 0; i < bands - 1; ++i) coef(src(i), b) = -beta(i);
  }

  NoiseEstimate est;
  est.noise = Tensor3(y.dims());
  est.noise.as_matrix().noalias() = ym * coef;
  const auto w = est.noise.as_matrix();
  const double n = static_cast<double>(pixels);
  est.band_variance = w.colwise().squaredNorm().transpose() / n;
  est.data_corr = gram / n;
  est.noise_corr = w.transpose() * w / n;
  return est;
}

RankSelection select_rank_and_basis(const NoiseEstimate& est) {
  const Eigenpairs eig = signal_eigenpairs(est);
  const Index bands = eig.values.size();
  const Matrix& e = eig.vectors;

  // Floor on the noise power keeps exactly-zero noise directions from being
  // selected through round-off.
  const Matrix rs = est.data_corr - est.noise_corr;
  const Matrix rn = est.noise_corr + (rs.trace() / static_cast<double>(bands) * 1e-10) *
                                         Matrix::Identity(bands, bands);

  RankSelection out;
  out.eigenvalues = eig.values;
  out.cost.resize(bands);
  Index k = 0;
  for (Index i = 0; i < bands; ++i) {
    const double py = e.col(i).dot(est.data_corr * e.col(i));
    const double pn = e.col(i).dot(rn * e.col(i));
    out.cost(i) = -py + 2.0 * pn;
    if (out.cost(i) < 0) ++k;
  }
  k = std::clamp<Index>(k, 1, bands);
  out.basis.a = e.leftCols(k);
  return out;
}

SubspaceBasis basis_with_rank(const NoiseEstimate& est, Index k) {
  const Index bands = est.data_corr.rows();
  if (k < 1 || k > bands) {
    throw std::invalid_argument("subspace dimension " + std::to_string(k) + " outside [1, " +
                                std::to_string(bands) + "]");
  }
  return {signal_eigenpairs(est).vectors.leftCols(k)};
}

Tensor3 project(const Tensor3& y, const SubspaceBasis& basis) {
  if (y.dims().d3 != basis.bands()) {
    throw std::invalid_argument("project: cube has " + std::to_string(y.dims().d3) +
                                " bands, basis has " + std::to_string(basis.bands()));
  }
  return mode_product(y, basis.a.transpose(), 3);
}

Tensor3 reconstruct(const Tensor3& z, const SubspaceBasis& basis) {
  if (z.dims().d3 != basis.k()) {
    throw std::invalid_argument("reconstruct: reduced image has " + std::to_string(z.dims().d3) +
                                " bands, basis dimension is " + std::to_string(basis.k()));
  }
  return mode_product(z, basis.a, 3);
}

}  // namespace swlrtr
