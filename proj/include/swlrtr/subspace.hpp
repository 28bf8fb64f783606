#pragma once

// Spectral subspace identification and the mode-3 projection X = Z x3 A.
//
// Noise is estimated by multiple regression: every band is regressed on all
// other bands over the n1*n2 pixels and the residual is taken as noise. The
// subspace rank is then chosen by the minimum-error criterion: an
// eigenvector e of the signal correlation is kept when projecting onto it
// reduces the expected squared error, i.e. when -e'Ry e + 2 e'Rn e < 0.

#include "swlrtr/tensor.hpp"

namespace swlrtr {

struct SubspaceBasis {
  Matrix a;  // n3 x k, orthonormal columns

  Index bands() const { return a.rows(); }
  Index k() const { return a.cols(); }
};

struct NoiseEstimate {
  Tensor3 noise;          // regression residuals, same dims as the input
  Vector band_variance;   // mean square residual per band
  Matrix data_corr;       // Ry = Y'Y / N over the N pixels
  Matrix noise_corr;      // Rn = W'W / N over the residuals W
};

struct RankSelection {
  SubspaceBasis basis;
  Vector eigenvalues;  // of Ry - Rn, descending
  Vector cost;         // -e'Ry e + 2 e'Rn e for each eigenvector, same order
};

// Relative ridge added to the regression normal equations, scaled by
// trace(Y'Y) / n3.
inline constexpr double kRegressionRidge = 1e-10;

// Requires at least three bands and more pixels than bands.
NoiseEstimate estimate_noise(const Tensor3& y, double ridge = kRegressionRidge);

// Rank by the minimum-error criterion, clamped to [1, n3]; the basis holds
// the leading eigenvectors of Ry - Rn.
RankSelection select_rank_and_basis(const NoiseEstimate& est);

// Leading-k eigenvectors of Ry - Rn with no rank selection.
SubspaceBasis basis_with_rank(const NoiseEstimate& est, Index k);

// z = y x3 A^T
Tensor3 project(const Tensor3& y, const SubspaceBasis& basis);
// x = z x3 A
Tensor3 reconstruct(const Tensor3& z, const SubspaceBasis& basis);

}  // namespace swlrtr
