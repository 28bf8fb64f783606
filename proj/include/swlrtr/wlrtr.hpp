#pragma once

// Weighted low-rank Tucker recovery of a single patch group.
//
// For a group tensor Z the estimate L = G x1 U1 x2 U2 x3 U3 minimises
//
//   ||Z - G x1 U1 x2 U2 x3 U3||_F^2 + sigma^2 * ||w o G||_1,   U_j'U_j = I,
//
// by alternating orthogonal Procrustes updates of the factors with a soft
// threshold of the core. Core weights are reweighted every round from the
// current core magnitudes: w = c * sqrt(q) / (|g| + eps).

#include "swlrtr/tensor.hpp"

#include <array>
#include <span>

namespace swlrtr {

struct WlrtrParams {
  double c = 1.4142135623730951;  // sqrt(2)
  double eps = 1e-16;
  int rounds = 2;
  // Per-mode cap on the Tucker ranks; 0 keeps the full rank.
  std::array<Index, 3> max_ranks{0, 0, 0};
};

struct WeightVector {
  Vector w;
};

// w_j = c * sqrt(q) / (|sigma_j| + eps)
WeightVector compute_weights(std::span<const double> sigma, double c, Index q, double eps);

// Elementwise weights for a core tensor, each entry weighted by its own
// magnitude.
Tensor3 core_weights(const Tensor3& core, double c, Index q, double eps);

// Procrustes update of factor `mode` (1..3) with the other factors and the
// core held fixed: U = P Q' where P S Q' is the SVD of
// Z_(j) (U_b kron U_a) G_(j)'. A vanishing cross matrix returns the leading
// columns of the identity.
Matrix update_factor(const Tensor3& zi, const TuckerFactors& f, int mode);

// sign(o) * max(|o| - w * sigma2 / 2, 0), elementwise.
Tensor3 shrink_core(const Tensor3& o, const Tensor3& weights, double sigma2);

// The group objective above with the given weights.
double group_objective(const Tensor3& zi, const TuckerFactors& f, const Tensor3& weights, double sigma2);

// sum |w o G|: the weighted tensor nuclear term evaluated on the core.
double weighted_core_norm(const Tensor3& core, const Tensor3& weights);

struct GroupEstimate {
  Tensor3 estimate;      // L
  TuckerFactors factors;
  Tensor3 weights;       // weights used for the final shrinkage
};

// One reweighting round with frozen weights: update U1, U2, U3, then the core.
void wlrtr_round(const Tensor3& zi, TuckerFactors& f, const Tensor3& weights, double sigma2);

GroupEstimate denoise_group(const Tensor3& zi, double sigma2, const WlrtrParams& params = {});

}  // namespace swlrtr
