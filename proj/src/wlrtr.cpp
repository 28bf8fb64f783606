#include "swlrtr/wlrtr.hpp"

#include <cmath>
#include <stdexcept>

namespace swlrtr {

WeightVector compute_weights(std::span<const double> sigma, double c, Index q, double eps) {
  WeightVector out{Vector(static_cast<Index>(sigma.size()))};
  const double scale = c * std::sqrt(static_cast<double>(q));
  for (std::size_t j = 0; j < sigma.size(); ++j) {
    out.w(static_cast<Index>(j)) = scale / (std::abs(sigma[j]) + eps);
  }
  return out;
}

Tensor3 core_weights(const Tensor3& core, double c, Index q, double eps) {
  Tensor3 w(core.dims());
  const auto sig = core.values();
  const WeightVector wv = compute_weights(sig, c, q, eps);
  w.flat() = wv.w;
  return w;
}

Matrix update_factor(const Tensor3& zi, const TuckerFactors& f, int mode) {
  if (mode < 1 || mode > 3) throw std::invalid_argument("update_factor: invalid mode");
  const int j = mode - 1;
  // Project Z onto the other two factors, then correlate with the core.
  Tensor3 projected = zi;
  for (int other = 0; other < 3; ++other) {
    if (other != j) projected = mode_product(projected, f.u[other].transpose(), other + 1);
  }
  const Matrix cross = unfold(projected, mode).transpose() * unfold(f.core, mode);
  const Index d = cross.rows();
  const Index r = cross.cols();
  if (cross.norm() <= 1e-300) return Matrix::Identity(d, r);
  const SvdResult svd = thin_svd(cross);
  return svd.u * svd.vt;
}

Tensor3 shrink_core(const Tensor3& o, const Tensor3& weights, double sigma2) {
  if (!(o.dims() == weights.dims())) throw std::invalid_argument("shrink_core: shape mismatch");
  Tensor3 g(o.dims());
  const auto ov = o.flat().array();
  const auto thr = weights.flat().array() * (sigma2 / 2.0);
  g.flat() = ov.sign() * (ov.abs() - thr).max(0.0);
  return g;
}

double weighted_core_norm(const Tensor3& core, const Tensor3& weights) {
  return (core.flat().array().abs() * weights.flat().array()).sum();
}

double group_objective(const Tensor3& zi, const TuckerFactors& f, const Tensor3& weights, double sigma2) {
  const Tensor3 residual = zi - f.reconstruct();
  const double fit = residual.flat().squaredNorm();
  return fit + sigma2 * weighted_core_norm(f.core, weights);
}

void wlrtr_round(const Tensor3& zi, TuckerFactors& f, const Tensor3& weights, double sigma2) {
  for (int mode = 1; mode <= 3; ++mode) f.u[mode - 1] = update_factor(zi, f, mode);
  const Tensor3 o = mode_product(
      mode_product(mode_product(zi, f.u[0].transpose(), 1), f.u[1].transpose(), 2), f.u[2].transpose(), 3);
  f.core = shrink_core(o, weights, sigma2);
}

GroupEstimate denoise_group(const Tensor3& zi, double sigma2, const WlrtrParams& params) {
  if (params.rounds < 1) throw std::invalid_argument("denoise_group: rounds must be >= 1");
  if (!(params.c > 0.0) || !(params.eps > 0.0)) throw std::invalid_argument("denoise_group: need c > 0, eps > 0");
  std::array<Index, 3> ranks = full_ranks(zi.dims());
  for (int j = 0; j < 3; ++j) {
    if (params.max_ranks[j] > 0) ranks[j] = std::min(ranks[j], params.max_ranks[j]);
  }
  const Index q = zi.dims().d2;

  GroupEstimate out;
  out.factors = hosvd(zi, ranks);
  for (int round = 0; round < params.rounds; ++round) {
    out.weights = core_weights(out.factors.core, params.c, q, params.eps);
    wlrtr_round(zi, out.factors, out.weights, sigma2);
  }
  out.estimate = out.factors.reconstruct();
  return out;
}

}  // namespace swlrtr
