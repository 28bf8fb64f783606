#include "swlrtr/solver.hpp"

#include "swlrtr/metrics.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <stdexcept>

namespace swlrtr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Tensor3 model_residual(const Tensor3& y, const Tensor3& z, const SubspaceBasis& a, const Tensor3& s) {
  Tensor3 r = y;
  r -= reconstruct(z, a);
  r -= s;
  return r;
}

double group_fidelity(const Tensor3& z, const GroupSet& groups) {
  double acc = 0.0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const Tensor3 diff = extract_group(z, groups.index[i], groups.patch) - groups.estimate[i];
    acc += diff.flat().squaredNorm() / groups.sigma2[i];
  }
  return acc;
}

std::vector<double> group_weights(const GroupSet& groups, double lambda1) {
  std::vector<double> w(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) w[i] = 2.0 * lambda1 / groups.sigma2[i];
  return w;
}

// Entries of `residual` covered by the group's member patches, all bands.
std::vector<double> group_support_values(const Tensor3& residual, const GroupIndex& g, Index patch) {
  std::vector<double> out;
  out.reserve(g.members.size() * static_cast<std::size_t>(patch * patch * residual.dims().d3));
  for (const Coord& at : g.members) {
    for (Index b = 0; b < residual.dims().d3; ++b) {
      for (Index dc = 0; dc < patch; ++dc) {
        for (Index dr = 0; dr < patch; ++dr) out.push_back(residual(at.row + dr, at.col + dc, b));
      }
    }
  }
  return out;
}

double relative_change(const Tensor3& now, const Tensor3& before) {
  const double diff = (now.flat() - before.flat()).norm();
  const double base = before.flat().norm();
  if (base == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / base;
}

}  // namespace

std::vector<std::string> SolverConfig::validate(Index bands) const {
  std::vector<std::string> e;
  if (patch < 1) e.emplace_back("p must be >= 1");
  if (q < 1) e.emplace_back("q must be >= 1");
  if (k < 0) e.emplace_back("k must be >= 0 (0 selects it automatically)");
  if (bands > 0 && k > bands) e.emplace_back("k = " + std::to_string(k) + " exceeds the band count " + std::to_string(bands));
  if (!(lambda1 >= 0.0)) e.emplace_back("lambda1 must be >= 0");
  if (!(lambda2 >= 0.0)) e.emplace_back("lambda2 must be >= 0");
  if (!(alpha >= 0.0 && alpha <= 1.0)) e.emplace_back("alpha must lie in [0, 1]");
  if (!(beta >= 0.0)) e.emplace_back("beta must be >= 0");
  if (outer_iters < 1) e.emplace_back("iters must be >= 1");
  if (inner_rounds < 1) e.emplace_back("inner_iters must be >= 1");
  if (max_cycles < 1) e.emplace_back("cycles must be >= 1");
  if (!(tol >= 0.0)) e.emplace_back("tol must be >= 0");
  if (!(c > 0.0)) e.emplace_back("c must be > 0");
  if (!(eps > 0.0)) e.emplace_back("eps must be > 0");
  if (stride < 1) e.emplace_back("stride must be >= 1");
  if (patch >= 1 && stride > patch) e.emplace_back("stride must not exceed p");
  if (window < 1) e.emplace_back("window must be >= 1");
  if (window * window < q) e.emplace_back("window^2 must be at least q");
  for (int j = 0; j < 3; ++j) {
    if (max_ranks[j] < 0) e.emplace_back("rank caps must be >= 0");
  }
  if (threads < 0) e.emplace_back("threads must be >= 0");
  return e;
}

double soft_threshold(double x, double t) {
  const double m = std::abs(x) - t;
  return m > 0.0 ? std::copysign(m, x) : 0.0;
}

double objective(const Tensor3& y, const Tensor3& z, const SubspaceBasis& a, const Tensor3& s,
                 const GroupSet& groups, double lambda1, double lambda2) {
  double nuclear = 0.0;
  for (double v : groups.nuclear) nuclear += v;
  return 0.5 * model_residual(y, z, a, s).flat().squaredNorm() +
         lambda1 * (group_fidelity(z, groups) + nuclear) + lambda2 * l1_norm(s);
}

double sparse_objective(const Tensor3& y, const Tensor3& z, const SubspaceBasis& a, const Tensor3& s,
                        double lambda2) {
  return 0.5 * model_residual(y, z, a, s).flat().squaredNorm() + lambda2 * l1_norm(s);
}

double reduced_objective(const Tensor3& y, const Tensor3& s, const SubspaceBasis& a, const Tensor3& z,
                         const GroupSet& groups, double lambda1) {
  return 0.5 * model_residual(y, z, a, s).flat().squaredNorm() + lambda1 * group_fidelity(z, groups);
}

double basis_objective(const Tensor3& y, const Tensor3& s, const Tensor3& z, const SubspaceBasis& a) {
  return 0.5 * model_residual(y, z, a, s).flat().squaredNorm();
}

Tensor3 update_sparse(const Tensor3& y, const Tensor3& z, const SubspaceBasis& a, double lambda2) {
  Tensor3 r = y;
  r -= reconstruct(z, a);
  for (double& v : r.values()) v = soft_threshold(v, lambda2);
  return r;
}

Tensor3 update_reduced(const Tensor3& y, const Tensor3& s, const SubspaceBasis& a, const GroupSet& groups,
                       double lambda1) {
  const Tensor3 data = project(y - s, a);
  if (groups.size() == 0 || lambda1 == 0.0) return data;
  const auto w = group_weights(groups, lambda1);
  return aggregate(groups.index, groups.estimate, w, data, groups.patch);
}

SubspaceBasis update_basis(const Tensor3& y, const Tensor3& s, const Tensor3& z) {
  const Index bands = y.dims().d3;
  const Index k = z.dims().d3;
  if (k > bands) {
    throw std::invalid_argument("update_basis: subspace dimension " + std::to_string(k) + " exceeds " +
                                std::to_string(bands) + " bands");
  }
  if (!(z.dims().d1 == y.dims().d1 && z.dims().d2 == y.dims().d2)) {
    throw std::invalid_argument("update_basis: spatial dimensions differ");
  }
  const Tensor3 ys = y - s;
  const Matrix m = ys.as_matrix().transpose() * z.as_matrix();
  if (m.norm() == 0.0) return {Matrix::Identity(bands, k)};
  const SvdResult svd = thin_svd(m);
  return {svd.u * svd.vt};
}

Regularized iterate_regularization(const Tensor3& x, const Tensor3& y_orig, double alpha, Index k, double beta,
                                   int n) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");
  Regularized out;
  out.next_input = alpha * x;
  out.next_input += (1.0 - alpha) * y_orig;
  const auto step = static_cast<Index>(std::llround(beta * static_cast<double>(n)));
  out.next_k = std::clamp<Index>(k + step, 1, y_orig.dims().d3);
  return out;
}

double robust_noise_variance(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  auto median = [](std::vector<double>& a) {
    const auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
    std::nth_element(a.begin(), mid, a.end());
    double m = *mid;
    if (a.size() % 2 == 0) m = 0.5 * (m + *std::max_element(a.begin(), mid));
    return m;
  };
  const double med = median(v);
  for (double& x : v) x = std::abs(x - med);
  const double sigma = 1.4826 * median(v);
  return sigma * sigma;
}

DenoiseResult denoise(const Tensor3& y, const SolverConfig& cfg, const Tensor3* truth) {
  const auto t_start = Clock::now();
  const Index bands = y.dims().d3;
  if (auto errors = cfg.validate(bands); !errors.empty()) {
    std::string msg = "invalid solver config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  if (!y.all_finite()) throw std::invalid_argument("denoise: input has non-finite values");
  if (truth != nullptr && !(truth->dims() == y.dims())) {
    throw std::invalid_argument("denoise: ground truth dimensions differ from the input");
  }

  const WlrtrParams wparams{cfg.c, cfg.eps, cfg.inner_rounds, cfg.max_ranks};
  const PatchGrid grid = build_grid(y.dims().d1, y.dims().d2, cfg.patch, cfg.stride);
  const std::vector<Coord> refs = grid.references();

  DenoiseResult res;
  Tensor3 input = y;
  Tensor3 s(y.dims());
  Tensor3 x_hat = y;
  Tensor3 z;
  SubspaceBasis a;
  Index k = cfg.k;

  for (int n = 1; n <= cfg.outer_iters; ++n) {
    const auto t_iter = Clock::now();
    IterationDiagnostics diag;
    diag.iteration = n;

    auto t0 = Clock::now();
    const NoiseEstimate est = estimate_noise(input);
    if (n == 1 && k == 0) {
      a = select_rank_and_basis(est).basis;
      k = a.k();
    } else {
      a = basis_with_rank(est, k);
    }
    if (n == 1) res.initial_k = k;
    diag.k = k;
    // Noise level: regression residuals on the first pass, afterwards the
    // observation minus the current clean and sparse estimates.
    const Tensor3 residual = n == 1 ? est.noise : y - x_hat - s;
    const double global_sigma2 = robust_noise_variance(residual.values());
    z = project(input - s, a);
    res.timings.subspace += seconds_since(t0);

    GroupSet groups;
    groups.patch = cfg.patch;
    groups.index.resize(refs.size());
    groups.estimate.resize(refs.size());
    groups.sigma2.resize(refs.size());
    groups.nuclear.resize(refs.size());
    std::vector<double> match_time(refs.size()), recover_time(refs.size());
    detail::parallel_for(refs.size(), cfg.threads, [&](std::size_t i) {
      auto tm = Clock::now();
      groups.index[i] = block_match(z, refs[i], cfg.patch, cfg.q, cfg.window);
      const Tensor3 zi = extract_group(z, groups.index[i], cfg.patch);
      match_time[i] = seconds_since(tm);
      tm = Clock::now();
      double sigma2 = global_sigma2;
      if (cfg.noise_level == NoiseLevelMode::PerGroup) {
        sigma2 = robust_noise_variance(group_support_values(residual, groups.index[i], cfg.patch));
      }
      sigma2 = std::max(sigma2, 1e-12);
      groups.sigma2[i] = sigma2;
      GroupEstimate ge = denoise_group(zi, sigma2, wparams);
      groups.nuclear[i] = weighted_core_norm(ge.factors.core, ge.weights);
      groups.estimate[i] = std::move(ge.estimate);
      recover_time[i] = seconds_since(tm);
    });
    for (std::size_t i = 0; i < refs.size(); ++i) {
      res.timings.matching += match_time[i];
      res.timings.group_recovery += recover_time[i];
    }
    res.groups_per_iteration = refs.size();
    double sig_sum = 0.0;
    for (double v : groups.sigma2) sig_sum += v;
    diag.sigma2 = sig_sum / static_cast<double>(groups.size());

    t0 = Clock::now();
    z = update_reduced(input, s, a, groups, cfg.lambda1);
    int cycle = 0;
    while (cycle < cfg.max_cycles) {
      ++cycle;
      Tensor3 s_new = update_sparse(input, z, a, cfg.lambda2);
      Tensor3 z_new = update_reduced(input, s_new, a, groups, cfg.lambda1);
      a = update_basis(input, s_new, z_new);
      const double dz = relative_change(z_new, z);
      const double ds = relative_change(s_new, s);
      z = std::move(z_new);
      s = std::move(s_new);
      if (dz < cfg.tol && ds < cfg.tol) break;
    }
    diag.cycles = cycle;
    res.timings.cycles += seconds_since(t0);

    x_hat = reconstruct(z, a);
    if (!x_hat.all_finite()) {
      throw std::runtime_error("denoise: non-finite iterate at outer iteration " + std::to_string(n));
    }
    diag.objective = objective(input, z, a, s, groups, cfg.lambda1, cfg.lambda2);
    if (truth != nullptr) {
      double acc = 0.0;
      for (Index b = 0; b < bands; ++b) {
        diag.band_psnr.push_back(psnr_band(*truth, x_hat, b));
        acc += diag.band_psnr.back();
      }
      diag.mpsnr = acc / static_cast<double>(bands);
    }

    if (n < cfg.outer_iters) {
      Regularized next = iterate_regularization(x_hat, y, cfg.alpha, k, cfg.beta, n);
      input = std::move(next.next_input);
      k = next.next_k;
      // The sparse part of the mixed input shrinks with the observation weight.
      s *= (1.0 - cfg.alpha);
    }
    diag.seconds = seconds_since(t_iter);
    res.iterations.push_back(std::move(diag));
  }

  res.clean = x_hat;
  res.sparse = update_sparse(y, z, a, cfg.lambda2);
  res.reduced = std::move(z);
  res.basis = std::move(a);
  res.timings.total = seconds_since(t_start);
  return res;
}

void write_diagnostics_csv(const DenoiseResult& result, std::ostream& out) {
  out << "iteration,k,sigma2,objective,cycles,seconds,mpsnr";
  const std::size_t nb = result.iterations.empty() ? 0 : result.iterations.front().band_psnr.size();
  for (std::size_t b = 0; b < nb; ++b) out << ",psnr_b" << b;
  out << '\n' << std::setprecision(17);
  for (const auto& d : result.iterations) {
    out << d.iteration << ',' << d.k << ',' << d.sigma2 << ',' << d.objective << ',' << d.cycles << ','
        << d.seconds << ',';
    if (d.mpsnr) out << *d.mpsnr;
    for (double p : d.band_psnr) out << ',' << p;
    out << '\n';
  }
}

}  // namespace swlrtr
