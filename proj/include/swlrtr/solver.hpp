#pragma once

// Mixed-noise removal by subspace representation plus weighted low-rank
// Tucker regularisation of nonlocal patch groups.
//
// The model, over the reduced image Z (n1 x n2 x k), the orthonormal basis
// A (n3 x k), the sparse noise S and the group estimates L_i, is
//
//   1/2 ||Y - Z x3 A - S||_F^2
//     + lambda1 * sum_i ( ||R_i Z - L_i||_F^2 / sigma_i^2 + ||L_i||_{w,*} )
//     + lambda2 * ||S||_1,      A'A = I_k.
//
// Each outer iteration re-estimates A, groups Z, recovers every group with
// the weighted Tucker solver, then alternates closed-form updates of S, Z
// and A. Between outer iterations a fraction of the observation is mixed
// back into the input and the subspace dimension grows.

#include "swlrtr/patch.hpp"
#include "swlrtr/subspace.hpp"
#include "swlrtr/wlrtr.hpp"

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace swlrtr {

enum class NoiseLevelMode { Global, PerGroup };

struct SolverConfig {
  Index patch = 5;
  Index q = 70;
  Index k = 0;  // 0: select by the minimum-error subspace criterion
  double lambda1 = 0.2;
  double lambda2 = 0.1;
  double alpha = 0.9;
  double beta = 1.0;
  int outer_iters = 6;   // N
  int inner_rounds = 2;  // N0
  int max_cycles = 10;   // N1
  double tol = 1e-4;
  double c = 1.4142135623730951;
  double eps = 1e-16;
  Index stride = 4;
  Index window = 30;
  NoiseLevelMode noise_level = NoiseLevelMode::Global;
  std::array<Index, 3> max_ranks{0, 0, 0};
  int threads = 0;  // 0: all hardware threads

  // Every violated constraint, one message each. bands = 0 skips the
  // checks that need the cube size.
  std::vector<std::string> validate(Index bands = 0) const;
};

// Groups, their current estimates and per-group constants for one outer
// iteration.
struct GroupSet {
  Index patch = 0;
  std::vector<GroupIndex> index;
  std::vector<Tensor3> estimate;  // L_i
  std::vector<double> sigma2;     // sigma_i^2
  std::vector<double> nuclear;    // ||L_i||_{w,*} evaluated on the final core

  std::size_t size() const { return index.size(); }
};

double soft_threshold(double x, double t);

// Full model objective.
double objective(const Tensor3& y, const Tensor3& z, const SubspaceBasis& a, const Tensor3& s,
                 const GroupSet& groups, double lambda1, double lambda2);

// Subproblem objectives of the S, Z and A updates.
double sparse_objective(const Tensor3& y, const Tensor3& z, const SubspaceBasis& a, const Tensor3& s,
                        double lambda2);
double reduced_objective(const Tensor3& y, const Tensor3& s, const SubspaceBasis& a, const Tensor3& z,
                         const GroupSet& groups, double lambda1);
double basis_objective(const Tensor3& y, const Tensor3& s, const Tensor3& z, const SubspaceBasis& a);

// S = soft_threshold(Y - Z x3 A, lambda2)
Tensor3 update_sparse(const Tensor3& y, const Tensor3& z, const SubspaceBasis& a, double lambda2);

// Closed-form Z with data term (Y - S) x3 A' and group weights
// 2 lambda1 / sigma_i^2.
Tensor3 update_reduced(const Tensor3& y, const Tensor3& s, const SubspaceBasis& a, const GroupSet& groups,
                       double lambda1);

// Orthogonal Procrustes: A = U V' from the SVD of M = (Y - S)_(3)' Z_(3).
SubspaceBasis update_basis(const Tensor3& y, const Tensor3& s, const Tensor3& z);

struct Regularized {
  Tensor3 next_input;
  Index next_k = 0;
};
// next_input = alpha x + (1 - alpha) y_orig; next_k = k + round(beta n)
// clamped to [1, bands].
Regularized iterate_regularization(const Tensor3& x, const Tensor3& y_orig, double alpha, Index k,
                                   double beta, int n);

// (1.4826 * MAD)^2 of all entries.
double robust_noise_variance(std::span<const double> values);

struct IterationDiagnostics {
  int iteration = 0;
  Index k = 0;
  double sigma2 = 0.0;  // mean over groups
  double objective = 0.0;
  int cycles = 0;
  double seconds = 0.0;
  std::optional<double> mpsnr;
  std::vector<double> band_psnr;
};

struct StageTimings {
  double subspace = 0.0;
  double matching = 0.0;
  double group_recovery = 0.0;
  double cycles = 0.0;
  double total = 0.0;
};

struct DenoiseResult {
  Tensor3 clean;   // X = Z x3 A
  Tensor3 sparse;  // S for the observation: soft_threshold(Y - X, lambda2)
  Tensor3 reduced;
  SubspaceBasis basis;
  Index initial_k = 0;
  std::size_t groups_per_iteration = 0;
  std::vector<IterationDiagnostics> iterations;
  StageTimings timings;
};

// Throws std::invalid_argument when the config does not validate and
// std::runtime_error if the iterate becomes non-finite.
DenoiseResult denoise(const Tensor3& y, const SolverConfig& cfg, const Tensor3* truth = nullptr);

// iteration,k,sigma2,objective,cycles,seconds,mpsnr[,psnr_b0,...]
void write_diagnostics_csv(const DenoiseResult& result, std::ostream& out);

}  // namespace swlrtr
