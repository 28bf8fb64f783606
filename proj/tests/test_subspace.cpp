#include "doctest.h"
#include "support.hpp"

#include "swlrtr/subspace.hpp"

#include <cmath>
#include <random>

using namespace swlrtr;
using namespace swlrtr::testing;

namespace {

// rows*cols x bands mixture with `rank` random nonnegative endmembers.
Tensor3 mixture(Index rows, Index cols, Index bands, Index rank, std::uint64_t seed, double noise) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, noise);
  Matrix e(bands, rank), ab(rows * cols, rank);
  for (Index j = 0; j < rank; ++j)
    for (Index b = 0; b < bands; ++b) e(b, j) = u(rng);
  for (Index j = 0; j < rank; ++j)
    for (Index p = 0; p < rows * cols; ++p) ab(p, j) = u(rng);
  Tensor3 t({rows, cols, bands});
  t.as_matrix() = ab * e.transpose();
  if (noise > 0.0)
    for (double& v : t.values()) v += nd(rng);
  return t;
}

}  // namespace

TEST_CASE("noiseless rank-one cube") {
  const Vector spectrum = Vector::LinSpaced(8, 0.2, 0.9);
  Vector abundance(100);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  for (Index i = 0; i < 100; ++i) abundance(i) = u(rng);
  Tensor3 y({10, 10, 8});
  y.as_matrix() = abundance * spectrum.transpose();

  const NoiseEstimate est = estimate_noise(y);
  const double rms = std::sqrt(est.noise.flat().squaredNorm() / static_cast<double>(y.size()));
  CHECK(rms < 1e-8);

  const RankSelection sel = select_rank_and_basis(est);
  REQUIRE(sel.basis.k() == 1);
  const double cosang = std::abs(sel.basis.a.col(0).dot(spectrum.normalized()));
  CHECK(std::acos(std::min(cosang, 1.0)) < 1e-6);
}

TEST_CASE("rank-three mixture with tiny noise selects k = 3") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Tensor3 y = mixture(20, 20, 16, 3, seed, 1e-4);
    const RankSelection sel = select_rank_and_basis(estimate_noise(y));
    CHECK(sel.basis.k() == 3);
    CHECK(orthonormality_error(sel.basis.a) < 1e-8);
    CHECK(sel.eigenvalues.size() == 16);
    CHECK(sel.cost.size() == 16);
  }
}

TEST_CASE("pure noise selects a small subspace") {
  const Tensor3 y = random_tensor({24, 24, 12}, 5, 0.1);
  const RankSelection sel = select_rank_and_basis(estimate_noise(y));
  CHECK(sel.basis.k() >= 1);
  CHECK(sel.basis.k() <= 3);
}

TEST_CASE("noise estimation preconditions") {
  CHECK_THROWS_AS(estimate_noise(random_tensor({2, 2, 8}, 1)), std::invalid_argument);
  CHECK_THROWS_AS(estimate_noise(random_tensor({5, 5, 2}, 1)), std::invalid_argument);
}

TEST_CASE("noise variance estimate tracks injected noise") {
  const Tensor3 y = mixture(32, 32, 16, 3, 4, 0.05);
  const NoiseEstimate est = estimate_noise(y);
  // Regressors carry noise too, which inflates the residual a little.
  for (Index b = 0; b < 16; ++b) {
    CHECK(est.band_variance(b) > 0.8 * 0.0025);
    CHECK(est.band_variance(b) < 1.6 * 0.0025);
  }
}

TEST_CASE("projection identities") {
  const Tensor3 y = random_tensor({4, 3, 6}, 8);
  CHECK(max_abs_diff(project(y, SubspaceBasis{Matrix::Identity(6, 6)}), y) == 0.0);

  const SubspaceBasis a{random_orthonormal(6, 2, 9)};
  const Tensor3 z0 = random_tensor({4, 3, 2}, 10);
  CHECK(max_abs_diff(project(reconstruct(z0, a), a), z0) < 1e-12);

  const Tensor3 p1 = reconstruct(project(y, a), a);
  CHECK(max_abs_diff(reconstruct(project(p1, a), a), p1) < 1e-12);
  CHECK(frobenius_norm(project(y, a)) <= frobenius_norm(y) + 1e-12);

  CHECK_THROWS_AS(project(random_tensor({4, 3, 5}, 1), a), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct(random_tensor({4, 3, 3}, 1), a), std::invalid_argument);
}

TEST_CASE("basis_with_rank bounds") {
  const NoiseEstimate est = estimate_noise(mixture(10, 10, 6, 2, 3, 0.01));
  CHECK(basis_with_rank(est, 4).k() == 4);
  CHECK(orthonormality_error(basis_with_rank(est, 6).a) < 1e-10);
  CHECK_THROWS_AS(basis_with_rank(est, 0), std::invalid_argument);
  CHECK_THROWS_AS(basis_with_rank(est, 7), std::invalid_argument);
}
