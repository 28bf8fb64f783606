#pragma once

// Nonlocal patch grouping on the reduced image.
//
// A group gathers q patches of size p x p x k (the reference patch and its
// q - 1 nearest neighbours inside a search window) into a p^2 x q x k
// tensor. Mode 1 runs over the pixels of a patch in row-major order, mode 2
// over the matched patches in order of increasing distance, mode 3 over the
// reduced bands. extract_group() is the gather operator R_i and
// scatter_add() its adjoint R_i^T.

#include "swlrtr/tensor.hpp"

#include <compare>
#include <span>
#include <vector>

namespace swlrtr {

struct Coord {
  Index row = 0;
  Index col = 0;
  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

struct PatchGrid {
  Index patch = 0;
  Index stride = 0;
  std::vector<Index> row_refs;
  std::vector<Index> col_refs;

  // All reference top-left corners, row-major.
  std::vector<Coord> references() const;
};

struct GroupIndex {
  Coord reference;
  std::vector<Coord> members;     // members[0] == reference
  std::vector<double> distances;  // squared Euclidean, nondecreasing after the first
};

// References at multiples of stride along each axis, plus the last valid
// position so the bottom and right borders are covered. stride <= patch,
// so every pixel lies in at least one reference patch.
PatchGrid build_grid(Index rows, Index cols, Index patch, Index stride);

// Candidate top-left corners inside a window x window square roughly
// centred on ref, shifted to stay inside the image.
std::vector<Coord> search_candidates(Index rows, Index cols, Coord ref, Index patch, Index window);

// The q candidates closest to the reference patch. The reference comes
// first; the rest are ordered by distance, ties broken by row-major scan
// order.
GroupIndex block_match(const Tensor3& z, Coord ref, Index patch, Index q, Index window);

Tensor3 extract_group(const Tensor3& z, const GroupIndex& group, Index patch);

// out += weight * R_i^T g
void scatter_add(const Tensor3& g, const GroupIndex& group, Index patch, double weight, Tensor3& out);

// Diagonal of sum_i R_i^T R_i (group memberships per element), n1 x n2 x k.
Tensor3 membership_counts(std::span<const GroupIndex> groups, Index patch, Dims3 dims);

// Closed-form minimiser of
//   1/2 ||z - data||^2 + sum_i (w_i / 2) ||R_i z - L_i||^2
// i.e. z = (data + sum_i w_i R_i^T L_i) / (1 + sum_i w_i R_i^T R_i), which is
// elementwise because every R_i^T R_i is diagonal. Accumulation follows the
// group order so the result does not depend on scheduling.
Tensor3 aggregate(std::span<const GroupIndex> groups, std::span<const Tensor3> estimates,
                  std::span<const double> weights, const Tensor3& data_term, Index patch);

}  // namespace swlrtr
