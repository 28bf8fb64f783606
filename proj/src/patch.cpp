#include "swlrtr/patch.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace swlrtr {

namespace {

std::vector<Index> axis_refs(Index n, Index patch, Index stride) {
  std::vector<Index> refs;
  const Index last = n - patch;
  for (Index r = 0; r <= last; r += stride) refs.push_back(r);
  if (refs.back() != last) refs.push_back(last);
  return refs;
}

void check_coord(const Tensor3& z, Coord c, Index patch) {
  if (c.row < 0 || c.col < 0 || c.row + patch > z.dims().d1 || c.col + patch > z.dims().d2) {
    throw std::out_of_range("patch at (" + std::to_string(c.row) + ", " + std::to_string(c.col) +
                            ") does not fit in the image");
  }
}

double patch_distance(const Tensor3& z, Coord a, Coord b, Index patch) {
  double d = 0.0;
  for (Index k = 0; k < z.dims().d3; ++k) {
    for (Index dc = 0; dc < patch; ++dc) {
      for (Index dr = 0; dr < patch; ++dr) {
        const double diff = z(a.row + dr, a.col + dc, k) - z(b.row + dr, b.col + dc, k);
        d += diff * diff;
      }
    }
  }
  return d;
}

}  // namespace

std::vector<Coord> PatchGrid::references() const {
  std::vector<Coord> out;
  out.reserve(row_refs.size() * col_refs.size());
  for (Index r : row_refs) {
    for (Index c : col_refs) out.push_back({r, c});
  }
  return out;
}

PatchGrid build_grid(Index rows, Index cols, Index patch, Index stride) {
  if (patch < 1 || stride < 1) throw std::invalid_argument("patch size and stride must be >= 1");
  if (stride > patch) throw std::invalid_argument("stride must not exceed the patch size");
  if (patch > std::min(rows, cols)) {
    throw std::invalid_argument("patch size " + std::to_string(patch) + " exceeds image size " +
                                std::to_string(rows) + " x " + std::to_string(cols));
  }
  return {patch, stride, axis_refs(rows, patch, stride), axis_refs(cols, patch, stride)};
}

std::vector<Coord> search_candidates(Index rows, Index cols, Coord ref, Index patch, Index window) {
  auto span = [&](Index centre, Index n) {
    const Index last = n - patch;
    const Index w = std::min(window, last + 1);
    const Index start = std::clamp(centre - (w - 1) / 2, Index{0}, last - w + 1);
    return std::pair{start, start + w - 1};
  };
  const auto [r0, r1] = span(ref.row, rows);
  const auto [c0, c1] = span(ref.col, cols);
  std::vector<Coord> out;
  out.reserve(static_cast<std::size_t>((r1 - r0 + 1) * (c1 - c0 + 1)));
  for (Index r = r0; r <= r1; ++r) {
    for (Index c = c0; c <= c1; ++c) out.push_back({r, c});
  }
  return out;
}

GroupIndex block_match(const Tensor3& z, Coord ref, Index patch, Index q, Index window) {
  check_coord(z, ref, patch);
  if (q < 1) throw std::invalid_argument("q must be >= 1");
  if (window < 1) throw std::invalid_argument("search window must be >= 1");
  const auto cands = search_candidates(z.dims().d1, z.dims().d2, ref, patch, window);
  if (static_cast<Index>(cands.size()) < q) {
    throw std::invalid_argument("search window holds " + std::to_string(cands.size()) +
                                " candidate patches, fewer than q = " + std::to_string(q));
  }

  struct Scored {
    double dist;
    Coord at;
  };
  std::vector<Scored> scored;
  scored.reserve(cands.size());
  for (const Coord& c : cands) {
    if (c == ref) continue;
    scored.push_back({patch_distance(z, ref, c, patch), c});
  }
  const auto take = static_cast<std::ptrdiff_t>(q - 1);
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), [](const Scored& a, const Scored& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.at < b.at);
  });

  GroupIndex g;
  g.reference = ref;
  g.members.reserve(static_cast<std::size_t>(q));
  g.distances.reserve(static_cast<std::size_t>(q));
  g.members.push_back(ref);
  g.distances.push_back(0.0);
  for (std::ptrdiff_t i = 0; i < take; ++i) {
    g.members.push_back(scored[static_cast<std::size_t>(i)].at);
    g.distances.push_back(scored[static_cast<std::size_t>(i)].dist);
  }
  return g;
}

Tensor3 extract_group(const Tensor3& z, const GroupIndex& group, Index patch) {
  const auto q = static_cast<Index>(group.members.size());
  const Index k = z.dims().d3;
  Tensor3 g({patch * patch, q, k});
  for (Index j = 0; j < q; ++j) {
    const Coord at = group.members[static_cast<std::size_t>(j)];
    check_coord(z, at, patch);
    for (Index b = 0; b < k; ++b) {
      for (Index dr = 0; dr < patch; ++dr) {
        for (Index dc = 0; dc < patch; ++dc) g(dr * patch + dc, j, b) = z(at.row + dr, at.col + dc, b);
      }
    }
  }
  return g;
}

void scatter_add(const Tensor3& g, const GroupIndex& group, Index patch, double weight, Tensor3& out) {
  const auto q = static_cast<Index>(group.members.size());
  const Index k = out.dims().d3;
  if (!(g.dims() == Dims3{patch * patch, q, k})) {
    throw std::invalid_argument("scatter_add: group tensor shape does not match its index");
  }
  for (Index j = 0; j < q; ++j) {
    const Coord at = group.members[static_cast<std::size_t>(j)];
    check_coord(out, at, patch);
    for (Index b = 0; b < k; ++b) {
      for (Index dr = 0; dr < patch; ++dr) {
        for (Index dc = 0; dc < patch; ++dc) out(at.row + dr, at.col + dc, b) += weight * g(dr * patch + dc, j, b);
      }
    }
  }
}

Tensor3 membership_counts(std::span<const GroupIndex> groups, Index patch, Dims3 dims) {
  Tensor3 counts(dims);
  for (const auto& g : groups) {
    for (const Coord& at : g.members) {
      check_coord(counts, at, patch);
      for (Index b = 0; b < dims.d3; ++b) {
        for (Index dc = 0; dc < patch; ++dc) {
          for (Index dr = 0; dr < patch; ++dr) counts(at.row + dr, at.col + dc, b) += 1.0;
        }
      }
    }
  }
  return counts;
}

Tensor3 aggregate(std::span<const GroupIndex> groups, std::span<const Tensor3> estimates,
                  std::span<const double> weights, const Tensor3& data_term, Index patch) {
  if (groups.size() != estimates.size() || groups.size() != weights.size()) {
    throw std::invalid_argument("aggregate: groups, estimates and weights differ in length");
  }
  Tensor3 numer = data_term;
  Tensor3 denom(data_term.dims(), 1.0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double w = weights[i];
    scatter_add(estimates[i], groups[i], patch, w, numer);
    for (const Coord& at : groups[i].members) {
      for (Index b = 0; b < denom.dims().d3; ++b) {
        for (Index dc = 0; dc < patch; ++dc) {
          for (Index dr = 0; dr < patch; ++dr) denom(at.row + dr, at.col + dc, b) += w;
        }
      }
    }
  }
  numer.flat().array() /= denom.flat().array();
  return numer;
}

}  // namespace swlrtr
