#pragma once

#include "swlrtr/cube_io.hpp"

#include <cstdint>

namespace swlrtr {

// Linear mixture of `rank` smooth endmember spectra with piecewise-smooth
// abundance maps (a few rectangular and disc-shaped regions over a gentle
// gradient). The spectral rank of the result is exactly `rank`; values are
// normalised to [0, 1].
HsiCube make_mixture_cube(Index rows, Index cols, Index bands, Index rank, std::uint64_t seed);

}  // namespace swlrtr
