#pragma once

// Simulated mixed-noise degradations: band-wise Gaussian noise, salt-and-pepper
// impulses on a subset of bands and zeroed vertical stripes ("deadlines").

#include "swlrtr/cube_io.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace swlrtr {

struct NoiseSpec {
  int case_id = 1;
  // Per-band standard deviation drawn uniformly from [sigma_lo, sigma_hi];
  // equal bounds give a fixed sigma.
  double sigma_lo = 0.1;
  double sigma_hi = 0.1;
  int impulse_bands = 0;
  double impulse_fraction = 0.0;
  // Deadline bands are picked partly from the impulse bands and partly from
  // the remaining bands.
  int deadline_bands_from_impulse = 0;
  int deadline_bands_other = 0;
  int deadlines_per_band = 3;
  int deadline_width_min = 1;
  int deadline_width_max = 3;
  std::uint64_t seed = 0;

  // The four simulated settings: 1 fixed sigma 0.1, 2 sigma in [0.1, 0.2],
  // 3 adds 20 % impulses on 20 bands, 4 adds deadlines on 10 + 10 bands.
  static NoiseSpec for_case(int case_id, std::uint64_t seed);

  // Throws std::invalid_argument on out-of-range fields.
  void validate(Index bands) const;
};

// Mask codes combine bitwise.
inline constexpr std::uint8_t kMaskImpulse = 1;
inline constexpr std::uint8_t kMaskDeadline = 2;

struct DeadlineStripe {
  Index band = 0;
  Index first_col = 0;
  Index width = 1;
};

struct NoiseRecord {
  std::vector<double> band_sigma;
  std::vector<Index> impulse_bands;
  std::vector<Index> deadline_bands;
  std::vector<DeadlineStripe> stripes;
  // Same dims as the cube; element value is a bitwise OR of kMask* codes.
  Tensor3 mask;
};

struct NoisyCube {
  HsiCube noisy;
  NoiseRecord truth;
};

NoisyCube add_case_noise(const HsiCube& clean, const NoiseSpec& spec);

}  // namespace swlrtr
