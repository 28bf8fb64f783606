#include "swlrtr/noise.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace swlrtr {

NoiseSpec NoiseSpec::for_case(int case_id, std::uint64_t seed) {
  if (case_id < 1 || case_id > 4) {
    throw std::invalid_argument("noise case must be 1, 2, 3 or 4 (got " + std::to_string(case_id) + ")");
  }
  NoiseSpec s;
  s.case_id = case_id;
  s.seed = seed;
  if (case_id >= 2) s.sigma_hi = 0.2;
  if (case_id >= 3) {
    s.impulse_bands = 20;
    s.impulse_fraction = 0.2;
  }
  if (case_id == 4) {
    s.deadline_bands_from_impulse = 10;
    s.deadline_bands_other = 10;
  }
  return s;
}

void NoiseSpec::validate(Index bands) const {
  std::vector<std::string> errors;
  if (!(sigma_lo >= 0.0) || !(sigma_hi >= sigma_lo)) errors.emplace_back("need 0 <= sigma_lo <= sigma_hi");
  if (!(impulse_fraction >= 0.0 && impulse_fraction <= 1.0)) errors.emplace_back("impulse fraction outside [0, 1]");
  if (impulse_bands < 0 || impulse_bands > bands) {
    errors.emplace_back("impulse band count " + std::to_string(impulse_bands) + " exceeds band count " +
                        std::to_string(bands));
  }
  if (deadline_bands_from_impulse < 0 || deadline_bands_from_impulse > impulse_bands) {
    errors.emplace_back("deadline bands taken from impulse bands exceed the impulse band count");
  }
  if (deadline_bands_other < 0 || deadline_bands_other > bands - impulse_bands) {
    errors.emplace_back("deadline band count exceeds the number of non-impulse bands");
  }
  if (deadline_width_min < 1 || deadline_width_max < deadline_width_min) {
    errors.emplace_back("deadline widths must satisfy 1 <= min <= max");
  }
  if (deadlines_per_band < 1) errors.emplace_back("deadlines per band must be >= 1");
  if (!errors.empty()) {
    std::string msg = "invalid noise spec:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
}

NoisyCube add_case_noise(const HsiCube& clean, const NoiseSpec& spec) {
  const auto [rows, cols, bands] = clean.dims();
  spec.validate(bands);

  std::mt19937_64 rng(spec.seed);
  NoisyCube out{clean, {}};
  NoiseRecord& rec = out.truth;
  rec.mask = Tensor3(clean.dims());
  Tensor3& y = out.noisy.data;

  std::uniform_real_distribution<double> sigma_draw(spec.sigma_lo, spec.sigma_hi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  rec.band_sigma.resize(static_cast<std::size_t>(bands));
  for (Index b = 0; b < bands; ++b) {
    const double sigma = spec.sigma_lo == spec.sigma_hi ? spec.sigma_lo : sigma_draw(rng);
    rec.band_sigma[static_cast<std::size_t>(b)] = sigma;
    if (sigma == 0.0) continue;
    for (Index c = 0; c < cols; ++c) {
      for (Index r = 0; r < rows; ++r) y(r, c, b) += sigma * gauss(rng);
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(bands));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  rec.impulse_bands.assign(order.begin(), order.begin() + spec.impulse_bands);
  std::sort(rec.impulse_bands.begin(), rec.impulse_bands.end());

  const Index pixels = rows * cols;
  const auto n_impulse = static_cast<Index>(spec.impulse_fraction * static_cast<double>(pixels));
  std::vector<Index> pix(static_cast<std::size_t>(pixels));
  std::bernoulli_distribution salt(0.5);
  for (Index b : rec.impulse_bands) {
    std::iota(pix.begin(), pix.end(), Index{0});
    std::shuffle(pix.begin(), pix.end(), rng);
    for (Index n = 0; n < n_impulse; ++n) {
      const Index r = pix[static_cast<std::size_t>(n)] % rows;
      const Index c = pix[static_cast<std::size_t>(n)] / rows;
      y(r, c, b) = salt(rng) ? 1.0 : 0.0;
      rec.mask(r, c, b) = kMaskImpulse;
    }
  }

  // Impulse bands occupy order[0, impulse_bands); "other" bands come after.
  std::vector<Index> from_impulse(order.begin(), order.begin() + spec.impulse_bands);
  std::shuffle(from_impulse.begin(), from_impulse.end(), rng);
  rec.deadline_bands.assign(from_impulse.begin(), from_impulse.begin() + spec.deadline_bands_from_impulse);
  rec.deadline_bands.insert(rec.deadline_bands.end(), order.begin() + spec.impulse_bands,
                            order.begin() + spec.impulse_bands + spec.deadline_bands_other);
  std::sort(rec.deadline_bands.begin(), rec.deadline_bands.end());

  std::uniform_int_distribution<Index> width_draw(spec.deadline_width_min, spec.deadline_width_max);
  std::uniform_int_distribution<Index> col_draw(0, cols - 1);
  for (Index b : rec.deadline_bands) {
    for (int s = 0; s < spec.deadlines_per_band; ++s) {
      const Index first = col_draw(rng);
      const Index width = std::min(width_draw(rng), cols - first);
      rec.stripes.push_back({b, first, width});
      for (Index c = first; c < first + width; ++c) {
        for (Index r = 0; r < rows; ++r) {
          y(r, c, b) = 0.0;
          rec.mask(r, c, b) = static_cast<double>(static_cast<int>(rec.mask(r, c, b)) | kMaskDeadline);
        }
      }
    }
  }
  return out;
}

}  // namespace swlrtr
