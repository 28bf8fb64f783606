#include "swlrtr/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace swlrtr {

HsiCube make_mixture_cube(Index rows, Index cols, Index bands, Index rank, std::uint64_t seed) {
  if (rank < 1 || rank > bands) throw std::invalid_argument("mixture rank must lie in [1, bands]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Matrix spectra(bands, rank);
  for (Index r = 0; r < rank; ++r) {
    const double freq = 0.5 + 1.5 * u01(rng);
    const double phase = 2.0 * std::numbers::pi * u01(rng);
    const double slope = u01(rng) - 0.5;
    for (Index b = 0; b < bands; ++b) {
      const double t = static_cast<double>(b) / static_cast<double>(std::max<Index>(bands - 1, 1));
      spectra(b, r) = 0.5 + 0.3 * std::sin(2.0 * std::numbers::pi * freq * t + phase) + 0.15 * slope * t;
    }
  }

  // Region layout: each pixel takes the abundance vector of the last shape
  // covering it, blended with a background gradient.
  struct Shape {
    bool disc;
    double r0, c0, a, b;
    Vector abundance;
  };
  auto random_abundance = [&] {
    Vector v(rank);
    for (Index r = 0; r < rank; ++r) v(r) = -std::log(1.0 - u01(rng) * 0.999);
    return Vector(v / v.sum());
  };
  std::vector<Shape> shapes;
  const int n_shapes = 6;
  for (int s = 0; s < n_shapes; ++s) {
    Shape sh;
    sh.disc = s % 2 == 1;
    sh.r0 = u01(rng) * static_cast<double>(rows);
    sh.c0 = u01(rng) * static_cast<double>(cols);
    sh.a = (0.15 + 0.25 * u01(rng)) * static_cast<double>(rows);
    sh.b = (0.15 + 0.25 * u01(rng)) * static_cast<double>(cols);
    sh.abundance = random_abundance();
    shapes.push_back(std::move(sh));
  }
  const Vector bg0 = random_abundance();
  const Vector bg1 = random_abundance();

  Matrix abundance(rows * cols, rank);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) {
      const double t = (static_cast<double>(r) + static_cast<double>(c)) / static_cast<double>(rows + cols);
      Vector a = (1.0 - t) * bg0 + t * bg1;
      for (const Shape& sh : shapes) {
        const double dr = static_cast<double>(r) - sh.r0;
        const double dc = static_cast<double>(c) - sh.c0;
        const bool inside = sh.disc ? (dr * dr) / (sh.a * sh.a) + (dc * dc) / (sh.b * sh.b) <= 1.0
                                    : std::abs(dr) <= sh.a / 2 && std::abs(dc) <= sh.b / 2;
        if (inside) a = sh.abundance;
      }
      abundance.row(r + rows * c) = a.transpose();
    }
  }

  Tensor3 t({rows, cols, bands});
  t.as_matrix() = abundance * spectra.transpose();
  return normalize(HsiCube(std::move(t)));
}

}  // namespace swlrtr
