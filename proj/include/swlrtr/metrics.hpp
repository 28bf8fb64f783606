#pragma once

// Reference-based quality indices for restored cubes.

#include "swlrtr/cube_io.hpp"

#include <filesystem>
#include <limits>
#include <ostream>
#include <vector>

namespace swlrtr {

inline constexpr double kInfinitePsnr = std::numeric_limits<double>::infinity();
inline constexpr Index kSsimWindow = 8;

struct MetricsReport {
  std::vector<double> psnr;  // per band, dB
  std::vector<double> ssim;  // per band
  double mpsnr = 0.0;
  double mssim = 0.0;
  double ergas = 0.0;
  double msa = 0.0;  // radians
  Index msa_skipped = 0;
  double runtime_seconds = 0.0;
};

// 10 log10(peak^2 / MSE) for band `band` of both cubes; identical bands give
// kInfinitePsnr.
double psnr_band(const Tensor3& ref, const Tensor3& test, Index band, double peak = 1.0);

// Mean SSIM over all 8 x 8 windows (stride 1, uniform weights, population
// moments), C1 = (0.01 L)^2, C2 = (0.03 L)^2 with L = 1.
double ssim_band(const Tensor3& ref, const Tensor3& test, Index band);

// 100 * sqrt(mean_b RMSE_b^2 / mean_b^2) with mean_b the reference band mean.
double ergas(const Tensor3& ref, const Tensor3& test);

struct SpectralAngle {
  double mean = 0.0;
  Index skipped = 0;
};
// Mean per-pixel spectral angle; pixels where either spectrum is zero are
// skipped and counted.
SpectralAngle msa(const Tensor3& ref, const Tensor3& test);

MetricsReport evaluate(const Tensor3& ref, const Tensor3& test);

// CSV: header, one row per band (band,psnr,ssim) and a summary row
// (mean,mpsnr,mssim,ergas,msa,runtime_s). Infinite PSNR is written "inf".
void write_metrics_csv(const MetricsReport& report, std::ostream& out);
void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path);

}  // namespace swlrtr
