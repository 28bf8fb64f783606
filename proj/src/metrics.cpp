#include "swlrtr/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace swlrtr {

namespace {

void check_pair(const Tensor3& ref, const Tensor3& test) {
  if (!(ref.dims() == test.dims())) throw std::invalid_argument("metrics: cube dimensions differ");
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

double psnr_band(const Tensor3& ref, const Tensor3& test, Index band, double peak) {
  check_pair(ref, test);
  const Index n = ref.dims().d1 * ref.dims().d2;
  const auto r = ref.as_matrix().col(band);
  const auto t = test.as_matrix().col(band);
  const double mse = (r - t).squaredNorm() / static_cast<double>(n);
  if (mse == 0.0) return kInfinitePsnr;
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim_band(const Tensor3& ref, const Tensor3& test, Index band) {
  check_pair(ref, test);
  const Index rows = ref.dims().d1;
  const Index cols = ref.dims().d2;
  if (rows < kSsimWindow || cols < kSsimWindow) {
    throw std::invalid_argument("ssim: window larger than band");
  }
  constexpr double c1 = 0.01 * 0.01;
  constexpr double c2 = 0.03 * 0.03;
  constexpr double n = static_cast<double>(kSsimWindow * kSsimWindow);

  double total = 0.0;
  Index windows = 0;
  for (Index c0 = 0; c0 + kSsimWindow <= cols; ++c0) {
    for (Index r0 = 0; r0 + kSsimWindow <= rows; ++r0) {
      double sx = 0, sy = 0;
      for (Index c = c0; c < c0 + kSsimWindow; ++c) {
        for (Index r = r0; r < r0 + kSsimWindow; ++r) {
          sx += ref(r, c, band);
          sy += test(r, c, band);
        }
      }
      const double mx = sx / n;
      const double my = sy / n;
      double vx = 0, vy = 0, cxy = 0;
      for (Index c = c0; c < c0 + kSsimWindow; ++c) {
        for (Index r = r0; r < r0 + kSsimWindow; ++r) {
          const double dx = ref(r, c, band) - mx;
          const double dy = test(r, c, band) - my;
          vx += dx * dx;
          vy += dy * dy;
          cxy += dx * dy;
        }
      }
      vx /= n;
      vy /= n;
      cxy /= n;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

double ergas(const Tensor3& ref, const Tensor3& test) {
  check_pair(ref, test);
  const Index bands = ref.dims().d3;
  const double n = static_cast<double>(ref.dims().d1 * ref.dims().d2);
  double acc = 0.0;
  for (Index b = 0; b < bands; ++b) {
    const auto r = ref.as_matrix().col(b);
    const double mean = r.sum() / n;
    if (mean == 0.0) throw std::invalid_argument("ergas: reference band " + std::to_string(b) + " has zero mean");
    const double mse = (r - test.as_matrix().col(b)).squaredNorm() / n;
    acc += mse / (mean * mean);
  }
  return 100.0 * std::sqrt(acc / static_cast<double>(bands));
}

SpectralAngle msa(const Tensor3& ref, const Tensor3& test) {
  check_pair(ref, test);
  const auto r = ref.as_matrix();
  const auto t = test.as_matrix();
  double total = 0.0;
  Index used = 0;
  SpectralAngle out;
  for (Index p = 0; p < r.rows(); ++p) {
    const double nr = r.row(p).norm();
    const double nt = t.row(p).norm();
    if (nr == 0.0 || nt == 0.0) {
      ++out.skipped;
      continue;
    }
    // 2 atan2(|a|b| - b|a||, |a|b| + b|a||) stays accurate near 0 and pi.
    const Eigen::RowVectorXd a = r.row(p) * nt;
    const Eigen::RowVectorXd b = t.row(p) * nr;
    total += 2.0 * std::atan2((a - b).norm(), (a + b).norm());
    ++used;
  }
  out.mean = used > 0 ? total / static_cast<double>(used) : 0.0;
  return out;
}

MetricsReport evaluate(const Tensor3& ref, const Tensor3& test) {
  const auto start = std::chrono::steady_clock::now();
  check_pair(ref, test);
  MetricsReport rep;
  const Index bands = ref.dims().d3;
  for (Index b = 0; b < bands; ++b) {
    rep.psnr.push_back(psnr_band(ref, test, b));
    rep.ssim.push_back(ssim_band(ref, test, b));
  }
  double sp = 0, ss = 0;
  for (Index b = 0; b < bands; ++b) {
    sp += rep.psnr[static_cast<std::size_t>(b)];
    ss += rep.ssim[static_cast<std::size_t>(b)];
  }
  rep.mpsnr = sp / static_cast<double>(bands);
  rep.mssim = ss / static_cast<double>(bands);
  rep.ergas = ergas(ref, test);
  const SpectralAngle sa = msa(ref, test);
  rep.msa = sa.mean;
  rep.msa_skipped = sa.skipped;
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

void write_metrics_csv(const MetricsReport& report, std::ostream& out) {
  out << "band,psnr,ssim,ergas,msa,runtime_s\n";
  for (std::size_t b = 0; b < report.psnr.size(); ++b) {
    out << b << ',' << fmt(report.psnr[b]) << ',' << fmt(report.ssim[b]) << ",,,\n";
  }
  out << "mean," << fmt(report.mpsnr) << ',' << fmt(report.mssim) << ',' << fmt(report.ergas) << ','
      << fmt(report.msa) << ',' << fmt(report.runtime_seconds) << '\n';
}

void write_metrics_csv(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  write_metrics_csv(report, out);
}

}  // namespace swlrtr
