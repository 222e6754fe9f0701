#include "priorforge/metrics/metrics.hpp"

#include "priorforge/error.hpp"
#include "priorforge/mri/sense.hpp"
#include "priorforge/reg/regularization.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace priorforge::metrics {

namespace {

void check_extent(mri::Index r1, mri::Index c1, mri::Index r2, mri::Index c2, char const *what)
{
  if (r1 != r2 || c1 != c2) {
    throw ShapeError(fmt::format("{}: extent mismatch {}x{} vs {}x{}", what, r1, c1, r2, c2));
  }
}

double max_of(std::vector<double> const &v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

// Valid-mode separable filtering of a rows x cols plane with taps t.
std::vector<double> filter_valid(std::vector<double> const &a, mri::Index rows, mri::Index cols, std::vector<double> const &t)
{
  auto const n = static_cast<mri::Index>(t.size());
  mri::Index const orow = rows - n + 1, ocol = cols - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(rows * ocol));
  for (mri::Index r = 0; r < rows; ++r) {
    for (mri::Index c = 0; c < ocol; ++c) {
      double s = 0.0;
      for (mri::Index k = 0; k < n; ++k) {
        s += t[static_cast<std::size_t>(k)] * a[static_cast<std::size_t>(r * cols + c + k)];
      }
      tmp[static_cast<std::size_t>(r * ocol + c)] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(orow * ocol));
  for (mri::Index r = 0; r < orow; ++r) {
    for (mri::Index c = 0; c < ocol; ++c) {
      double s = 0.0;
      for (mri::Index k = 0; k < n; ++k) {
        s += t[static_cast<std::size_t>(k)] * tmp[static_cast<std::size_t>((r + k) * ocol + c)];
      }
      out[static_cast<std::size_t>(r * ocol + c)] = s;
    }
  }
  return out;
}

} // namespace

double psnr_from_mse(double mse, double range)
{
  if (mse == 0.0) {
    return kPsnrInfinite;
  }
  return 10.0 * std::log10(range * range / mse);
}

double psnr(mri::RealImage const &x, mri::RealImage const &ref)
{
  check_extent(x.rows, x.cols, ref.rows, ref.cols, "psnr");
  double mse = 0.0;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    double const d = x.data[i] - ref.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(std::max<std::size_t>(x.data.size(), 1));
  return psnr_from_mse(mse, max_of(ref.data));
}

double ssim(mri::RealImage const &x, mri::RealImage const &ref)
{
  constexpr int kWin = 11;
  check_extent(x.rows, x.cols, ref.rows, ref.cols, "ssim");
  if (x.rows < kWin || x.cols < kWin) {
    throw ShapeError(fmt::format("ssim: image {}x{} is smaller than the {}x{} window", x.rows, x.cols, kWin, kWin));
  }
  auto const taps = reg::gaussian_kernel(kWin, 1.5);
  double const range = max_of(ref.data);
  double const c1 = (0.01 * range) * (0.01 * range);
  double const c2 = (0.03 * range) * (0.03 * range);

  auto const n = x.data.size();
  std::vector<double> xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = x.data[i] * x.data[i];
    yy[i] = ref.data[i] * ref.data[i];
    xy[i] = x.data[i] * ref.data[i];
  }
  auto const mx = filter_valid(x.data, x.rows, x.cols, taps);
  auto const my = filter_valid(ref.data, x.rows, x.cols, taps);
  auto const mxx = filter_valid(xx, x.rows, x.cols, taps);
  auto const myy = filter_valid(yy, x.rows, x.cols, taps);
  auto const mxy = filter_valid(xy, x.rows, x.cols, taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mx.size(); ++i) {
    double const vx = mxx[i] - mx[i] * mx[i];
    double const vy = myy[i] - my[i] * my[i];
    double const cxy = mxy[i] - mx[i] * my[i];
    total += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cxy + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mx.size());
}

double masked_region_psnr(mri::ComplexImage const &x, mri::ComplexImage const &ref, mri::SamplingMask const &mask)
{
  check_extent(x.rows, x.cols, ref.rows, ref.cols, "masked_region_psnr");
  check_extent(x.rows, x.cols, mask.rows, mask.cols, "masked_region_psnr (mask)");
  if (mask.acquired() == mask.rows * mask.cols) {
    throw ConfigError("masked_region_psnr: no masked region (mask is fully sampled)");
  }
  mri::ComplexImage diff(x.rows, x.cols);
  for (std::size_t i = 0; i < diff.re.size(); ++i) {
    diff.re[i] = x.re[i] - ref.re[i];
    diff.im[i] = x.im[i] - ref.im[i];
  }
  auto const e = mri::dft2_centered(diff);
  double mse = 0.0;
  for (std::size_t i = 0; i < e.re.size(); ++i) {
    if (mask.values[i] == 0) {
      mse += e.re[i] * e.re[i] + e.im[i] * e.im[i];
    }
  }
  mse /= static_cast<double>(x.size());
  return psnr_from_mse(mse, max_of(ref.magnitude().data));
}

double masked_region_psnr(mri::RealImage const &x, mri::RealImage const &ref, mri::SamplingMask const &mask)
{
  auto lift = [](mri::RealImage const &a) {
    mri::ComplexImage c(a.rows, a.cols);
    c.re = a.data;
    return c;
  };
  return masked_region_psnr(lift(x), lift(ref), mask);
}

MetricReport evaluate(mri::RealImage const &x, mri::RealImage const &ref)
{
  MetricReport m;
  m.psnr = psnr(x, ref);
  m.ssim = ssim(x, ref);
  m.range = max_of(ref.data);
  return m;
}

std::vector<double> frequency_grid(int points)
{
  if (points < 2) {
    throw ConfigError(fmt::format("frequency_grid: need at least 2 points, got {}", points));
  }
  std::vector<double> w(static_cast<std::size_t>(points));
  for (int j = 0; j < points; ++j) {
    w[static_cast<std::size_t>(j)] = std::numbers::pi * j / (points - 1);
  }
  return w;
}

std::vector<double> filter_frequency_response(std::span<double const> taps, std::span<double const> omega)
{
  if (taps.empty()) {
    throw ConfigError("filter_frequency_response: taps are empty");
  }
  std::vector<double> out;
  out.reserve(omega.size());
  for (double w : omega) {
    std::complex<double> s{0.0, 0.0};
    for (std::size_t n = 0; n < taps.size(); ++n) {
      s += taps[n] * std::polar(1.0, -w * static_cast<double>(n));
    }
    out.push_back(std::abs(s));
  }
  return out;
}

BandErrors band_errors(mri::ComplexImage const &output, mri::ComplexImage const &reference)
{
  check_extent(output.rows, output.cols, reference.rows, reference.cols, "band_errors");
  mri::ComplexImage diff(output.rows, output.cols);
  for (std::size_t i = 0; i < diff.re.size(); ++i) {
    diff.re[i] = output.re[i] - reference.re[i];
    diff.im[i] = output.im[i] - reference.im[i];
  }
  auto const e = mri::dft2_centered(diff);
  double const n = static_cast<double>(std::min(output.rows, output.cols));
  double const lo_r = n / 8.0, hi_r = n / 4.0;
  double lo = 0.0, hi = 0.0;
  std::size_t nlo = 0, nhi = 0;
  for (mri::Index r = 0; r < e.rows; ++r) {
    for (mri::Index c = 0; c < e.cols; ++c) {
      double const dr = static_cast<double>(r - e.rows / 2), dc = static_cast<double>(c - e.cols / 2);
      double const rad = std::hypot(dr, dc);
      auto const i = static_cast<std::size_t>(r * e.cols + c);
      double const mag = std::hypot(e.re[i], e.im[i]);
      if (rad <= lo_r) {
        lo += mag;
        ++nlo;
      } else if (rad > hi_r) {
        hi += mag;
        ++nhi;
      }
    }
  }
  return {nlo ? lo / static_cast<double>(nlo) : 0.0, nhi ? hi / static_cast<double>(nhi) : 0.0};
}

} // namespace priorforge::metrics
