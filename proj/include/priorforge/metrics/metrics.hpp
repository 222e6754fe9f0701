#pragma once

#include "priorforge/mri/images.hpp"

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace priorforge::metrics {

/// Returned by the PSNR functions when the error is exactly zero.
inline constexpr double kPsnrInfinite = std::numeric_limits<double>::infinity();

struct MetricReport
{
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> psnr_masked;
  double range = 0.0;
};

/// 10 log10(range^2 / mse).
double psnr_from_mse(double mse, double range);

/// Data range is max(ref).
double psnr(mri::RealImage const &x, mri::RealImage const &ref);

/// Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, data range max(ref).
double ssim(mri::RealImage const &x, mri::RealImage const &ref);

/// PSNR of the part of (x - ref) living on the un-acquired k-space columns:
/// mse = sum over masked-out entries of |DFT(x - ref)|^2 / pixels.
/// Data range is max |ref|. Throws if the mask has no un-acquired column.
double masked_region_psnr(mri::ComplexImage const &x, mri::ComplexImage const &ref, mri::SamplingMask const &mask);
double masked_region_psnr(mri::RealImage const &x, mri::RealImage const &ref, mri::SamplingMask const &mask);

MetricReport evaluate(mri::RealImage const &x, mri::RealImage const &ref);

/// points samples of [0, pi], endpoints included.
std::vector<double> frequency_grid(int points = 512);

/// |sum_n taps_n exp(-i omega n)| at each omega.
std::vector<double> filter_frequency_response(std::span<double const> taps, std::span<double const> omega);

struct BandErrors
{
  double low = 0.0;
  double high = 0.0;
};

/// E = DFT(output - reference); mean |E| over radius <= N/8 from DC and
/// over radius > N/4.
BandErrors band_errors(mri::ComplexImage const &output, mri::ComplexImage const &reference);

} // namespace priorforge::metrics
