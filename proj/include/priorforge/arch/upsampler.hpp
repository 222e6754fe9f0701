#pragma once

#include "priorforge/arch/spec.hpp"
#include "priorforge/autodiff/tensor.hpp"

#include <span>
#include <vector>

namespace priorforge::arch {

/// 1-D interpolation taps of the unlearnt upsamplers.
std::span<double const> nearest_taps();
std::span<double const> bilinear_taps();
/// 17-tap Kaiser-window low-pass (cutoff 0.1, beta 10), about -100 dB stopband.
std::span<double const> l100_taps();

/// Unlearnt upsampler: zero insertion with gain factor^2 followed by the
/// frozen separable low-pass outer(taps, taps). The transposed kind carries
/// no taps; its learnable kernel lives in the network's layer list.
struct Upsampler
{
  UpsamplerKind kind = UpsamplerKind::Nearest;
  int factor = 2;
  std::vector<double> taps;
  double gain = 4.0;

  bool learnable() const { return kind == UpsamplerKind::Transposed; }
  /// Unlearnt kinds only.
  ad::Tensor apply(ad::Tensor const &x) const;
};

Upsampler make_upsampler(UpsamplerKind kind, int factor = 2);

} // namespace priorforge::arch
