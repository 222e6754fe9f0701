#include "priorforge/arch/upsampler.hpp"

#include "priorforge/autodiff/ops.hpp"
#include "priorforge/error.hpp"

#include <array>

namespace priorforge::arch {

namespace {
constexpr std::array<double, 2> kNearest{0.5, 0.5};
constexpr std::array<double, 3> kBilinear{0.25, 0.5, 0.25};
constexpr std::array<double, 17> kL100{0.000015, 0.000541, 0.003707, 0.014130, 0.037396, 0.075367,
                                       0.121291, 0.159962, 0.175182, 0.159962, 0.121291, 0.075367,
                                       0.037396, 0.014130, 0.003707, 0.000541, 0.000015};
} // namespace

std::span<double const> nearest_taps() { return kNearest; }
std::span<double const> bilinear_taps() { return kBilinear; }
std::span<double const> l100_taps() { return kL100; }

ad::Tensor Upsampler::apply(ad::Tensor const &x) const
{
  if (learnable() || kind == UpsamplerKind::None) {
    throw ConfigError("upsampler: apply() is only defined for unlearnt kinds");
  }
  return ad::fixed_lowpass_conv(ad::zero_insert_upsample(x, factor, factor, gain), taps);
}

Upsampler make_upsampler(UpsamplerKind kind, int factor)
{
  if (factor < 1) {
    throw ConfigError("upsampler: factor must be >= 1");
  }
  Upsampler u;
  u.kind = kind;
  u.factor = factor;
  u.gain = static_cast<double>(factor * factor);
  switch (kind) {
  case UpsamplerKind::Nearest: u.taps.assign(kNearest.begin(), kNearest.end()); break;
  case UpsamplerKind::Bilinear: u.taps.assign(kBilinear.begin(), kBilinear.end()); break;
  case UpsamplerKind::L100: u.taps.assign(kL100.begin(), kL100.end()); break;
  case UpsamplerKind::Transposed: u.gain = 1.0; break;
  case UpsamplerKind::None: u.factor = 1; u.gain = 1.0; break;
  }
  return u;
}

} // namespace priorforge::arch
