#include "priorforge/data/sampling.hpp"

#include "priorforge/error.hpp"
#include "priorforge/mri/sense.hpp"
#include "priorforge/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace priorforge::data {

Index center_block_start(Index width, Index center_lines) { return width / 2 - center_lines / 2; }

mri::SamplingMask generate_cartesian_mask(MaskSpec const &spec)
{
  Index const w = spec.width;
  Index const h = spec.height > 0 ? spec.height : spec.width;
  if (w < 1) {
    throw ConfigError(fmt::format("mask width must be >= 1, got {}", w));
  }
  if (!(spec.accel >= 1.0)) {
    throw ConfigError(fmt::format("mask acceleration must be >= 1, got {}", spec.accel));
  }
  Index const total = static_cast<Index>(std::llround(static_cast<double>(w) / spec.accel));
  Index const budget = static_cast<Index>(std::floor(static_cast<double>(w) / spec.accel));
  if (spec.center_lines < 0 || spec.center_lines > budget) {
    throw ConfigError(fmt::format("mask infeasible: {} center lines exceed budget of {} lines (width {}, accel {})",
                                  spec.center_lines, budget, w, spec.accel));
  }

  std::vector<bool> cols(static_cast<std::size_t>(w), false);
  Index const start = center_block_start(w, spec.center_lines);
  for (Index c = start; c < start + spec.center_lines; ++c) {
    cols[static_cast<std::size_t>(c)] = true;
  }
  std::vector<Index> outer;
  for (Index c = 0; c < w; ++c) {
    if (!cols[static_cast<std::size_t>(c)]) {
      outer.push_back(c);
    }
  }
  Index const extra = total - spec.center_lines;
  Index const n_outer = static_cast<Index>(outer.size());
  for (Index j = 0; j < extra; ++j) {
    Index const pick = static_cast<Index>(std::floor((static_cast<double>(j) + 0.5) * static_cast<double>(n_outer) /
                                                     static_cast<double>(extra)));
    cols[static_cast<std::size_t>(outer[static_cast<std::size_t>(pick)])] = true;
  }
  return mri::SamplingMask::from_columns(h, cols);
}

std::pair<Index, Index> detect_center_block(mri::SamplingMask const &mask)
{
  Index const dc = mask.cols / 2;
  if (mask.cols == 0 || !mask.column_sampled(dc)) {
    return {dc, dc};
  }
  Index b = dc, e = dc + 1;
  while (b > 0 && mask.column_sampled(b - 1)) {
    --b;
  }
  while (e < mask.cols && mask.column_sampled(e)) {
    ++e;
  }
  return {b, e};
}

mri::KSpace simulate_kspace(mri::ComplexImage const &x,
                            mri::CoilSensitivities const &csm,
                            mri::SamplingMask const &mask,
                            NoiseSpec const &noise)
{
  if (noise.sigma < 0.0) {
    throw ConfigError(fmt::format("noise sigma must be >= 0, got {}", noise.sigma));
  }
  mri::KSpace y = mri::forward_operator(x, csm, mask);
  if (noise.sigma == 0.0) {
    return y;
  }
  SplitMix64 rng(noise.seed);
  for (auto &k : y.coils) {
    for (Index p = 0; p < k.size(); ++p) {
      if (mask.values[static_cast<std::size_t>(p)] != 0) {
        k.re[p] += noise.sigma * rng.normal();
        k.im[p] += noise.sigma * rng.normal();
      }
    }
  }
  return y;
}

} // namespace priorforge::data
