#pragma once

#include "priorforge/mri/images.hpp"

#include <cstdint>
#include <utility>

namespace priorforge::data {

using mri::Index;

struct MaskSpec
{
  Index width = 64;
  Index height = 0; ///< 0 means square (height = width)
  double accel = 4.0;
  Index center_lines = 5;
  /// Carried for provenance; outer lines are placed deterministically.
  std::uint64_t seed = 0;
};

/// Contiguous block of `center_lines` columns around the DC column plus
/// round(width / accel) - center_lines columns spread evenly over the
/// remaining columns: outer pick j lands at floor((j + 1/2) * outer / extra).
mri::SamplingMask generate_cartesian_mask(MaskSpec const &spec);

/// First column of the center block for a given width and count.
Index center_block_start(Index width, Index center_lines);

/// Maximal run of sampled columns containing the DC column, as [begin, end).
std::pair<Index, Index> detect_center_block(mri::SamplingMask const &mask);

struct NoiseSpec
{
  double sigma = 0.0; ///< per real/imaginary component
  std::uint64_t seed = 0;
};

/// forward_operator(x) plus i.i.d. N(0, sigma^2) on the real and imaginary
/// parts of sampled entries only. Draw order: coil, row, column, re then im.
mri::KSpace simulate_kspace(mri::ComplexImage const &x,
                            mri::CoilSensitivities const &csm,
                            mri::SamplingMask const &mask,
                            NoiseSpec const &noise);

} // namespace priorforge::data
