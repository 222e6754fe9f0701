#pragma once

#include "priorforge/mri/images.hpp"

#include <cstdint>
#include <vector>

namespace priorforge::data {

using mri::Index;

/// Ellipse in normalized coordinates: x to the right, y up, both in [-1, 1].
struct Ellipse
{
  double cx = 0.0;
  double cy = 0.0;
  double a = 0.0; ///< semi-axis along the rotated x direction
  double b = 0.0; ///< semi-axis along the rotated y direction
  double angle_deg = 0.0;
  double intensity = 0.0;
};

struct PhantomSpec
{
  Index size = 64;
  std::vector<Ellipse> ellipses;
  std::uint64_t seed = 0;
  /// Peak of each polynomial phase coefficient (radians); 0 gives a real image.
  double phase_amplitude = 0.5;

  /// Modified (Toft) 10-ellipse Shepp-Logan head.
  static PhantomSpec head(Index size, std::uint64_t seed);
};

/// Sum of ellipse indicators times a smooth phase
///   exp(i (c0 + c1 x + c2 y + c3 xy + c4 (x^2 - y^2))), c_k ~ U(-A, A).
mri::ComplexImage generate_phantom(PhantomSpec const &spec);

/// c Gaussian bumps centered outside the field of view at angles
/// pi/4 + 2 pi i / c with a linear phase ramp, normalized so that
/// sum_i |S_i|^2 = 1 at every pixel.
mri::CoilSensitivities generate_csm(Index coils, Index size);

} // namespace priorforge::data
