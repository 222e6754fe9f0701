#pragma once

#include "priorforge/recon/engine.hpp"

#include <cstdint>

namespace priorforge::recon {

/// Synthetic multi-coil acquisition of the head phantom.
struct PhantomProblem
{
  mri::Index size = 64;
  mri::Index coils = 4;
  double accel = 4.0;
  mri::Index center_lines = 5;
  /// Standard deviation of the complex k-space noise per component.
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
};

/// Phantom, maps, mask and noisy k-space; the phantom is the reference.
ReconData make_phantom_problem(PhantomProblem const &p);

} // namespace priorforge::recon
