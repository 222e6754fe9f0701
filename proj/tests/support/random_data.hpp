#pragma once

#include "priorforge/mri/images.hpp"
#include "priorforge/rng.hpp"

#include <cmath>
#include <vector>

namespace pftest {

using priorforge::SplitMix64;
namespace mri = priorforge::mri;

inline mri::ComplexImage random_image(mri::Index rows, mri::Index cols, SplitMix64 &rng)
{
  mri::ComplexImage x(rows, cols);
  for (std::size_t i = 0; i < x.re.size(); ++i) {
    x.re[i] = rng.normal();
    x.im[i] = rng.normal();
  }
  return x;
}

inline mri::RealImage random_real(mri::Index rows, mri::Index cols, SplitMix64 &rng, double lo = 0.0, double hi = 1.0)
{
  mri::RealImage x(rows, cols);
  for (double &v : x.data) {
    v = rng.uniform(lo, hi);
  }
  return x;
}

/// Random complex maps normalized to sum_i |S_i|^2 = 1 at every pixel.
inline mri::CoilSensitivities random_csm(mri::Index coils, mri::Index n, SplitMix64 &rng)
{
  mri::CoilSensitivities s;
  for (mri::Index c = 0; c < coils; ++c) {
    s.coils.push_back(random_image(n, n, rng));
  }
  for (std::size_t p = 0; p < static_cast<std::size_t>(n * n); ++p) {
    double e = 0.0;
    for (auto const &c : s.coils) {
      e += c.re[p] * c.re[p] + c.im[p] * c.im[p];
    }
    double const inv = 1.0 / std::sqrt(e);
    for (auto &c : s.coils) {
      c.re[p] *= inv;
      c.im[p] *= inv;
    }
  }
  return s;
}

/// Column-structured mask with each column kept with probability `keep`.
inline mri::SamplingMask random_mask(mri::Index n, SplitMix64 &rng, double keep = 0.4)
{
  std::vector<bool> cols(static_cast<std::size_t>(n));
  for (auto &&c : cols) {
    c = rng.uniform() < keep;
  }
  return mri::SamplingMask::from_columns(n, cols);
}

inline mri::KSpace random_kspace(mri::Index coils, mri::Index n, SplitMix64 &rng)
{
  mri::KSpace y;
  for (mri::Index c = 0; c < coils; ++c) {
    y.coils.push_back(random_image(n, n, rng));
  }
  return y;
}

} // namespace pftest
