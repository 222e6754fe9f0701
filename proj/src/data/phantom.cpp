#include "priorforge/data/phantom.hpp"

#include "priorforge/error.hpp"
#include "priorforge/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

namespace priorforge::data {

namespace {
double coord(Index i, Index n) { return 2.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n) - 1.0; }
} // namespace

PhantomSpec PhantomSpec::head(Index size, std::uint64_t seed)
{
  PhantomSpec s;
  s.size = size;
  s.seed = seed;
  s.ellipses = {
    {0.0, 0.0, 0.69, 0.92, 0.0, 1.0},       {0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8},
    {0.22, 0.0, 0.11, 0.31, -18.0, -0.2},   {-0.22, 0.0, 0.16, 0.41, 18.0, -0.2},
    {0.0, 0.35, 0.21, 0.25, 0.0, 0.1},      {0.0, 0.1, 0.046, 0.046, 0.0, 0.1},
    {0.0, -0.1, 0.046, 0.046, 0.0, 0.1},    {-0.08, -0.605, 0.046, 0.023, 0.0, 0.1},
    {0.0, -0.606, 0.023, 0.023, 0.0, 0.1},  {0.06, -0.605, 0.023, 0.046, 0.0, 0.1},
  };
  return s;
}

mri::ComplexImage generate_phantom(PhantomSpec const &spec)
{
  if (spec.size < 16) {
    throw ConfigError(fmt::format("phantom size must be >= 16, got {}", spec.size));
  }
  for (std::size_t e = 0; e < spec.ellipses.size(); ++e) {
    if (!(spec.ellipses[e].a > 0.0) || !(spec.ellipses[e].b > 0.0)) {
      throw ConfigError(fmt::format("phantom ellipse {} is degenerate (zero axis)", e));
    }
  }
  Index const n = spec.size;
  SplitMix64 rng(spec.seed);
  double c[5];
  for (auto &ck : c) {
    ck = rng.uniform(-spec.phase_amplitude, spec.phase_amplitude);
  }

  mri::ComplexImage img(n, n);
  for (Index i = 0; i < n; ++i) {
    double const y = -coord(i, n);
    for (Index j = 0; j < n; ++j) {
      double const x = coord(j, n);
      double m = 0.0;
      for (auto const &e : spec.ellipses) {
        double const t = e.angle_deg * std::numbers::pi / 180.0;
        double const dx = x - e.cx, dy = y - e.cy;
        double const u = (dx * std::cos(t) + dy * std::sin(t)) / e.a;
        double const v = (-dx * std::sin(t) + dy * std::cos(t)) / e.b;
        if (u * u + v * v <= 1.0) {
          m += e.intensity;
        }
      }
      double const phase = c[0] + c[1] * x + c[2] * y + c[3] * x * y + c[4] * (x * x - y * y);
      img.re[i * n + j] = m * std::cos(phase);
      img.im[i * n + j] = m * std::sin(phase);
    }
  }
  return img;
}

mri::CoilSensitivities generate_csm(Index coils, Index size)
{
  if (coils < 1) {
    throw ConfigError(fmt::format("coil count must be >= 1, got {}", coils));
  }
  if (size < 1) {
    throw ConfigError(fmt::format("coil map size must be >= 1, got {}", size));
  }
  double constexpr radius = 1.2;
  double constexpr width = 0.8;
  double constexpr ramp = 0.6;
  mri::CoilSensitivities csm;
  csm.coils.assign(static_cast<std::size_t>(coils), mri::ComplexImage(size, size));
  for (Index i = 0; i < size; ++i) {
    double const y = -coord(i, size);
    for (Index j = 0; j < size; ++j) {
      double const x = coord(j, size);
      Index const p = i * size + j;
      double norm2 = 0.0;
      for (Index k = 0; k < coils; ++k) {
        double const th = std::numbers::pi / 4.0 + 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(coils);
        double const dx = x - radius * std::cos(th), dy = y - radius * std::sin(th);
        double const mag = std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
        double const ph = th + ramp * (x * std::cos(th) + y * std::sin(th));
        auto &s = csm.coils[static_cast<std::size_t>(k)];
        s.re[p] = mag * std::cos(ph);
        s.im[p] = mag * std::sin(ph);
        norm2 += mag * mag;
      }
      double const inv = 1.0 / std::sqrt(norm2);
      for (auto &s : csm.coils) {
        s.re[p] *= inv;
        s.im[p] *= inv;
      }
    }
  }
  return csm;
}

} // namespace priorforge::data
