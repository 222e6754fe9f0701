#pragma once

#include "priorforge/mri/images.hpp"

#include <complex>

namespace priorforge::mri {

/// Orthonormal 2-D DFT with the zero frequency at (rows/2, cols/2) and the
/// image origin likewise centered (fftshift . fft . ifftshift).
ComplexImage dft2_centered(ComplexImage const &img);
ComplexImage idft2_centered(ComplexImage const &spec);

/// y_i = M . F(S_i . x) for every coil. Unsampled entries are exactly zero.
KSpace forward_operator(ComplexImage const &x, CoilSensitivities const &csm, SamplingMask const &mask);

/// sum_i conj(S_i) . F^H(M . y_i)
ComplexImage adjoint_operator(KSpace const &y, CoilSensitivities const &csm, SamplingMask const &mask);

/// Pixelwise sqrt(sum_i |z_i|^2).
RealImage rss_combine(std::vector<ComplexImage> const &coil_images);

/// RSS of the per-coil inverse DFT of the masked k-space.
RealImage zero_filled_recon(KSpace const &y, CoilSensitivities const &csm, SamplingMask const &mask);

/// Per-coil images S_i . x (the fully sampled coil images).
std::vector<ComplexImage> coil_images(ComplexImage const &x, CoilSensitivities const &csm);

/// <a, b> = sum conj(a) * b over all entries.
std::complex<double> inner(ComplexImage const &a, ComplexImage const &b);
std::complex<double> inner(KSpace const &a, KSpace const &b);
double norm(ComplexImage const &a);
double norm(KSpace const &a);

} // namespace priorforge::mri
