#pragma once

#include "priorforge/autodiff/tensor.hpp"

#include <span>

namespace priorforge::ad {

/// Zero padding applied before/after each spatial axis.
struct Padding
{
  int top = 0;
  int left = 0;
  int bottom = 0;
  int right = 0;

  /// "same-zero": preserves extents at stride 1 for odd kernels.
  static Padding same(int kh, int kw) { return {kh / 2, kw / 2, kh - 1 - kh / 2, kw - 1 - kw / 2}; }
};

/// 2-D cross-correlation. input [B,Cin,H,W], weight [Cout,Cin,kh,kw],
/// bias [Cout] or undefined. Kernel extents must be odd, stride 1 or 2.
Tensor conv2d(Tensor const &input, Tensor const &weight, Tensor const &bias, int stride, Padding padding);
Tensor conv2d(Tensor const &input, Tensor const &weight, Tensor const &bias, int stride = 1);

/// Interleaves zeros: out(i*upy, j*upx) = gain * in(i, j), zero elsewhere.
Tensor zero_insert_upsample(Tensor const &input, int upx, int upy, double gain);

/// Depthwise convolution with the frozen separable kernel outer(taps, taps).
/// Padding puts floor(len/2) zeros before each axis, so even-length taps
/// (e.g. [0.5, 0.5]) look backwards by one sample.
Tensor fixed_lowpass_conv(Tensor const &input, std::span<double const> taps);

/// Training-mode batch normalization over batch and space, per channel.
Tensor batchnorm2d(Tensor const &input, Tensor const &scale, Tensor const &shift, double eps = 1e-5);

Tensor relu(Tensor const &x);
/// ln(1 + exp(x)), evaluated without overflow.
Tensor softplus(Tensor const &x);
Tensor scale(Tensor const &x, double c);
Tensor square(Tensor const &x);
Tensor add(Tensor const &a, Tensor const &b);
Tensor sum(Tensor const &x);
Tensor sum_squares(Tensor const &x);

Tensor concat_channels(Tensor const &a, Tensor const &b);
Tensor slice_channels(Tensor const &x, std::int64_t begin, std::int64_t count);

/// Mean |pred - target| over entries where mask != 0 (all entries when the
/// mask is undefined). Subgradient at ties is 0.
Tensor mae_loss(Tensor const &pred, Tensor const &target, Tensor const &mask = {});

double softplus_value(double x);
double sigmoid_value(double x);

} // namespace priorforge::ad
