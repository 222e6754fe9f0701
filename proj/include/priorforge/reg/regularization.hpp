#pragma once

#include "priorforge/autodiff/tensor.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace priorforge::arch {
class Network;
}

namespace priorforge::reg {

/// Gaussian blur of the noise input. sigma is drawn once from
/// U(sigma_lo, sigma_hi); equal bounds give a fixed sigma.
struct GaussianFilter
{
  int size = 3;
  double sigma_lo = 1.0;
  double sigma_hi = 1.0;
};

struct RegConfig
{
  std::optional<GaussianFilter> input_filter;
  std::optional<double> lipschitz_lambda; ///< l-infinity norm
  std::optional<double> tv_lambda;
  std::optional<double> l2_lambda;
  std::uint64_t seed = 0;

  void validate() const;
  /// "none", or enabled remedies joined by '+', e.g. "gaussian+lipschitz".
  std::string label() const;
  /// Inverse of label(); uses the default hyperparameters
  /// (gaussian 3, sigma in [0.5, 2]; lipschitz 1; tv 1e-3; l2 1e-5).
  static RegConfig from_label(std::string const &label);
};

/// Normalized taps exp(-(i - c)^2 / (2 sigma^2)) of odd length `size`.
std::vector<double> gaussian_kernel(int size, double sigma);

double sample_sigma(GaussianFilter const &f, std::uint64_t seed);

struct BandlimitedInput
{
  ad::Tensor z;
  double sigma = 0.0;
};

/// Depthwise same-padded blur of z with outer(taps, taps). The result is a
/// constant (no graph history) meant to replace z for the whole run.
BandlimitedInput bandlimit_input(ad::Tensor const &z, RegConfig const &cfg);

/// max_i sum_j |W_ij| of a row-major rows x cols matrix.
double matrix_inf_norm(std::span<double const> w, std::int64_t rows, std::int64_t cols);

/// W / max(1, ||W||_inf / softplus(k)) with W viewed as
/// out-channels x (in-channels * kh * kw). Differentiable in W and k.
ad::Tensor lipschitz_normalize(ad::Tensor const &weight, ad::Tensor const &k);

/// One learnable constant per registered conv layer.
struct LipschitzState
{
  std::vector<ad::Parameter> constants;
};

/// Attaches a constant to every learnable conv (including the head and any
/// transposed upsampler), initialized so softplus(k) equals the layer's
/// initial ||W||_inf.
LipschitzState attach_lipschitz(arch::Network &net);

/// lambda * sum_l softplus(k_l)^2
ad::Tensor lipschitz_penalty(LipschitzState const &state, double lambda);

/// Anisotropic TV over the last two axes, summed over all leading axes.
ad::Tensor tv_penalty(ad::Tensor const &x);

/// lambda * sum ||theta||^2 over the given tensors.
ad::Tensor l2_penalty(std::vector<ad::Parameter> const &params, double lambda);

} // namespace priorforge::reg
