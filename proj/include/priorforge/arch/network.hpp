#pragma once

#include "priorforge/arch/spec.hpp"
#include "priorforge/arch/upsampler.hpp"
#include "priorforge/autodiff/ops.hpp"
#include "priorforge/autodiff/tensor.hpp"
#include "priorforge/rng.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace priorforge::arch {

/// Learnable convolution. When a Lipschitz constant is attached, the weight
/// is renormalized on every forward pass before use.
struct Conv2dLayer
{
  std::string name;
  ad::Parameter weight;
  std::optional<ad::Parameter> bias;
  int stride = 1;
  ad::Padding padding;
  std::optional<ad::Parameter> lipschitz_k;

  /// He-uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero bias.
  static Conv2dLayer make(std::string name, int cin, int cout, int kernel, int stride, bool bias, SplitMix64 &rng);

  ad::Tensor effective_weight() const;
  ad::Tensor forward(ad::Tensor const &x) const;
};

struct BatchNormLayer
{
  std::string name;
  ad::Parameter scale;
  ad::Parameter shift;
  double eps = 1e-5;

  static BatchNormLayer make(std::string name, int channels);
  ad::Tensor forward(ad::Tensor const &x) const;
};

/// conv -> BN -> ReLU (encoder-decoder) or conv -> ReLU -> BN (decoders).
struct ConvBlock
{
  Conv2dLayer conv;
  BatchNormLayer bn;
  bool relu_before_bn = false;

  ad::Tensor forward(ad::Tensor const &x) const;
};

/// Unlearnt upsampler, or zero insertion followed by a learnable kernel
/// (initialized to the bilinear interpolation kernel) for the transposed kind.
struct UpsampleLayer
{
  Upsampler upsampler;
  std::optional<Conv2dLayer> learnable;

  ad::Tensor forward(ad::Tensor const &x) const;
};

struct LayerInfo
{
  std::string name;
  std::string kind;
  std::int64_t params = 0;
};

/// G_theta together with its fixed input z.
class Network
{
public:
  virtual ~Network() = default;

  ArchSpec const &spec() const { return spec_; }
  ad::Tensor const &input() const { return input_; }
  void set_input(ad::Tensor z) { input_ = std::move(z); }

  /// Output (1, 2, N, N): real and imaginary planes of the image.
  virtual ad::Tensor forward(ad::Tensor const &z) const = 0;
  ad::Tensor forward() const { return forward(input_); }

  /// Trainable tensors in a fixed order; Lipschitz constants excluded.
  std::vector<ad::Parameter> parameters() const;
  std::vector<Conv2dLayer *> conv_layers();
  std::vector<Conv2dLayer const *> conv_layers() const;
  /// Ordered layer list (for summaries and tests).
  std::vector<LayerInfo> layers() const;
  int concat_count() const { return concat_count_; }

protected:
  explicit Network(ArchSpec spec)
    : spec_(std::move(spec))
  {
  }
  // Visits every layer in forward order.
  struct Visitor
  {
    std::function<void(Conv2dLayer &)> conv;
    std::function<void(BatchNormLayer &)> bn;
    std::function<void(UpsampleLayer &)> up;
  };
  virtual void visit(Visitor const &v) = 0;
  void visit(Visitor const &v) const { const_cast<Network *>(this)->visit(v); }

  ArchSpec spec_;
  ad::Tensor input_;
  int concat_count_ = 0;
};

/// U(0, 1) noise of shape (1, channels, h, w) from the seeded generator.
ad::Tensor make_noise_input(int channels, int h, int w, std::uint64_t seed);

/// Hourglass with `depth` levels. Encoder level: stride-2 kxk conv, BN, ReLU,
/// kxk conv, BN, ReLU. Decoder level: upsample, [concat skip], kxk conv, BN,
/// ReLU, 1x1 conv, BN, ReLU. A skip branch is a 1x1 conv to skip_channels,
/// BN, ReLU applied to the level's input. Head: 1x1 conv to 2 channels.
std::unique_ptr<Network> build_encoder_decoder(ArchSpec const &spec);

/// Seven (upsample, conv, ReLU, BN) layers of constant width and a 1x1 head.
/// The first `decoder_upsamples` layers upsample by 2 (none when the
/// upsampler kind is none).
std::unique_ptr<Network> build_conv_decoder(ArchSpec const &spec);
std::unique_ptr<Network> build_deep_decoder(ArchSpec const &spec);

/// Dispatches on spec.family.
std::unique_ptr<Network> build_network(ArchSpec const &spec);

std::int64_t count_params(Network const &net);

} // namespace priorforge::arch
