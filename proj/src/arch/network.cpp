#include "priorforge/arch/network.hpp"

#include "priorforge/error.hpp"
#include "priorforge/reg/regularization.hpp"

#include <fmt/format.h>

#include <cmath>

namespace priorforge::arch {

Conv2dLayer Conv2dLayer::make(std::string name, int cin, int cout, int kernel, int stride, bool bias, SplitMix64 &rng)
{
  Conv2dLayer c;
  c.name = std::move(name);
  c.stride = stride;
  c.padding = ad::Padding::same(kernel, kernel);
  double const bound = std::sqrt(6.0 / (static_cast<double>(cin) * kernel * kernel));
  ad::Shape const shape{cout, cin, kernel, kernel};
  std::vector<double> w(static_cast<std::size_t>(ad::numel(shape)));
  for (auto &v : w) {
    v = rng.uniform(-bound, bound);
  }
  c.weight = {c.name + ".weight", ad::Tensor::from(shape, std::move(w), true)};
  if (bias) {
    c.bias = ad::Parameter{c.name + ".bias", ad::Tensor::zeros({cout}, true)};
  }
  return c;
}

ad::Tensor Conv2dLayer::effective_weight() const
{
  if (lipschitz_k) {
    return reg::lipschitz_normalize(weight.tensor, lipschitz_k->tensor);
  }
  return weight.tensor;
}

ad::Tensor Conv2dLayer::forward(ad::Tensor const &x) const
{
  return ad::conv2d(x, effective_weight(), bias ? bias->tensor : ad::Tensor{}, stride, padding);
}

BatchNormLayer BatchNormLayer::make(std::string name, int channels)
{
  BatchNormLayer b;
  b.name = std::move(name);
  b.scale = {b.name + ".scale", ad::Tensor::full({channels}, 1.0, true)};
  b.shift = {b.name + ".shift", ad::Tensor::zeros({channels}, true)};
  return b;
}

ad::Tensor BatchNormLayer::forward(ad::Tensor const &x) const
{
  return ad::batchnorm2d(x, scale.tensor, shift.tensor, eps);
}

ad::Tensor ConvBlock::forward(ad::Tensor const &x) const
{
  auto y = conv.forward(x);
  if (relu_before_bn) {
    return bn.forward(ad::relu(y));
  }
  return ad::relu(bn.forward(y));
}

ad::Tensor UpsampleLayer::forward(ad::Tensor const &x) const
{
  if (upsampler.kind == UpsamplerKind::None) {
    return x;
  }
  if (learnable) {
    return learnable->forward(ad::zero_insert_upsample(x, upsampler.factor, upsampler.factor, upsampler.gain));
  }
  return upsampler.apply(x);
}

std::vector<ad::Parameter> Network::parameters() const
{
  std::vector<ad::Parameter> out;
  auto conv = [&out](Conv2dLayer &c) {
    out.push_back(c.weight);
    if (c.bias) {
      out.push_back(*c.bias);
    }
  };
  Visitor v{conv,
            [&out](BatchNormLayer &b) {
              out.push_back(b.scale);
              out.push_back(b.shift);
            },
            [&conv](UpsampleLayer &u) {
              if (u.learnable) {
                conv(*u.learnable);
              }
            }};
  visit(v);
  return out;
}

std::vector<Conv2dLayer *> Network::conv_layers()
{
  std::vector<Conv2dLayer *> out;
  visit(Visitor{[&out](Conv2dLayer &c) { out.push_back(&c); }, [](BatchNormLayer &) {},
                [&out](UpsampleLayer &u) {
                  if (u.learnable) {
                    out.push_back(&*u.learnable);
                  }
                }});
  return out;
}

std::vector<Conv2dLayer const *> Network::conv_layers() const
{
  auto layers = const_cast<Network *>(this)->conv_layers();
  return {layers.begin(), layers.end()};
}

std::vector<LayerInfo> Network::layers() const
{
  std::vector<LayerInfo> out;
  auto conv_info = [](Conv2dLayer const &c, std::string kind) {
    return LayerInfo{c.name, std::move(kind), c.weight.tensor.numel() + (c.bias ? c.bias->tensor.numel() : 0)};
  };
  visit(Visitor{[&](Conv2dLayer &c) { out.push_back(conv_info(c, "conv")); },
                [&](BatchNormLayer &b) { out.push_back({b.name, "batchnorm", 2 * b.scale.tensor.numel()}); },
                [&](UpsampleLayer &u) {
                  if (u.upsampler.kind == UpsamplerKind::None) {
                    return;
                  }
                  if (u.learnable) {
                    out.push_back(conv_info(*u.learnable, "upsample-transposed"));
                  } else {
                    out.push_back({"", fmt::format("upsample-{}", to_string(u.upsampler.kind)), 0});
                  }
                }});
  return out;
}

ad::Tensor make_noise_input(int channels, int h, int w, std::uint64_t seed)
{
  if (channels < 1 || h < 1 || w < 1) {
    throw ShapeError(fmt::format("noise input: extents must be positive, got {}x{}x{}", channels, h, w));
  }
  SplitMix64 rng(seed);
  std::vector<double> v(static_cast<std::size_t>(channels) * h * w);
  for (auto &x : v) {
    x = rng.uniform();
  }
  return ad::Tensor::from({1, channels, h, w}, std::move(v));
}

namespace {

ConvBlock make_block(std::string const &name, int cin, int cout, int kernel, int stride, bool relu_first, bool bias,
                     SplitMix64 &rng)
{
  ConvBlock b;
  b.conv = Conv2dLayer::make(name + ".conv", cin, cout, kernel, stride, bias, rng);
  b.bn = BatchNormLayer::make(name + ".bn", cout);
  b.relu_before_bn = relu_first;
  return b;
}

UpsampleLayer make_up_layer(std::string const &name, UpsamplerKind kind, int channels, int kernel)
{
  UpsampleLayer u;
  u.upsampler = make_upsampler(kind);
  if (u.upsampler.learnable()) {
    int const kt = std::max(3, kernel);
    Conv2dLayer c;
    c.name = name;
    c.stride = 1;
    c.padding = ad::Padding::same(kt, kt);
    // Bilinear interpolation kernel outer([.5, 1, .5]) on the channel diagonal.
    ad::Shape const shape{channels, channels, kt, kt};
    std::vector<double> w(static_cast<std::size_t>(ad::numel(shape)), 0.0);
    double const tap[3] = {0.5, 1.0, 0.5};
    int const off = kt / 2 - 1;
    for (int ch = 0; ch < channels; ++ch) {
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          auto const idx = ((static_cast<std::size_t>(ch) * channels + ch) * kt + (i + off)) * kt + (j + off);
          w[idx] = tap[i] * tap[j];
        }
      }
    }
    c.weight = {name + ".weight", ad::Tensor::from(shape, std::move(w), true)};
    u.learnable = std::move(c);
  }
  return u;
}

class EncoderDecoder final : public Network
{
public:
  explicit EncoderDecoder(ArchSpec const &spec)
    : Network(spec)
  {
    bool const down = spec.upsampler != UpsamplerKind::None;
    if (down && spec.size % (1 << std::min(spec.depth, 30)) != 0) {
      throw ShapeError(fmt::format("encoder-decoder: N={} is not divisible by 2^{}", spec.size, spec.depth));
    }
    SplitMix64 rng(derive_seed(spec.seed, 1));
    int const w = spec.width, k = spec.kernel, d = spec.depth;
    int const skip_from = spec.skips == SkipPolicy::Full ? 0 : (spec.skips == SkipPolicy::Half ? d - (d + 1) / 2 : d);
    for (int l = 0; l < d; ++l) {
      Level lv;
      auto const tag = fmt::format("enc{}", l);
      if (l >= skip_from) {
        lv.skip = make_block(fmt::format("skip{}", l), w, spec.skip_channels, 1, 1, false, true, rng);
      }
      lv.down = make_block(tag + ".down", w, w, k, down ? 2 : 1, false, true, rng);
      lv.conv = make_block(tag + ".conv", w, w, k, 1, false, true, rng);
      levels_.push_back(std::move(lv));
    }
    for (int l = d - 1; l >= 0; --l) {
      auto &lv = levels_[static_cast<std::size_t>(l)];
      auto const tag = fmt::format("dec{}", l);
      int const cin = w + (lv.skip ? spec.skip_channels : 0);
      lv.up = make_up_layer(tag + ".up", spec.upsampler, w, k);
      lv.dec1 = make_block(tag + ".conv1", cin, w, k, 1, false, true, rng);
      lv.dec2 = make_block(tag + ".conv2", w, w, 1, 1, false, true, rng);
      if (lv.skip) {
        ++concat_count_;
      }
    }
    head_ = Conv2dLayer::make("head", w, 2, 1, 1, true, rng);
    input_ = make_noise_input(w, spec.size, spec.size, derive_seed(spec.seed, 2));
  }

  ad::Tensor forward(ad::Tensor const &z) const override
  {
    std::vector<ad::Tensor> skips(levels_.size());
    ad::Tensor x = z;
    for (std::size_t l = 0; l < levels_.size(); ++l) {
      auto const &lv = levels_[l];
      if (lv.skip) {
        skips[l] = lv.skip->forward(x);
      }
      x = lv.conv.forward(lv.down.forward(x));
    }
    for (std::size_t l = levels_.size(); l-- > 0;) {
      auto const &lv = levels_[l];
      x = lv.up.forward(x);
      if (lv.skip) {
        x = ad::concat_channels(x, skips[l]);
      }
      x = lv.dec2.forward(lv.dec1.forward(x));
    }
    return head_.forward(x);
  }

protected:
  void visit(Visitor const &v) override
  {
    auto block = [&v](ConvBlock &b) {
      v.conv(b.conv);
      v.bn(b.bn);
    };
    for (auto &lv : levels_) {
      if (lv.skip) {
        block(*lv.skip);
      }
      block(lv.down);
      block(lv.conv);
    }
    for (auto it = levels_.rbegin(); it != levels_.rend(); ++it) {
      v.up(it->up);
      block(it->dec1);
      block(it->dec2);
    }
    v.conv(head_);
  }

private:
  struct Level
  {
    std::optional<ConvBlock> skip;
    ConvBlock down, conv;
    UpsampleLayer up;
    ConvBlock dec1, dec2;
  };
  std::vector<Level> levels_;
  Conv2dLayer head_;
};

class Decoder final : public Network
{
public:
  static constexpr int kLayers = 7;

  explicit Decoder(ArchSpec const &spec)
    : Network(spec)
  {
    int const ups = spec.upsampler == UpsamplerKind::None ? 0 : spec.decoder_upsamples;
    if (spec.size % (1 << ups) != 0) {
      throw ShapeError(fmt::format("decoder: N={} is not divisible by 2^{}", spec.size, ups));
    }
    SplitMix64 rng(derive_seed(spec.seed, 1));
    int const w = spec.width;
    int const k = spec.family == Family::DeepDecoder ? 1 : spec.kernel;
    for (int l = 0; l < kLayers; ++l) {
      Layer layer;
      auto const tag = fmt::format("layer{}", l);
      if (l < ups) {
        layer.up = make_up_layer(tag + ".up", spec.upsampler, w, k);
      }
      layer.block = make_block(tag, w, w, k, 1, true, true, rng);
      layers_.push_back(std::move(layer));
    }
    head_ = Conv2dLayer::make("head", w, 2, 1, 1, true, rng);
    int const z = spec.size >> ups;
    input_ = make_noise_input(w, z, z, derive_seed(spec.seed, 2));
  }

  ad::Tensor forward(ad::Tensor const &z) const override
  {
    ad::Tensor x = z;
    for (auto const &layer : layers_) {
      if (layer.up) {
        x = layer.up->forward(x);
      }
      x = layer.block.forward(x);
    }
    return head_.forward(x);
  }

protected:
  void visit(Visitor const &v) override
  {
    for (auto &layer : layers_) {
      if (layer.up) {
        v.up(*layer.up);
      }
      v.conv(layer.block.conv);
      v.bn(layer.block.bn);
    }
    v.conv(head_);
  }

private:
  struct Layer
  {
    std::optional<UpsampleLayer> up;
    ConvBlock block;
  };
  std::vector<Layer> layers_;
  Conv2dLayer head_;
};

} // namespace

std::unique_ptr<Network> build_encoder_decoder(ArchSpec const &spec)
{
  spec.validate();
  if (spec.family != Family::EncoderDecoder) {
    throw ConfigError("build_encoder_decoder: family must be encoder-decoder");
  }
  return std::make_unique<EncoderDecoder>(spec);
}

std::unique_ptr<Network> build_conv_decoder(ArchSpec const &spec)
{
  spec.validate();
  if (spec.family != Family::ConvDecoder) {
    throw ConfigError("build_conv_decoder: family must be conv-decoder");
  }
  return std::make_unique<Decoder>(spec);
}

std::unique_ptr<Network> build_deep_decoder(ArchSpec const &spec)
{
  spec.validate();
  if (spec.family != Family::DeepDecoder) {
    throw ConfigError("build_deep_decoder: family must be deep-decoder");
  }
  return std::make_unique<Decoder>(spec);
}

std::unique_ptr<Network> build_network(ArchSpec const &spec)
{
  switch (spec.family) {
  case Family::EncoderDecoder: return build_encoder_decoder(spec);
  case Family::ConvDecoder: return build_conv_decoder(spec);
  case Family::DeepDecoder: return build_deep_decoder(spec);
  }
  throw ConfigError("arch: unknown family");
}

std::int64_t count_params(Network const &net)
{
  std::int64_t n = 0;
  for (auto const &p : net.parameters()) {
    n += p.tensor.numel();
  }
  return n;
}

} // namespace priorforge::arch
