#include "priorforge/arch/network.hpp"
#include "priorforge/arch/upsampler.hpp"
#include "priorforge/error.hpp"
#include "priorforge/metrics/metrics.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <set>

using namespace priorforge;
using ad::Tensor;

namespace {

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * target; }

std::int64_t params_of(std::string const &label)
{
  auto spec = arch::ArchSpec::parse(label);
  spec.size = std::max(spec.size, 1 << spec.depth);
  return arch::count_params(*arch::build_network(spec));
}

} // namespace

TEST_CASE("nearest upsampler replicates pixels")
{
  auto up = arch::make_upsampler(arch::UpsamplerKind::Nearest);
  CHECK(up.gain == 4.0);
  auto y = up.apply(Tensor::from({1, 1, 2, 2}, {1, 2, 3, 4}));
  std::vector<double> const expect{1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
  REQUIRE(y.shape() == ad::Shape{1, 1, 4, 4});
  for (int i = 0; i < 16; ++i) {
    CHECK(y.data()[i] == expect[i]);
  }
}

TEST_CASE("bilinear upsampler impulse response")
{
  auto up = arch::make_upsampler(arch::UpsamplerKind::Bilinear);
  std::vector<double> v(16, 0.0);
  v[1 * 4 + 2] = 1.0;
  auto y = up.apply(Tensor::from({1, 1, 4, 4}, v));
  double const t[] = {0.25, 0.5, 0.25};
  for (int r = 0; r < 8; ++r) {
    for (int c = 0; c < 8; ++c) {
      double expect = 0.0;
      if (std::abs(r - 2) <= 1 && std::abs(c - 4) <= 1) {
        expect = 4.0 * t[r - 1] * t[c - 3];
      }
      CHECK(y.data()[r * 8 + c] == expect);
    }
  }
}

TEST_CASE("upsampler taps")
{
  for (auto kind : {arch::UpsamplerKind::Nearest, arch::UpsamplerKind::Bilinear, arch::UpsamplerKind::L100}) {
    auto up = arch::make_upsampler(kind);
    CHECK(std::accumulate(up.taps.begin(), up.taps.end(), 0.0) == Catch::Approx(1.0).margin(1e-5));
    CHECK(up.gain == 4.0);
  }
  CHECK(arch::l100_taps().size() == 17);
  auto t = arch::make_upsampler(arch::UpsamplerKind::Transposed);
  CHECK(t.learnable());
  CHECK_THROWS_AS(t.apply(Tensor::zeros({1, 1, 2, 2})), ConfigError);
}

TEST_CASE("architecture labels")
{
  auto s = arch::ArchSpec::parse("A_5_half_32_3");
  CHECK(s.family == arch::Family::EncoderDecoder);
  CHECK(s.depth == 5);
  CHECK(s.skips == arch::SkipPolicy::Half);
  CHECK(s.width == 32);
  CHECK(s.kernel == 3);
  CHECK(s.label() == "A_5_half_32_3");
  CHECK(arch::ArchSpec::parse("DeepDecoder_128").kernel == 1);
  CHECK(arch::ArchSpec::parse("ConvDecoder_64").upsampler == arch::UpsamplerKind::Bilinear);
  CHECK_THROWS_AS(arch::ArchSpec::parse("B_2_full_64_3"), ConfigError);
  CHECK_THROWS_AS(arch::ArchSpec::parse("A_2_full_64"), ConfigError);
  CHECK_THROWS_AS(arch::ArchSpec::parse("A_2_some_64_3"), ConfigError);
  CHECK_THROWS_AS(arch::ArchSpec::parse("A_2_full_64_4"), ConfigError);
  CHECK_THROWS_AS(arch::ArchSpec::parse("A_0_full_64_3"), ConfigError);
  try {
    arch::ArchSpec::parse("Unet_64");
  } catch (ConfigError const &e) {
    CHECK(std::string(e.what()).find("family") != std::string::npos);
  }
}

TEST_CASE("parameter counts of the test bed")
{
  // Published sizes, matched within 30%.
  CHECK(within(static_cast<double>(params_of("A_2_full_64_3")), 0.24e6, 0.3));
  CHECK(within(static_cast<double>(params_of("A_5_full_256_3")), 9.3e6, 0.3));
  CHECK(within(static_cast<double>(params_of("A_8_full_64_3")), 0.95e6, 0.3));
  CHECK(within(static_cast<double>(params_of("DeepDecoder_256")), 0.47e6, 0.3));
  CHECK(within(static_cast<double>(params_of("ConvDecoder_256")), 4.1e6, 0.3));

  // Exact counts of this layer composition.
  CHECK(params_of("A_2_full_64_3") == 236186);
  CHECK(params_of("A_5_full_256_3") == 9242174);
  CHECK(params_of("A_8_full_64_3") == 944354);
  CHECK(params_of("DeepDecoder_256") == 464642);
  CHECK(params_of("ConvDecoder_256") == 4134658);
}

TEST_CASE("single-layer parameter counts")
{
  SplitMix64 rng(0);
  auto conv = arch::Conv2dLayer::make("c", 64, 64, 3, 1, true, rng);
  CHECK(conv.weight.tensor.numel() + conv.bias->tensor.numel() == 36928);
  auto one = arch::Conv2dLayer::make("d", 256, 256, 1, 1, true, rng);
  CHECK(one.weight.tensor.numel() + one.bias->tensor.numel() == 65792);
}

TEST_CASE("forward shape for every family and upsampler")
{
  using K = arch::UpsamplerKind;
  for (auto kind : {K::Nearest, K::Bilinear, K::L100, K::Transposed, K::None}) {
    for (std::string label : {"A_2_full_8_3", "A_3_half_4_5", "A_1_zero_4_1", "ConvDecoder_8", "DeepDecoder_8"}) {
      auto spec = arch::ArchSpec::parse(label);
      spec.size = 32;
      spec.upsampler = kind;
      INFO(label << " " << arch::to_string(kind));
      auto net = arch::build_network(spec);
      auto y = net->forward();
      CHECK(y.shape() == ad::Shape{1, 2, 32, 32});
      for (double v : y.data()) {
        REQUIRE(std::isfinite(v));
      }
    }
  }
}

TEST_CASE("decoder input extents")
{
  auto spec = arch::ArchSpec::parse("DeepDecoder_8");
  spec.size = 64;
  auto net = arch::build_network(spec);
  CHECK(net->input().shape() == ad::Shape{1, 8, 4, 4});
  spec.upsampler = arch::UpsamplerKind::None;
  CHECK(arch::build_network(spec)->input().shape() == ad::Shape{1, 8, 64, 64});

  auto ed = arch::ArchSpec::parse("A_2_full_16_3");
  ed.size = 32;
  CHECK(arch::build_network(ed)->input().shape() == ad::Shape{1, 16, 32, 32});
}

TEST_CASE("skip policies")
{
  for (int d : {1, 2, 3, 5, 8}) {
    for (auto [name, expect] : {std::pair<std::string, int>{"zero", 0}, {"half", (d + 1) / 2}, {"full", d}}) {
      auto spec = arch::ArchSpec::parse("A_" + std::to_string(d) + "_" + name + "_2_3");
      spec.size = 256;
      CHECK(arch::build_network(spec)->concat_count() == expect);
    }
  }
}

TEST_CASE("parameter names are unique")
{
  for (std::string label : {"A_3_full_8_3", "ConvDecoder_8", "DeepDecoder_8"}) {
    auto spec = arch::ArchSpec::parse(label);
    spec.size = 64;
    spec.upsampler = arch::UpsamplerKind::Transposed;
    auto net = arch::build_network(spec);
    std::set<std::string> names;
    for (auto const &p : net->parameters()) {
      CHECK(names.insert(p.name).second);
    }
    CHECK(names.size() == net->parameters().size());
  }
}

TEST_CASE("forward is deterministic in the seed")
{
  auto spec = arch::ArchSpec::parse("A_2_full_8_3");
  spec.size = 16;
  spec.seed = 42;
  auto a = arch::build_network(spec)->forward();
  auto b = arch::build_network(spec)->forward();
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  spec.seed = 43;
  auto c = arch::build_network(spec)->forward();
  CHECK_FALSE(std::equal(a.data().begin(), a.data().end(), c.data().begin()));
}

TEST_CASE("size must be divisible by the resampling factor")
{
  auto spec = arch::ArchSpec::parse("A_3_full_8_3");
  spec.size = 36;
  CHECK_THROWS_AS(arch::build_network(spec), ShapeError);
  auto dd = arch::ArchSpec::parse("DeepDecoder_8");
  dd.size = 40;
  CHECK_THROWS_AS(arch::build_network(dd), ShapeError);
  CHECK_THROWS_AS(arch::build_deep_decoder(spec), ConfigError);
}

TEST_CASE("make_noise_input")
{
  auto a = arch::make_noise_input(10, 100, 100, 5);
  auto b = arch::make_noise_input(10, 100, 100, 5);
  CHECK(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
  CHECK_FALSE(a.requires_grad());
  double sum = 0.0;
  for (double v : a.data()) {
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    sum += v;
  }
  CHECK(std::abs(sum / 1e5 - 0.5) < 0.01);
}

TEST_CASE("transposed upsampler starts at the bilinear kernel")
{
  auto spec = arch::ArchSpec::parse("DeepDecoder_3");
  spec.size = 32;
  spec.upsampler = arch::UpsamplerKind::Transposed;
  auto net = arch::build_network(spec);
  int found = 0;
  for (auto const *conv : std::as_const(*net).conv_layers()) {
    if (conv->weight.tensor.dim(2) == 3 && !conv->bias) {
      ++found;
      auto w = conv->weight.tensor.data();
      double const t[] = {0.5, 1.0, 0.5};
      for (int o = 0; o < 3; ++o) {
        for (int i = 0; i < 3; ++i) {
          for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
              CHECK(w[((o * 3 + i) * 3 + r) * 3 + c] == (o == i ? t[r] * t[c] : 0.0));
            }
          }
        }
      }
    }
  }
  CHECK(found == 4);
}
