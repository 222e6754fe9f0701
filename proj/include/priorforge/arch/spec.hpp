#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace priorforge::arch {

enum class Family
{
  EncoderDecoder,
  ConvDecoder,
  DeepDecoder,
};

enum class SkipPolicy
{
  Zero,
  Half,
  Full,
};

enum class UpsamplerKind
{
  Nearest,
  Bilinear,
  L100,
  Transposed,
  None,
};

/// Declarative network description. Encoder-decoders are labelled
/// A_<depth>_<skips>_<width>_<kernel> (e.g. A_2_full_64_3); the decoder-only
/// families are ConvDecoder_<width> and DeepDecoder_<width>.
struct ArchSpec
{
  Family family = Family::EncoderDecoder;
  int depth = 2;
  SkipPolicy skips = SkipPolicy::Full;
  int width = 64;
  int kernel = 3;
  UpsamplerKind upsampler = UpsamplerKind::Nearest;
  int size = 64;
  std::uint64_t seed = 0;
  /// Decoder families only: number of leading layers that upsample by 2.
  int decoder_upsamples = 4;
  /// Channels produced by each 1x1 skip projection.
  int skip_channels = 4;

  /// Parses a label; the upsampler defaults to nearest for encoder-decoders
  /// and bilinear for the decoder families. Throws ConfigError naming the
  /// offending field.
  static ArchSpec parse(std::string_view label);
  std::string label() const;
  /// Throws ConfigError if fields are inconsistent.
  void validate() const;
};

std::string_view to_string(Family f);
std::string_view to_string(SkipPolicy s);
std::string_view to_string(UpsamplerKind k);
UpsamplerKind parse_upsampler(std::string_view name);
SkipPolicy parse_skips(std::string_view name);

} // namespace priorforge::arch
