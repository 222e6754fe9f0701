#include "priorforge/arch/spec.hpp"

#include "priorforge/error.hpp"

#include <fmt/format.h>

#include <charconv>
#include <vector>

namespace priorforge::arch {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto const pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) {
      return out;
    }
    start = pos + 1;
  }
}

int parse_int(std::string_view s, char const *field, std::string_view label)
{
  int v = 0;
  auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError(fmt::format("arch '{}': field '{}' is not an integer ('{}')", label, field, s));
  }
  return v;
}

} // namespace

std::string_view to_string(Family f)
{
  switch (f) {
  case Family::EncoderDecoder: return "encoder-decoder";
  case Family::ConvDecoder: return "conv-decoder";
  case Family::DeepDecoder: return "deep-decoder";
  }
  return "?";
}

std::string_view to_string(SkipPolicy s)
{
  switch (s) {
  case SkipPolicy::Zero: return "zero";
  case SkipPolicy::Half: return "half";
  case SkipPolicy::Full: return "full";
  }
  return "?";
}

std::string_view to_string(UpsamplerKind k)
{
  switch (k) {
  case UpsamplerKind::Nearest: return "nearest";
  case UpsamplerKind::Bilinear: return "bilinear";
  case UpsamplerKind::L100: return "l100";
  case UpsamplerKind::Transposed: return "transposed";
  case UpsamplerKind::None: return "none";
  }
  return "?";
}

UpsamplerKind parse_upsampler(std::string_view name)
{
  for (auto k : {UpsamplerKind::Nearest, UpsamplerKind::Bilinear, UpsamplerKind::L100, UpsamplerKind::Transposed,
                 UpsamplerKind::None}) {
    if (name == to_string(k)) {
      return k;
    }
  }
  throw ConfigError(fmt::format("upsampler: unknown kind '{}' (nearest|bilinear|l100|transposed|none)", name));
}

SkipPolicy parse_skips(std::string_view name)
{
  for (auto s : {SkipPolicy::Zero, SkipPolicy::Half, SkipPolicy::Full}) {
    if (name == to_string(s)) {
      return s;
    }
  }
  throw ConfigError(fmt::format("skips: unknown policy '{}' (zero|half|full)", name));
}

ArchSpec ArchSpec::parse(std::string_view label)
{
  auto const parts = split(label, '_');
  ArchSpec s;
  if (parts[0] == "A") {
    if (parts.size() != 5) {
      throw ConfigError(fmt::format("arch '{}': expected A_<depth>_<skips>_<width>_<kernel>", label));
    }
    s.family = Family::EncoderDecoder;
    s.depth = parse_int(parts[1], "depth", label);
    s.skips = parse_skips(parts[2]);
    s.width = parse_int(parts[3], "width", label);
    s.kernel = parse_int(parts[4], "kernel", label);
    s.upsampler = UpsamplerKind::Nearest;
  } else if (parts[0] == "ConvDecoder" || parts[0] == "DeepDecoder") {
    if (parts.size() != 2) {
      throw ConfigError(fmt::format("arch '{}': expected {}_<width>", label, parts[0]));
    }
    bool const conv = parts[0] == "ConvDecoder";
    s.family = conv ? Family::ConvDecoder : Family::DeepDecoder;
    s.depth = 7;
    s.skips = SkipPolicy::Zero;
    s.width = parse_int(parts[1], "width", label);
    s.kernel = conv ? 3 : 1;
    s.upsampler = UpsamplerKind::Bilinear;
  } else {
    throw ConfigError(
      fmt::format("arch '{}': unknown family '{}' (A | ConvDecoder | DeepDecoder)", label, parts[0]));
  }
  s.validate();
  return s;
}

std::string ArchSpec::label() const
{
  switch (family) {
  case Family::EncoderDecoder: return fmt::format("A_{}_{}_{}_{}", depth, to_string(skips), width, kernel);
  case Family::ConvDecoder: return fmt::format("ConvDecoder_{}", width);
  case Family::DeepDecoder: return fmt::format("DeepDecoder_{}", width);
  }
  return "?";
}

void ArchSpec::validate() const
{
  if (depth < 1) {
    throw ConfigError(fmt::format("arch: depth must be >= 1, got {}", depth));
  }
  if (width < 1) {
    throw ConfigError(fmt::format("arch: width must be >= 1, got {}", width));
  }
  if (kernel < 1 || kernel % 2 == 0) {
    throw ConfigError(fmt::format("arch: kernel must be odd and positive, got {}", kernel));
  }
  if (family == Family::DeepDecoder && kernel != 1) {
    throw ConfigError("arch: deep-decoder uses 1x1 learnable convolutions (kernel must be 1)");
  }
  if (size < 1) {
    throw ConfigError(fmt::format("arch: output size must be >= 1, got {}", size));
  }
  if (skip_channels < 1) {
    throw ConfigError(fmt::format("arch: skip_channels must be >= 1, got {}", skip_channels));
  }
  if (family != Family::EncoderDecoder && (decoder_upsamples < 0 || decoder_upsamples > 7)) {
    throw ConfigError(fmt::format("arch: decoder_upsamples must be in [0, 7], got {}", decoder_upsamples));
  }
}

} // namespace priorforge::arch
