#pragma once

#include "priorforge/error.hpp"
#include "priorforge/mri/images.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace priorforge::data {

/// On-disk formats (all integers little-endian):
///
///   .cplx  "CPLX1\0" | u32 rank | u32 extents[rank] | f32 (re, im) pairs | u32 crc32
///   .mask  "MASK1\0" | u32 rank=2 | u32 extents[2]  | u8 values in {0,1}  | u32 crc32
///
/// Rank-2 .cplx holds one plane (rows, cols); rank 3 holds a stack
/// (planes, rows, cols), plane-major then row-major. The CRC covers the
/// payload bytes only.
class IoError : public Error
{
public:
  enum class Kind
  {
    Open,
    BadMagic,
    Truncated,
    DimensionOverflow,
    ZeroExtent,
    BadRank,
    BadValue,
    Checksum,
  };

  IoError(Kind kind, std::string const &msg)
    : Error(msg)
    , kind_(kind)
  {
  }
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Planes read from a .cplx file plus the rank they were stored with.
struct CplxArray
{
  std::uint32_t rank = 0;
  std::vector<mri::ComplexImage> planes;
};

void write_cplx(std::filesystem::path const &path, mri::ComplexImage const &image);
void write_cplx(std::filesystem::path const &path, std::vector<mri::ComplexImage> const &planes);
CplxArray read_cplx(std::filesystem::path const &path);

void write_mask(std::filesystem::path const &path, mri::SamplingMask const &mask);
mri::SamplingMask read_mask(std::filesystem::path const &path);

} // namespace priorforge::data
