#pragma once

#include <cstdint>
#include <vector>

namespace priorforge::mri {

using Index = std::int64_t;

/// Real-valued plane, row-major.
struct RealImage
{
  Index rows = 0;
  Index cols = 0;
  std::vector<double> data;

  RealImage() = default;
  RealImage(Index r, Index c, double fill = 0.0)
    : rows(r)
    , cols(c)
    , data(static_cast<std::size_t>(r * c), fill)
  {
  }

  double &operator()(Index r, Index c) { return data[static_cast<std::size_t>(r * cols + c)]; }
  double operator()(Index r, Index c) const { return data[static_cast<std::size_t>(r * cols + c)]; }
  Index size() const { return rows * cols; }
};

/// Complex plane stored as separate real and imaginary planes.
struct ComplexImage
{
  Index rows = 0;
  Index cols = 0;
  std::vector<double> re;
  std::vector<double> im;

  ComplexImage() = default;
  ComplexImage(Index r, Index c)
    : rows(r)
    , cols(c)
    , re(static_cast<std::size_t>(r * c), 0.0)
    , im(static_cast<std::size_t>(r * c), 0.0)
  {
  }

  Index size() const { return rows * cols; }
  bool same_extent(ComplexImage const &o) const { return rows == o.rows && cols == o.cols; }
  RealImage magnitude() const;
};

/// Per-coil complex maps with sum_i |S_i|^2 = 1 over the object support.
struct CoilSensitivities
{
  std::vector<ComplexImage> coils;

  Index count() const { return static_cast<Index>(coils.size()); }
  Index rows() const { return coils.empty() ? 0 : coils.front().rows; }
  Index cols() const { return coils.empty() ? 0 : coils.front().cols; }
  /// Throws ShapeError on empty/mismatched coils.
  void validate() const;
  /// Max deviation of sum_i |S_i(p)|^2 from 1 over all pixels.
  double normalization_error() const;
};

/// Cartesian line mask: every column is entirely sampled or entirely empty.
struct SamplingMask
{
  Index rows = 0;
  Index cols = 0;
  std::vector<std::uint8_t> values;

  SamplingMask() = default;
  SamplingMask(Index r, Index c, std::uint8_t fill = 0)
    : rows(r)
    , cols(c)
    , values(static_cast<std::size_t>(r * c), fill)
  {
  }

  static SamplingMask from_columns(Index rows, std::vector<bool> const &columns);

  bool at(Index r, Index c) const { return values[static_cast<std::size_t>(r * cols + c)] != 0; }
  bool column_sampled(Index c) const { return rows > 0 && at(0, c); }
  std::vector<bool> columns() const;
  Index acquired() const;       ///< number of ones
  Index acquired_lines() const; ///< number of sampled columns
  bool column_structured() const;
};

/// Per-coil k-space planes (centered spectrum).
struct KSpace
{
  std::vector<ComplexImage> coils;

  Index count() const { return static_cast<Index>(coils.size()); }
};

} // namespace priorforge::mri
