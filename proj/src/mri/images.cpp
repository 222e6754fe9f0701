#include "priorforge/mri/images.hpp"

#include "priorforge/error.hpp"

#include <fmt/format.h>

#include <cmath>

namespace priorforge::mri {

RealImage ComplexImage::magnitude() const
{
  RealImage out(rows, cols);
  for (std::size_t i = 0; i < re.size(); ++i) {
    out.data[i] = std::hypot(re[i], im[i]);
  }
  return out;
}

void CoilSensitivities::validate() const
{
  if (coils.empty()) {
    throw ShapeError("coil sensitivities: at least one coil required");
  }
  for (std::size_t i = 1; i < coils.size(); ++i) {
    if (!coils[i].same_extent(coils[0])) {
      throw ShapeError(fmt::format("coil sensitivities: coil {} is {}x{}, coil 0 is {}x{}", i, coils[i].rows,
                                   coils[i].cols, coils[0].rows, coils[0].cols));
    }
  }
}

double CoilSensitivities::normalization_error() const
{
  double worst = 0.0;
  for (Index p = 0; p < rows() * cols(); ++p) {
    double s = 0.0;
    for (auto const &c : coils) {
      s += c.re[p] * c.re[p] + c.im[p] * c.im[p];
    }
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

SamplingMask SamplingMask::from_columns(Index rows, std::vector<bool> const &columns)
{
  SamplingMask m(rows, static_cast<Index>(columns.size()));
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < m.cols; ++c) {
      m.values[static_cast<std::size_t>(r * m.cols + c)] = columns[static_cast<std::size_t>(c)] ? 1 : 0;
    }
  }
  return m;
}

std::vector<bool> SamplingMask::columns() const
{
  std::vector<bool> out(static_cast<std::size_t>(cols));
  for (Index c = 0; c < cols; ++c) {
    out[static_cast<std::size_t>(c)] = column_sampled(c);
  }
  return out;
}

Index SamplingMask::acquired() const
{
  Index n = 0;
  for (auto v : values) {
    n += v != 0;
  }
  return n;
}

Index SamplingMask::acquired_lines() const
{
  Index n = 0;
  for (Index c = 0; c < cols; ++c) {
    n += column_sampled(c);
  }
  return n;
}

bool SamplingMask::column_structured() const
{
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 1; r < rows; ++r) {
      if (at(r, c) != at(0, c)) {
        return false;
      }
    }
  }
  return true;
}

} // namespace priorforge::mri
