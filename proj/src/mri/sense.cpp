#include "priorforge/mri/sense.hpp"

#include "priorforge/error.hpp"

#include <Eigen/Core>
#include <fmt/format.h>

#include <cmath>
#include <map>
#include <numbers>

namespace priorforge::mri {

namespace {

using CMat = Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Centered orthonormal DFT matrix: F[k][n] = exp(-2 pi i (k-c)(n-c) / N) / sqrt(N),
// c = N/2. The phase index is reduced mod N before the trig call.
CMat const &dft_matrix(Index n)
{
  thread_local std::map<Index, CMat> cache;
  auto it = cache.find(n);
  if (it != cache.end()) {
    return it->second;
  }
  CMat F(n, n);
  Index const c = n / 2;
  double const scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      Index const ph = (((k - c) * (j - c)) % n + n) % n;
      double const a = -2.0 * std::numbers::pi * static_cast<double>(ph) / static_cast<double>(n);
      F(k, j) = std::complex<double>(std::cos(a), std::sin(a)) * scale;
    }
  }
  return cache.emplace(n, std::move(F)).first->second;
}

CMat to_matrix(ComplexImage const &img)
{
  CMat m(img.rows, img.cols);
  for (Index i = 0; i < img.size(); ++i) {
    m.data()[i] = {img.re[i], img.im[i]};
  }
  return m;
}

ComplexImage from_matrix(CMat const &m)
{
  ComplexImage img(m.rows(), m.cols());
  for (Index i = 0; i < img.size(); ++i) {
    img.re[i] = m.data()[i].real();
    img.im[i] = m.data()[i].imag();
  }
  return img;
}

void check_geometry(ComplexImage const &x, CoilSensitivities const &csm, SamplingMask const &mask)
{
  csm.validate();
  if (!x.same_extent(csm.coils.front())) {
    throw ShapeError(fmt::format("image is {}x{} but coil maps are {}x{}", x.rows, x.cols, csm.rows(), csm.cols()));
  }
  if (mask.rows != x.rows || mask.cols != x.cols) {
    throw ShapeError(fmt::format("mask is {}x{} but image is {}x{}", mask.rows, mask.cols, x.rows, x.cols));
  }
}

} // namespace

ComplexImage dft2_centered(ComplexImage const &img)
{
  CMat const &Fh = dft_matrix(img.rows);
  CMat const &Fw = dft_matrix(img.cols);
  CMat const X = Fh * to_matrix(img) * Fw.transpose();
  return from_matrix(X);
}

ComplexImage idft2_centered(ComplexImage const &spec)
{
  CMat const &Fh = dft_matrix(spec.rows);
  CMat const &Fw = dft_matrix(spec.cols);
  CMat const x = Fh.adjoint() * to_matrix(spec) * Fw.conjugate();
  return from_matrix(x);
}

std::vector<ComplexImage> coil_images(ComplexImage const &x, CoilSensitivities const &csm)
{
  csm.validate();
  if (!x.same_extent(csm.coils.front())) {
    throw ShapeError(fmt::format("image is {}x{} but coil maps are {}x{}", x.rows, x.cols, csm.rows(), csm.cols()));
  }
  std::vector<ComplexImage> out;
  out.reserve(csm.coils.size());
  for (auto const &s : csm.coils) {
    ComplexImage ci(x.rows, x.cols);
    for (Index p = 0; p < x.size(); ++p) {
      ci.re[p] = s.re[p] * x.re[p] - s.im[p] * x.im[p];
      ci.im[p] = s.re[p] * x.im[p] + s.im[p] * x.re[p];
    }
    out.push_back(std::move(ci));
  }
  return out;
}

KSpace forward_operator(ComplexImage const &x, CoilSensitivities const &csm, SamplingMask const &mask)
{
  check_geometry(x, csm, mask);
  KSpace y;
  for (auto &ci : coil_images(x, csm)) {
    ComplexImage k = dft2_centered(ci);
    for (Index p = 0; p < k.size(); ++p) {
      if (mask.values[p] == 0) {
        k.re[p] = 0.0;
        k.im[p] = 0.0;
      }
    }
    y.coils.push_back(std::move(k));
  }
  return y;
}

ComplexImage adjoint_operator(KSpace const &y, CoilSensitivities const &csm, SamplingMask const &mask)
{
  csm.validate();
  if (y.count() != csm.count()) {
    throw ShapeError(fmt::format("k-space has {} coils but sensitivities have {}", y.count(), csm.count()));
  }
  ComplexImage x(csm.rows(), csm.cols());
  check_geometry(x, csm, mask);
  for (std::size_t i = 0; i < y.coils.size(); ++i) {
    ComplexImage k = y.coils[i];
    if (!k.same_extent(x)) {
      throw ShapeError(fmt::format("k-space coil {} is {}x{}, expected {}x{}", i, k.rows, k.cols, x.rows, x.cols));
    }
    for (Index p = 0; p < k.size(); ++p) {
      if (mask.values[p] == 0) {
        k.re[p] = 0.0;
        k.im[p] = 0.0;
      }
    }
    ComplexImage const img = idft2_centered(k);
    auto const &s = csm.coils[i];
    for (Index p = 0; p < x.size(); ++p) {
      // conj(s) * img
      x.re[p] += s.re[p] * img.re[p] + s.im[p] * img.im[p];
      x.im[p] += s.re[p] * img.im[p] - s.im[p] * img.re[p];
    }
  }
  return x;
}

RealImage rss_combine(std::vector<ComplexImage> const &coil_images)
{
  if (coil_images.empty()) {
    throw ShapeError("rss_combine: at least one coil image required");
  }
  auto const &first = coil_images.front();
  RealImage out(first.rows, first.cols);
  for (auto const &ci : coil_images) {
    if (!ci.same_extent(first)) {
      throw ShapeError("rss_combine: coil images differ in extent");
    }
    for (Index p = 0; p < ci.size(); ++p) {
      out.data[p] += ci.re[p] * ci.re[p] + ci.im[p] * ci.im[p];
    }
  }
  for (auto &v : out.data) {
    v = std::sqrt(v);
  }
  return out;
}

RealImage zero_filled_recon(KSpace const &y, CoilSensitivities const &csm, SamplingMask const &mask)
{
  csm.validate();
  if (y.count() != csm.count()) {
    throw ShapeError(fmt::format("k-space has {} coils but sensitivities have {}", y.count(), csm.count()));
  }
  std::vector<ComplexImage> imgs;
  for (auto k : y.coils) {
    if (k.rows != mask.rows || k.cols != mask.cols) {
      throw ShapeError("zero_filled_recon: k-space and mask differ in extent");
    }
    for (Index p = 0; p < k.size(); ++p) {
      if (mask.values[p] == 0) {
        k.re[p] = 0.0;
        k.im[p] = 0.0;
      }
    }
    imgs.push_back(idft2_centered(k));
  }
  return rss_combine(imgs);
}

std::complex<double> inner(ComplexImage const &a, ComplexImage const &b)
{
  std::complex<double> s{0.0, 0.0};
  for (Index p = 0; p < a.size(); ++p) {
    s += std::conj(std::complex<double>(a.re[p], a.im[p])) * std::complex<double>(b.re[p], b.im[p]);
  }
  return s;
}

std::complex<double> inner(KSpace const &a, KSpace const &b)
{
  std::complex<double> s{0.0, 0.0};
  for (std::size_t i = 0; i < a.coils.size(); ++i) {
    s += inner(a.coils[i], b.coils[i]);
  }
  return s;
}

double norm(ComplexImage const &a) { return std::sqrt(inner(a, a).real()); }
double norm(KSpace const &a) { return std::sqrt(inner(a, a).real()); }

} // namespace priorforge::mri
