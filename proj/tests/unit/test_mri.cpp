#include "random_data.hpp"

#include "priorforge/data/phantom.hpp"
#include "priorforge/data/sampling.hpp"
#include "priorforge/error.hpp"
#include "priorforge/metrics/metrics.hpp"
#include "priorforge/mri/sense.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>

using namespace priorforge;
using Catch::Approx;

namespace {

double max_diff(mri::ComplexImage const &a, mri::ComplexImage const &b)
{
  double m = 0.0;
  for (std::size_t i = 0; i < a.re.size(); ++i) {
    m = std::max({m, std::abs(a.re[i] - b.re[i]), std::abs(a.im[i] - b.im[i])});
  }
  return m;
}

double sum_abs2(mri::ComplexImage const &a)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.re.size(); ++i) {
    s += a.re[i] * a.re[i] + a.im[i] * a.im[i];
  }
  return s;
}

mri::CoilSensitivities unit_coil(mri::Index n)
{
  mri::ComplexImage one(n, n);
  std::fill(one.re.begin(), one.re.end(), 1.0);
  return {{one}};
}

} // namespace

TEST_CASE("dft2_centered of a constant image")
{
  for (mri::Index n : {8, 9}) {
    mri::ComplexImage x(n, n);
    std::fill(x.re.begin(), x.re.end(), 0.75);
    auto X = mri::dft2_centered(x);
    for (mri::Index r = 0; r < n; ++r) {
      for (mri::Index c = 0; c < n; ++c) {
        auto const i = static_cast<std::size_t>(r * n + c);
        double const expect = (r == n / 2 && c == n / 2) ? 0.75 * static_cast<double>(n) : 0.0;
        CHECK(X.re[i] == Approx(expect).margin(1e-12));
        CHECK(X.im[i] == Approx(0.0).margin(1e-12));
      }
    }
  }
}

TEST_CASE("dft2_centered is unitary and inverted by idft2_centered")
{
  SplitMix64 rng(21);
  for (auto [rows, cols] : {std::pair<mri::Index, mri::Index>{16, 16}, {12, 10}, {7, 5}}) {
    auto x = pftest::random_image(rows, cols, rng);
    auto X = mri::dft2_centered(x);
    CHECK(std::abs(sum_abs2(x) - sum_abs2(X)) < 1e-12 * sum_abs2(x));
    CHECK(max_diff(mri::idft2_centered(X), x) < 1e-12);
  }
}

TEST_CASE("forward_operator")
{
  SplitMix64 rng(22);
  auto x = pftest::random_image(16, 16, rng);

  SECTION("single unit coil and full mask is the DFT")
  {
    auto y = mri::forward_operator(x, unit_coil(16), mri::SamplingMask(16, 16, 1));
    REQUIRE(y.count() == 1);
    CHECK(max_diff(y.coils[0], mri::dft2_centered(x)) == 0.0);
  }
  SECTION("all-zero mask annihilates")
  {
    auto y = mri::forward_operator(x, data::generate_csm(4, 16), mri::SamplingMask(16, 16, 0));
    for (auto const &k : y.coils) {
      CHECK(sum_abs2(k) == 0.0);
    }
  }
  SECTION("unsampled entries are exactly zero")
  {
    auto mask = pftest::random_mask(16, rng);
    auto y = mri::forward_operator(x, data::generate_csm(3, 16), mask);
    for (auto const &k : y.coils) {
      for (mri::Index r = 0; r < 16; ++r) {
        for (mri::Index c = 0; c < 16; ++c) {
          if (!mask.at(r, c)) {
            CHECK(k.re[r * 16 + c] == 0.0);
            CHECK(k.im[r * 16 + c] == 0.0);
          }
        }
      }
    }
  }
  SECTION("linear")
  {
    auto csm = pftest::random_csm(3, 16, rng);
    auto mask = pftest::random_mask(16, rng);
    auto x2 = pftest::random_image(16, 16, rng);
    double const alpha = -0.37;
    mri::ComplexImage comb(16, 16);
    for (std::size_t i = 0; i < comb.re.size(); ++i) {
      comb.re[i] = alpha * x.re[i] + x2.re[i];
      comb.im[i] = alpha * x.im[i] + x2.im[i];
    }
    auto a = mri::forward_operator(x, csm, mask);
    auto b = mri::forward_operator(x2, csm, mask);
    auto y = mri::forward_operator(comb, csm, mask);
    for (std::size_t c = 0; c < 3; ++c) {
      for (std::size_t i = 0; i < comb.re.size(); ++i) {
        CHECK(y.coils[c].re[i] == Approx(alpha * a.coils[c].re[i] + b.coils[c].re[i]).margin(1e-12));
        CHECK(y.coils[c].im[i] == Approx(alpha * a.coils[c].im[i] + b.coils[c].im[i]).margin(1e-12));
      }
    }
  }
  SECTION("extent mismatch")
  {
    CHECK_THROWS_AS(mri::forward_operator(x, data::generate_csm(2, 8), mri::SamplingMask(16, 16, 1)), ShapeError);
    CHECK_THROWS_AS(mri::forward_operator(x, data::generate_csm(2, 16), mri::SamplingMask(8, 8, 1)), ShapeError);
  }
}

TEST_CASE("adjoint identity on random draws")
{
  SplitMix64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    mri::Index const n = 8 + 2 * (trial % 5);
    mri::Index const coils = 1 + trial % 4;
    auto csm = (trial % 2 == 0) ? pftest::random_csm(coils, n, rng) : data::generate_csm(coils, n);
    auto mask = pftest::random_mask(n, rng);
    auto x = pftest::random_image(n, n, rng);
    auto y = pftest::random_kspace(coils, n, rng);
    auto Ax = mri::forward_operator(x, csm, mask);
    auto lhs = mri::inner(Ax, y);
    auto rhs = mri::inner(x, mri::adjoint_operator(y, csm, mask));
    CHECK(std::abs(lhs - rhs) / (mri::norm(Ax) * mri::norm(y) + 1e-300) < 1e-10);
  }
}

TEST_CASE("adjoint_operator")
{
  SplitMix64 rng(24);
  auto csm = data::generate_csm(4, 16);
  auto x = pftest::random_image(16, 16, rng);

  SECTION("inverts the forward operator on full sampling")
  {
    mri::SamplingMask full(16, 16, 1);
    CHECK(max_diff(mri::adjoint_operator(mri::forward_operator(x, csm, full), csm, full), x) < 1e-10);
  }
  SECTION("zero k-space gives a zero image")
  {
    mri::KSpace y;
    for (int c = 0; c < 4; ++c) {
      y.coils.emplace_back(16, 16);
    }
    CHECK(sum_abs2(mri::adjoint_operator(y, csm, pftest::random_mask(16, rng))) == 0.0);
  }
  SECTION("linear in y")
  {
    auto mask = pftest::random_mask(16, rng);
    auto a = pftest::random_kspace(4, 16, rng);
    auto b = pftest::random_kspace(4, 16, rng);
    mri::KSpace s = a;
    for (std::size_t c = 0; c < 4; ++c) {
      for (std::size_t i = 0; i < s.coils[c].re.size(); ++i) {
        s.coils[c].re[i] = 2.0 * a.coils[c].re[i] + b.coils[c].re[i];
        s.coils[c].im[i] = 2.0 * a.coils[c].im[i] + b.coils[c].im[i];
      }
    }
    auto ia = mri::adjoint_operator(a, csm, mask);
    auto ib = mri::adjoint_operator(b, csm, mask);
    auto is = mri::adjoint_operator(s, csm, mask);
    for (std::size_t i = 0; i < is.re.size(); ++i) {
      CHECK(is.re[i] == Approx(2.0 * ia.re[i] + ib.re[i]).margin(1e-12));
      CHECK(is.im[i] == Approx(2.0 * ia.im[i] + ib.im[i]).margin(1e-12));
    }
  }
  SECTION("coil count mismatch")
  {
    CHECK_THROWS_AS(mri::adjoint_operator(pftest::random_kspace(3, 16, rng), csm, mri::SamplingMask(16, 16, 1)),
                    ShapeError);
  }
}

TEST_CASE("rss_combine")
{
  mri::ComplexImage a(1, 2), b(1, 2);
  a.re = {3.0, 0.0};
  a.im = {0.0, -1.0};
  b.re = {0.0, 0.0};
  b.im = {4.0, 0.0};
  auto r = mri::rss_combine({a, b});
  CHECK(r(0, 0) == 5.0);
  CHECK(r(0, 1) == 1.0);

  auto single = mri::rss_combine({a});
  CHECK(single(0, 0) == 3.0);
  CHECK(single(0, 1) == 1.0);

  auto swapped = mri::rss_combine({b, a});
  CHECK(swapped.data == r.data);

  CHECK_THROWS_AS(mri::rss_combine({}), ShapeError);
}

TEST_CASE("zero_filled_recon")
{
  auto phantom = data::generate_phantom(data::PhantomSpec::head(64, 0));
  auto csm = data::generate_csm(4, 64);
  auto truth = mri::rss_combine(mri::coil_images(phantom, csm));

  mri::SamplingMask full(64, 64, 1);
  auto zf_full = mri::zero_filled_recon(mri::forward_operator(phantom, csm, full), csm, full);
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    CHECK(zf_full.data[i] == Approx(truth.data[i]).margin(1e-10));
  }

  auto mask = data::generate_cartesian_mask({64, 0, 4.0, 5, 0});
  auto zf = mri::zero_filled_recon(mri::forward_operator(phantom, csm, mask), csm, mask);
  CHECK(metrics::psnr(zf, truth) < metrics::psnr(zf_full, truth));
  CHECK(std::isfinite(metrics::psnr(zf, truth)));

  mri::KSpace zero;
  for (int c = 0; c < 4; ++c) {
    zero.coils.emplace_back(64, 64);
  }
  for (double v : mri::zero_filled_recon(zero, csm, mask).data) {
    CHECK(v == 0.0);
  }
}
