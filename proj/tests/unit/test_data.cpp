#include "random_data.hpp"

#include "priorforge/data/io.hpp"
#include "priorforge/data/phantom.hpp"
#include "priorforge/data/sampling.hpp"
#include "priorforge/mri/sense.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace priorforge;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(std::string const &name)
{
  auto p = fs::temp_directory_path() / ("priorforge_test_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

double magnitude(mri::ComplexImage const &x, mri::Index r, mri::Index c)
{
  auto const i = static_cast<std::size_t>(r * x.cols + c);
  return std::hypot(x.re[i], x.im[i]);
}

} // namespace

TEST_CASE("generate_phantom")
{
  SECTION("no ellipses gives a zero image")
  {
    data::PhantomSpec s;
    s.size = 32;
    auto x = data::generate_phantom(s);
    for (std::size_t i = 0; i < x.re.size(); ++i) {
      CHECK(x.re[i] == 0.0);
      CHECK(x.im[i] == 0.0);
    }
  }
  SECTION("centered circle of radius N/4 is an indicator")
  {
    data::PhantomSpec s;
    s.size = 64;
    s.ellipses = {{0.0, 0.0, 0.5, 0.5, 0.0, 1.0}};
    auto x = data::generate_phantom(s);
    for (mri::Index r = 0; r < 64; ++r) {
      for (mri::Index c = 0; c < 64; ++c) {
        double const dy = static_cast<double>(r) + 0.5 - 32.0, dx = static_cast<double>(c) + 0.5 - 32.0;
        double const rad = std::hypot(dx, dy);
        if (rad < 15.5) {
          CHECK(magnitude(x, r, c) == Catch::Approx(1.0).epsilon(1e-12));
        } else if (rad > 16.5) {
          CHECK(magnitude(x, r, c) == 0.0);
        }
      }
    }
  }
  SECTION("head phantom at N = 64 stays within unit magnitude and has phase")
  {
    auto x = data::generate_phantom(data::PhantomSpec::head(64, 0));
    double mx = 0.0, im = 0.0;
    for (std::size_t i = 0; i < x.re.size(); ++i) {
      mx = std::max(mx, std::hypot(x.re[i], x.im[i]));
      im = std::max(im, std::abs(x.im[i]));
    }
    CHECK(mx <= 1.0 + 1e-12);
    CHECK(mx > 0.5);
    CHECK(im > 0.0);
  }
  SECTION("deterministic in the seed")
  {
    auto a = data::generate_phantom(data::PhantomSpec::head(32, 5));
    auto b = data::generate_phantom(data::PhantomSpec::head(32, 5));
    auto c = data::generate_phantom(data::PhantomSpec::head(32, 6));
    CHECK(a.re == b.re);
    CHECK(a.im == b.im);
    CHECK(a.im != c.im);
  }
  SECTION("degenerate ellipse and small size are rejected")
  {
    data::PhantomSpec s;
    s.size = 32;
    s.ellipses = {{0.0, 0.0, 0.0, 0.5, 0.0, 1.0}};
    CHECK_THROWS_AS(data::generate_phantom(s), ConfigError);
    CHECK_THROWS_AS(data::generate_phantom(data::PhantomSpec::head(8, 0)), ConfigError);
  }
}

TEST_CASE("generate_csm")
{
  SECTION("one coil has unit magnitude")
  {
    auto s = data::generate_csm(1, 16);
    for (mri::Index r = 0; r < 16; ++r) {
      for (mri::Index c = 0; c < 16; ++c) {
        CHECK(magnitude(s.coils[0], r, c) == Catch::Approx(1.0).epsilon(1e-12));
      }
    }
  }
  SECTION("sum of squares is one for any coil count")
  {
    for (mri::Index c : {1, 2, 3, 4, 8}) {
      CHECK(data::generate_csm(c, 32).normalization_error() < 1e-9);
    }
  }
  SECTION("four coils peak in their own quadrants")
  {
    auto s = data::generate_csm(4, 64);
    // Coil k sits at angle pi/4 + k pi/2: upper right, upper left, lower left, lower right.
    bool const upper[] = {true, true, false, false};
    bool const right[] = {true, false, false, true};
    std::set<std::pair<bool, bool>> seen;
    for (std::size_t k = 0; k < 4; ++k) {
      mri::Index br = 0, bc = 0;
      double best = -1.0;
      for (mri::Index r = 0; r < 64; ++r) {
        for (mri::Index c = 0; c < 64; ++c) {
          if (magnitude(s.coils[k], r, c) > best) {
            best = magnitude(s.coils[k], r, c);
            br = r;
            bc = c;
          }
        }
      }
      CHECK((br < 32) == upper[k]);
      CHECK((bc >= 32) == right[k]);
      seen.insert({br < 32, bc >= 32});
    }
    CHECK(seen.size() == 4);
  }
  SECTION("invalid coil count")
  {
    CHECK_THROWS_AS(data::generate_csm(0, 16), ConfigError);
  }
}

TEST_CASE("generate_cartesian_mask")
{
  SECTION("320 columns, 4x, 25 center lines")
  {
    auto m = data::generate_cartesian_mask({320, 0, 4.0, 25, 0});
    CHECK(m.acquired_lines() == 80);
    CHECK(m.column_structured());
    auto const start = data::center_block_start(320, 25);
    CHECK(start <= 160);
    CHECK(start + 25 > 160);
    for (mri::Index c = start; c < start + 25; ++c) {
      CHECK(m.column_sampled(c));
    }
    CHECK(m.acquired() == 80 * 320);
  }
  SECTION("64 columns, 4x, 5 center lines")
  {
    auto m = data::generate_cartesian_mask({64, 0, 4.0, 5, 0});
    CHECK(m.acquired_lines() == 16);
    auto const start = data::center_block_start(64, 5);
    CHECK(start == 30);
    int center = 0, outer = 0;
    for (mri::Index c = 0; c < 64; ++c) {
      if (m.column_sampled(c)) {
        (c >= start && c < start + 5) ? ++center : ++outer;
      }
    }
    CHECK(center == 5);
    CHECK(outer == 11);
    // Outer picks span the whole outer band.
    std::vector<mri::Index> picks;
    for (mri::Index c = 0; c < 64; ++c) {
      if (m.column_sampled(c) && (c < start || c >= start + 5)) {
        picks.push_back(c);
      }
    }
    CHECK(picks.front() < 8);
    CHECK(picks.back() > 56);
  }
  SECTION("center block symmetric about DC within one column")
  {
    for (mri::Index w : {16, 32, 64, 320}) {
      for (mri::Index n : {1, 2, 3, 4, 5, 25}) {
        if (n > w / 4) {
          continue;
        }
        auto const b = data::center_block_start(w, n);
        auto const left = w / 2 - b, right = b + n - 1 - w / 2;
        CHECK(std::abs(left - right) <= 1);
      }
    }
  }
  SECTION("no acceleration samples everything")
  {
    auto m = data::generate_cartesian_mask({64, 0, 1.0, 5, 0});
    CHECK(m.acquired() == 64 * 64);
  }
  SECTION("infeasible spec")
  {
    CHECK_THROWS_AS(data::generate_cartesian_mask({64, 0, 4.0, 17, 0}), ConfigError);
    CHECK_THROWS_AS(data::generate_cartesian_mask({64, 0, 0.5, 5, 0}), ConfigError);
  }
  SECTION("detect_center_block finds the DC run")
  {
    auto m = data::generate_cartesian_mask({64, 0, 4.0, 5, 0});
    auto [b, e] = data::detect_center_block(m);
    CHECK(b <= 30);
    CHECK(e >= 35);
  }
}

TEST_CASE("simulate_kspace")
{
  auto x = data::generate_phantom(data::PhantomSpec::head(64, 1));
  auto csm = data::generate_csm(4, 64);
  auto mask = data::generate_cartesian_mask({64, 0, 4.0, 5, 0});

  SECTION("zero noise equals the forward operator")
  {
    auto y = data::simulate_kspace(x, csm, mask, {0.0, 3});
    auto ref = mri::forward_operator(x, csm, mask);
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(y.coils[c].re == ref.coils[c].re);
      CHECK(y.coils[c].im == ref.coils[c].im);
    }
  }
  SECTION("noise respects the mask and has the requested spread")
  {
    double const sigma = 0.05;
    auto y = data::simulate_kspace(x, csm, mask, {sigma, 3});
    auto ref = mri::forward_operator(x, csm, mask);
    double s2 = 0.0;
    std::int64_t count = 0;
    for (std::size_t c = 0; c < 4; ++c) {
      for (mri::Index p = 0; p < 64 * 64; ++p) {
        if (mask.values[static_cast<std::size_t>(p)] == 0) {
          CHECK(y.coils[c].re[p] == 0.0);
          CHECK(y.coils[c].im[p] == 0.0);
        } else {
          double const dr = y.coils[c].re[p] - ref.coils[c].re[p];
          double const di = y.coils[c].im[p] - ref.coils[c].im[p];
          s2 += dr * dr + di * di;
          count += 2;
        }
      }
    }
    REQUIRE(count == 8192);
    CHECK(std::abs(std::sqrt(s2 / static_cast<double>(count)) - sigma) < 0.05 * sigma);
  }
  SECTION("deterministic in the seed")
  {
    auto a = data::simulate_kspace(x, csm, mask, {0.1, 9});
    auto b = data::simulate_kspace(x, csm, mask, {0.1, 9});
    CHECK(a.coils[2].re == b.coils[2].re);
  }
  SECTION("negative sigma")
  {
    CHECK_THROWS_AS(data::simulate_kspace(x, csm, mask, {-1.0, 0}), ConfigError);
  }
}

TEST_CASE("cplx and mask files")
{
  auto dir = scratch_dir("io");
  SplitMix64 rng(31);

  SECTION("image round trip is bit-identical")
  {
    // Values representable in float32 survive exactly.
    auto x = pftest::random_image(12, 9, rng);
    for (std::size_t i = 0; i < x.re.size(); ++i) {
      x.re[i] = static_cast<float>(x.re[i]);
      x.im[i] = static_cast<float>(x.im[i]);
    }
    data::write_cplx(dir / "a.cplx", x);
    auto back = data::read_cplx(dir / "a.cplx");
    CHECK(back.rank == 2);
    REQUIRE(back.planes.size() == 1);
    CHECK(back.planes[0].rows == 12);
    CHECK(back.planes[0].cols == 9);
    CHECK(back.planes[0].re == x.re);
    CHECK(back.planes[0].im == x.im);
  }
  SECTION("stack round trip")
  {
    auto csm = data::generate_csm(3, 8);
    data::write_cplx(dir / "s.cplx", csm.coils);
    auto back = data::read_cplx(dir / "s.cplx");
    CHECK(back.rank == 3);
    CHECK(back.planes.size() == 3);
  }
  SECTION("mask round trip")
  {
    auto m = data::generate_cartesian_mask({32, 0, 4.0, 3, 0});
    data::write_mask(dir / "m.mask", m);
    auto back = data::read_mask(dir / "m.mask");
    CHECK(back.rows == 32);
    CHECK(back.values == m.values);
  }

  auto expect_kind = [](auto fn, data::IoError::Kind kind) {
    try {
      fn();
      FAIL("expected an IoError");
    } catch (data::IoError const &e) {
      CHECK(e.kind() == kind);
    }
  };

  SECTION("corrupted magic")
  {
    data::write_cplx(dir / "b.cplx", pftest::random_image(4, 4, rng));
    {
      std::fstream f(dir / "b.cplx", std::ios::in | std::ios::out | std::ios::binary);
      f.seekp(0);
      f.put('X');
    }
    expect_kind([&] { data::read_cplx(dir / "b.cplx"); }, data::IoError::Kind::BadMagic);
    try {
      data::read_cplx(dir / "b.cplx");
    } catch (data::IoError const &e) {
      CHECK(std::string(e.what()).find("bad magic") != std::string::npos);
    }
  }
  SECTION("truncated payload")
  {
    data::write_cplx(dir / "t.cplx", pftest::random_image(4, 4, rng));
    fs::resize_file(dir / "t.cplx", fs::file_size(dir / "t.cplx") - 9);
    expect_kind([&] { data::read_cplx(dir / "t.cplx"); }, data::IoError::Kind::Truncated);
  }
  SECTION("flipped payload byte fails the checksum")
  {
    data::write_cplx(dir / "c.cplx", pftest::random_image(4, 4, rng));
    {
      std::fstream f(dir / "c.cplx", std::ios::in | std::ios::out | std::ios::binary);
      f.seekg(20);
      char ch = 0;
      f.get(ch);
      f.seekp(20);
      f.put(static_cast<char>(ch ^ 0x40));
    }
    expect_kind([&] { data::read_cplx(dir / "c.cplx"); }, data::IoError::Kind::Checksum);
  }
  SECTION("dimension overflow")
  {
    std::ofstream f(dir / "o.cplx", std::ios::binary);
    f.write("CPLX1\0", 6);
    std::uint32_t const hdr[] = {3, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu};
    f.write(reinterpret_cast<char const *>(hdr), sizeof hdr);
    f.close();
    expect_kind([&] { data::read_cplx(dir / "o.cplx"); }, data::IoError::Kind::DimensionOverflow);
  }
  SECTION("zero extent is rejected at write")
  {
    expect_kind([&] { data::write_cplx(dir / "z.cplx", mri::ComplexImage(0, 4)); }, data::IoError::Kind::ZeroExtent);
    CHECK_FALSE(fs::exists(dir / "z.cplx"));
  }
  SECTION("mask values outside {0, 1}")
  {
    mri::SamplingMask m(2, 2, 1);
    m.values[1] = 2;
    expect_kind([&] { data::write_mask(dir / "v.mask", m); }, data::IoError::Kind::BadValue);
  }
  SECTION("missing file")
  {
    expect_kind([&] { data::read_mask(dir / "missing.mask"); }, data::IoError::Kind::Open);
  }
}
