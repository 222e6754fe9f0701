#include "priorforge/data/io.hpp"

#include <fmt/format.h>
#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace priorforge::data {

namespace {

constexpr std::array<char, 6> kCplxMagic{'C', 'P', 'L', 'X', '1', '\0'};
constexpr std::array<char, 6> kMaskMagic{'M', 'A', 'S', 'K', '1', '\0'};
// Upper bound on elements per file; larger headers are treated as corrupt.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

using Bytes = std::vector<unsigned char>;

void put_u32(Bytes &out, std::uint32_t v)
{
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
  }
}

std::uint32_t get_u32(unsigned char const *p)
{
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint32_t crc_of(unsigned char const *data, std::size_t n)
{
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large payloads in chunks.
  while (n > 0) {
    auto const chunk = static_cast<uInt>(std::min<std::size_t>(n, std::numeric_limits<uInt>::max()));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void write_file(std::filesystem::path const &path, Bytes const &bytes)
{
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) {
      throw IoError(IoError::Kind::Open, fmt::format("cannot open '{}' for writing", path.string()));
    }
    f.write(reinterpret_cast<char const *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) {
      throw IoError(IoError::Kind::Open, fmt::format("write to '{}' failed", path.string()));
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError(IoError::Kind::Open, fmt::format("cannot move '{}' into place: {}", path.string(), ec.message()));
  }
}

Bytes read_file(std::filesystem::path const &path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw IoError(IoError::Kind::Open, fmt::format("cannot open '{}'", path.string()));
  }
  return Bytes(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

void begin(Bytes &out, std::array<char, 6> const &magic, std::vector<std::uint32_t> const &extents)
{
  out.insert(out.end(), magic.begin(), magic.end());
  put_u32(out, static_cast<std::uint32_t>(extents.size()));
  for (auto e : extents) {
    put_u32(out, e);
  }
}

std::uint32_t checked_extent(mri::Index e, char const *what, std::filesystem::path const &path)
{
  if (e <= 0) {
    throw IoError(IoError::Kind::ZeroExtent,
                  fmt::format("refusing to write '{}': {} extent is {}", path.string(), what, e));
  }
  if (static_cast<std::uint64_t>(e) > std::numeric_limits<std::uint32_t>::max()) {
    throw IoError(IoError::Kind::DimensionOverflow,
                  fmt::format("refusing to write '{}': {} extent {} exceeds u32", path.string(), what, e));
  }
  return static_cast<std::uint32_t>(e);
}

struct Header
{
  std::vector<std::uint32_t> extents;
  std::uint64_t elements = 1;
  std::size_t payload_offset = 0;
};

Header parse_header(Bytes const &bytes,
                    std::array<char, 6> const &magic,
                    std::filesystem::path const &path,
                    std::uint32_t min_rank,
                    std::uint32_t max_rank)
{
  if (bytes.size() < magic.size() || std::memcmp(bytes.data(), magic.data(), magic.size()) != 0) {
    throw IoError(IoError::Kind::BadMagic, fmt::format("'{}': bad magic", path.string()));
  }
  std::size_t off = magic.size();
  if (bytes.size() < off + 4) {
    throw IoError(IoError::Kind::Truncated, fmt::format("'{}': truncated header", path.string()));
  }
  std::uint32_t const rank = get_u32(bytes.data() + off);
  off += 4;
  if (rank < min_rank || rank > max_rank) {
    throw IoError(IoError::Kind::BadRank,
                  fmt::format("'{}': rank {} outside [{}, {}]", path.string(), rank, min_rank, max_rank));
  }
  if (bytes.size() < off + 4 * std::size_t(rank)) {
    throw IoError(IoError::Kind::Truncated, fmt::format("'{}': truncated header", path.string()));
  }
  Header h;
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::uint32_t const e = get_u32(bytes.data() + off);
    off += 4;
    if (e == 0) {
      throw IoError(IoError::Kind::ZeroExtent, fmt::format("'{}': extent {} is zero", path.string(), i));
    }
    h.extents.push_back(e);
    h.elements *= e;
    if (h.elements > kMaxElements) {
      throw IoError(IoError::Kind::DimensionOverflow,
                    fmt::format("'{}': extents exceed {} elements", path.string(), kMaxElements));
    }
  }
  h.payload_offset = off;
  return h;
}

void check_payload(Bytes const &bytes, Header const &h, std::size_t payload_bytes, std::filesystem::path const &path)
{
  if (bytes.size() < h.payload_offset + payload_bytes + 4) {
    throw IoError(IoError::Kind::Truncated,
                  fmt::format("'{}': truncated payload ({} bytes, expected {})", path.string(), bytes.size(),
                              h.payload_offset + payload_bytes + 4));
  }
  std::uint32_t const stored = get_u32(bytes.data() + h.payload_offset + payload_bytes);
  std::uint32_t const actual = crc_of(bytes.data() + h.payload_offset, payload_bytes);
  if (stored != actual) {
    throw IoError(IoError::Kind::Checksum,
                  fmt::format("'{}': checksum mismatch (stored {:08x}, computed {:08x})", path.string(), stored, actual));
  }
}

void put_f32(Bytes &out, double v)
{
  auto const bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
  put_u32(out, bits);
}

void write_planes(std::filesystem::path const &path, std::vector<mri::ComplexImage> const &planes, bool stack)
{
  if (planes.empty()) {
    throw IoError(IoError::Kind::ZeroExtent, fmt::format("refusing to write '{}': no planes", path.string()));
  }
  auto const &first = planes.front();
  std::vector<std::uint32_t> extents;
  if (stack) {
    extents.push_back(checked_extent(static_cast<mri::Index>(planes.size()), "plane", path));
  }
  extents.push_back(checked_extent(first.rows, "row", path));
  extents.push_back(checked_extent(first.cols, "column", path));
  Bytes out;
  begin(out, kCplxMagic, extents);
  std::size_t const start = out.size();
  for (auto const &p : planes) {
    if (!p.same_extent(first)) {
      throw IoError(IoError::Kind::BadValue, fmt::format("refusing to write '{}': planes differ in extent", path.string()));
    }
    for (mri::Index i = 0; i < p.size(); ++i) {
      put_f32(out, p.re[i]);
      put_f32(out, p.im[i]);
    }
  }
  put_u32(out, crc_of(out.data() + start, out.size() - start));
  write_file(path, out);
}

} // namespace

void write_cplx(std::filesystem::path const &path, mri::ComplexImage const &image)
{
  write_planes(path, {image}, false);
}

void write_cplx(std::filesystem::path const &path, std::vector<mri::ComplexImage> const &planes)
{
  write_planes(path, planes, true);
}

CplxArray read_cplx(std::filesystem::path const &path)
{
  Bytes const bytes = read_file(path);
  Header const h = parse_header(bytes, kCplxMagic, path, 2, 3);
  check_payload(bytes, h, h.elements * 8, path);
  CplxArray out;
  out.rank = static_cast<std::uint32_t>(h.extents.size());
  std::uint32_t const n_planes = out.rank == 3 ? h.extents[0] : 1;
  std::uint32_t const rows = h.extents[out.rank - 2], cols = h.extents[out.rank - 1];
  unsigned char const *p = bytes.data() + h.payload_offset;
  for (std::uint32_t k = 0; k < n_planes; ++k) {
    mri::ComplexImage img(rows, cols);
    for (mri::Index i = 0; i < img.size(); ++i) {
      img.re[i] = std::bit_cast<float>(get_u32(p));
      img.im[i] = std::bit_cast<float>(get_u32(p + 4));
      p += 8;
    }
    out.planes.push_back(std::move(img));
  }
  return out;
}

void write_mask(std::filesystem::path const &path, mri::SamplingMask const &mask)
{
  Bytes out;
  begin(out, kMaskMagic, {checked_extent(mask.rows, "row", path), checked_extent(mask.cols, "column", path)});
  std::size_t const start = out.size();
  for (auto v : mask.values) {
    if (v > 1) {
      throw IoError(IoError::Kind::BadValue, fmt::format("refusing to write '{}': mask value {}", path.string(), v));
    }
    out.push_back(v);
  }
  put_u32(out, crc_of(out.data() + start, out.size() - start));
  write_file(path, out);
}

mri::SamplingMask read_mask(std::filesystem::path const &path)
{
  Bytes const bytes = read_file(path);
  Header const h = parse_header(bytes, kMaskMagic, path, 2, 2);
  check_payload(bytes, h, h.elements, path);
  mri::SamplingMask m(h.extents[0], h.extents[1]);
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    auto const v = bytes[h.payload_offset + i];
    if (v > 1) {
      throw IoError(IoError::Kind::BadValue, fmt::format("'{}': mask value {} at {}", path.string(), v, i));
    }
    m.values[i] = v;
  }
  return m;
}

} // namespace priorforge::data
