#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "cnsaudit/fields.hpp"

namespace cnsaudit {

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xFFu));
}

inline void put_f64(std::vector<unsigned char>& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(p[b]) << (8 * b);
  return v;
}

inline double get_f64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(v);
}

inline std::vector<unsigned char> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace detail

inline constexpr std::uint8_t kFieldFormatVersion = 1;

/// Serializes a field to the CNSF byte layout (little-endian throughout).
template <std::size_t Dim>
std::vector<unsigned char> encode_field(const SpaceTimeField<Dim>& f) {
  f.check_finite();
  const Grid<Dim>& g = f.grid();
  std::vector<unsigned char> out;
  out.reserve(8 + 4 * (Dim + 1) + 8 * (2 + 2 * Dim) + 8 * f.values().size());
  for (char ch : {'C', 'N', 'S', 'F'}) out.push_back(static_cast<unsigned char>(ch));
  out.push_back(kFieldFormatVersion);
  out.push_back(static_cast<unsigned char>(Dim));
  out.push_back(static_cast<unsigned char>(f.components()));
  out.push_back(0);
  detail::put_u32(out, static_cast<std::uint32_t>(g.n_t()));
  for (std::size_t k = 0; k < Dim; ++k) detail::put_u32(out, static_cast<std::uint32_t>(g.count(k)));
  detail::put_f64(out, g.shape().t_start);
  detail::put_f64(out, g.shape().t_end);
  for (std::size_t k = 0; k < Dim; ++k) detail::put_f64(out, g.shape().lo[k]);
  for (std::size_t k = 0; k < Dim; ++k) detail::put_f64(out, g.shape().hi[k]);
  for (double v : f.values()) detail::put_f64(out, v);
  return out;
}

/// Parses CNSF bytes. The returned grid spans the stored box; pass `domain`
/// to re-attach the geometry the samples were produced on.
template <std::size_t Dim>
SpaceTimeField<Dim> decode_field(const std::vector<unsigned char>& bytes,
                                 const std::optional<Domain<Dim>>& domain = std::nullopt) {
  if (bytes.size() < 8) throw Error(ErrorCode::ShapeMismatch, "file shorter than the header");
  if (std::memcmp(bytes.data(), "CNSF", 4) != 0) throw Error(ErrorCode::BadMagic, "missing CNSF magic");
  if (bytes[4] != kFieldFormatVersion)
    throw Error(ErrorCode::VersionMismatch, "unsupported version " + std::to_string(bytes[4]));
  if (bytes[5] != Dim) throw Error(ErrorCode::ShapeMismatch, "spatial dimension differs from the reader's");
  const std::size_t comps = bytes[6];
  if (comps == 0) throw Error(ErrorCode::ShapeMismatch, "zero components");

  const std::size_t header = 8 + 4 * (Dim + 1) + 8 * (2 + 2 * Dim);
  if (bytes.size() < header) throw Error(ErrorCode::ShapeMismatch, "truncated header");
  const unsigned char* p = bytes.data() + 8;
  GridShape<Dim> shape;
  shape.n_t = detail::get_u32(p);
  p += 4;
  for (std::size_t k = 0; k < Dim; ++k, p += 4) shape.n[k] = detail::get_u32(p);
  shape.t_start = detail::get_f64(p);
  shape.t_end = detail::get_f64(p + 8);
  p += 16;
  for (std::size_t k = 0; k < Dim; ++k, p += 8) shape.lo[k] = detail::get_f64(p);
  for (std::size_t k = 0; k < Dim; ++k, p += 8) shape.hi[k] = detail::get_f64(p);

  std::size_t count = shape.n_t * comps;
  for (std::size_t k = 0; k < Dim; ++k) count *= shape.n[k];
  if (bytes.size() != header + 8 * count) throw Error(ErrorCode::ShapeMismatch, "payload size disagrees with header");

  auto grid = std::make_shared<const Grid<Dim>>(domain ? Grid<Dim>(shape, *domain) : Grid<Dim>::over_box(shape));
  SpaceTimeField<Dim> f(grid, comps);
  for (std::size_t i = 0; i < count; ++i, p += 8) {
    const double v = detail::get_f64(p);
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteValue, "non-finite sample at index " + std::to_string(i));
    f.values()[i] = v;
  }
  return f;
}

template <std::size_t Dim>
void write_field(const SpaceTimeField<Dim>& f, const std::string& path) {
  const auto bytes = encode_field(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

template <std::size_t Dim>
SpaceTimeField<Dim> read_field(const std::string& path, const std::optional<Domain<Dim>>& domain = std::nullopt) {
  return decode_field<Dim>(detail::slurp(path), domain);
}

}  // namespace cnsaudit
