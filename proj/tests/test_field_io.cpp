#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "cnsaudit/field_io.hpp"

using namespace cnsaudit;

namespace {

SpaceTimeField<2> random_field() {
  GridShape<2> s;
  s.n_t = 2;
  s.n = {8, 8};
  s.t_start = 0.25;
  s.t_end = 0.75;
  s.lo = {-1.0, 0.0};
  s.hi = {1.0, 3.0};
  auto g = make_grid(Grid<2>::over_box(s));
  SpaceTimeField<2> f(g, 2);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  for (double& v : f.values()) v = nd(rng);
  return f;
}

ErrorCode code_of(const std::vector<unsigned char>& bytes) {
  try {
    decode_field<2>(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(FieldIo, RoundTripIsBitExact) {
  const auto f = random_field();
  const auto path = (std::filesystem::temp_directory_path() / "cnsaudit_roundtrip.cnsf").string();
  write_field(f, path);
  const auto g = read_field<2>(path);
  EXPECT_EQ(g.components(), 2u);
  EXPECT_EQ(g.grid().n_t(), 2u);
  EXPECT_EQ(g.grid().t_end(), 0.75);
  EXPECT_EQ(g.values(), f.values());
  EXPECT_EQ(encode_field(g), encode_field(f));
  std::filesystem::remove(path);
}

TEST(FieldIo, HeaderLayout) {
  const auto bytes = encode_field(random_field());
  EXPECT_EQ(bytes[0], 'C');
  EXPECT_EQ(bytes[3], 'F');
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 2);
  EXPECT_EQ(bytes[6], 2);
  EXPECT_EQ(bytes[7], 0);
  EXPECT_EQ(bytes[8], 2);  // n_t, little-endian
  EXPECT_EQ(bytes[9], 0);
  EXPECT_EQ(bytes.size(), 8u + 12u + 48u + 8u * 2 * 64 * 2);
}

TEST(FieldIo, Errors) {
  auto bytes = encode_field(random_field());
  auto trunc = bytes;
  trunc.resize(trunc.size() - 3);
  EXPECT_EQ(code_of(trunc), ErrorCode::ShapeMismatch);
  auto magic = bytes;
  magic[0] = magic[1] = magic[2] = magic[3] = 'X';
  EXPECT_EQ(code_of(magic), ErrorCode::BadMagic);
  auto version = bytes;
  version[4] = 2;
  EXPECT_EQ(code_of(version), ErrorCode::VersionMismatch);
  auto nan = bytes;
  const double q = std::numeric_limits<double>::quiet_NaN();
  std::memcpy(nan.data() + nan.size() - 8, &q, 8);
  EXPECT_EQ(code_of(nan), ErrorCode::NonFiniteValue);
  EXPECT_EQ(code_of({'C', 'N'}), ErrorCode::ShapeMismatch);
}
