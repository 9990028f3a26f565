#include "projlens/error.hpp"
#include "projlens/npy.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace projlens;
using namespace projlens::testing;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::Io;
}

}  // namespace

TEST(Npy, LoadsNumpyF32) {
  const DenseMatrix m = load_matrix(data_path("f32_2x3.npy"));
  ASSERT_EQ(m.rows(), 2u);
  ASSERT_EQ(m.cols(), 3u);
  EXPECT_EQ(m.dtype, Dtype::f32);
  for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(m(k / 3, k % 3), static_cast<double>(k + 1));
}

TEST(Npy, FortranOrderBecomesRowMajor) {
  const DenseMatrix m = load_matrix(data_path("f64_3x2_fortran.npy"));
  ASSERT_EQ(m.rows(), 3u);
  ASSERT_EQ(m.cols(), 2u);
  const double expect[3][2] = {{1.5, -2.0}, {3.25, 4.0}, {0.0, 1e-3}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(m(i, j), expect[i][j]);
}

TEST(Npy, ElementOrderMatchesNumpyText) {
  const DenseMatrix m = load_matrix(data_path("f64_4x5_random.npy"));
  std::ifstream txt(data_path("f64_4x5_random.txt"));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      double x = 0;
      txt >> x;
      EXPECT_EQ(m(i, j), x) << i << "," << j;
    }
}

TEST(Npy, CanonicalEncodingMatchesNumpyBytes) {
  for (const char* name : {"f32_2x3.npy", "f32_1x1.npy", "f64_4x5_random.npy"}) {
    const std::string bytes = read_file(data_path(name));
    EXPECT_EQ(encode_npy(decode_npy(bytes)), bytes) << name;
  }
}

TEST(Npy, OneByOneHeaderIs128Bytes) {
  RowMatrix v(1, 1);
  v(0, 0) = 0.5;
  const std::string bytes = encode_npy(DenseMatrix(v, Dtype::f32));
  EXPECT_EQ(bytes.size(), 132u);
  const auto header_len = static_cast<unsigned char>(bytes[8]) | (static_cast<unsigned char>(bytes[9]) << 8);
  EXPECT_EQ(10 + header_len, 128);
  EXPECT_EQ(bytes[127], '\n');
}

TEST(Npy, Errors) {
  std::string bytes = read_file(data_path("f32_2x3.npy"));
  std::string bad = bytes;
  bad.replace(0, 6, "XNUMPY");
  EXPECT_EQ(code_of([&] { decode_npy(bad); }), Errc::BadMagic);
  EXPECT_EQ(code_of([&] { load_matrix(data_path("i32_2x2.npy")); }), Errc::UnsupportedDtype);
  EXPECT_EQ(code_of([&] { load_matrix(data_path("f64_1d.npy")); }), Errc::BadShape);
  EXPECT_EQ(code_of([&] { load_matrix(data_path("f64_nan.npy")); }), Errc::NonFinite);
  EXPECT_EQ(code_of([&] { decode_npy(bytes.substr(0, bytes.size() - 1)); }), Errc::LengthMismatch);
  EXPECT_EQ(code_of([&] { load_matrix("/nonexistent/x.npy"); }), Errc::Io);
  EXPECT_EQ(code_of([&] { encode_npy(DenseMatrix(RowMatrix(0, 4))); }), Errc::EmptyMatrix);
}

TEST(Npy, RoundtripF64) {
  Rng rng(11);
  const DenseMatrix m(random_matrix(rng, 64, 128), Dtype::f64);
  EXPECT_EQ(decode_npy(encode_npy(m)), m);
}

TEST(NpyProperty, SaveLoadSaveIsByteIdentical) {
  Rng rng(12);
  TempDir dir("npy");
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = 1 + rng.below(20), cols = 1 + rng.below(20);
    const Dtype dtype = rng.below(2) ? Dtype::f32 : Dtype::f64;
    const DenseMatrix m(random_matrix(rng, rows, cols) * 10.0, dtype);
    const auto path = dir / ("m" + std::to_string(trial) + ".npy");
    save_matrix(m, path);
    const std::string first = read_file(path);
    const DenseMatrix loaded = load_matrix(path);
    ASSERT_EQ(loaded.rows(), rows);
    save_matrix(loaded, path);
    ASSERT_EQ(read_file(path), first) << "trial " << trial;
    if (dtype == Dtype::f64) ASSERT_EQ(loaded, m);
  }
}
