#include <fodkq/io.hpp>

#include <gtest/gtest.h>

#include <complex>
#include <cstring>
#include <random>
#include <sstream>

using namespace fodkq;

namespace {

std::string bytes_of(const ArrayFile& a) {
  std::ostringstream os(std::ios::binary);
  write_array(os, a);
  return os.str();
}

ArrayFile parse(const std::string& s) {
  std::istringstream is(s, std::ios::binary);
  return read_array(is);
}

void expect_round_trip(const ArrayFile& a) {
  const auto bytes = bytes_of(a);
  const auto b = parse(bytes);
  EXPECT_EQ(b.shape, a.shape);
  EXPECT_EQ(b.dtype, a.dtype);
  EXPECT_EQ(b.semantic, a.semantic);
  EXPECT_EQ(b.payload, a.payload);
  EXPECT_EQ(bytes_of(b), bytes);
}

}  // namespace

TEST(ArrayFile, RoundTripIsByteIdentical) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  Eigen::MatrixXd r(3, 5);
  for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = n(rng);
  Eigen::MatrixXcd c(4, 2);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = {n(rng), n(rng)};
  expect_round_trip(make_array(r, "real"));
  expect_round_trip(make_array(c, "complex"));
  expect_round_trip(make_u8_array({0, 1, 1, 0, 1, 0}, {2, 3}, "mask"));
  expect_round_trip(make_array(Eigen::VectorXd(0), "empty"));

  const auto back = to_real_matrix(parse(bytes_of(make_array(r, "real"))));
  EXPECT_EQ(back, r);
  const auto cback = to_complex_matrix(parse(bytes_of(make_array(c, "complex"))));
  EXPECT_EQ(cback, c);
}

TEST(ArrayFile, LayoutIsRowMajor) {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const auto a = make_array(m, "m");
  ASSERT_EQ(a.shape, (std::vector<std::size_t>{2, 3}));
  ASSERT_EQ(a.payload.size(), 6 * sizeof(double));
  double second;
  std::memcpy(&second, a.payload.data() + sizeof(double), sizeof(double));
  EXPECT_EQ(second, 2.0);
  EXPECT_EQ(to_real_flat(a), (Eigen::VectorXd(6) << 1, 2, 3, 4, 5, 6).finished());
}

TEST(ArrayFile, HeaderPrefix) {
  const auto bytes = bytes_of(make_array(Eigen::VectorXd(Eigen::VectorXd::Ones(2)), "x"));
  ASSERT_GE(bytes.size(), 16u);
  EXPECT_EQ(bytes.substr(0, 7), "FODKQ1 ");
  EXPECT_EQ(bytes[15], '\n');
  const auto len = std::stoul(bytes.substr(7, 8));
  EXPECT_EQ(bytes.size(), 16 + len + 2 * sizeof(double));
}

TEST(ArrayFile, MalformedInputsThrow) {
  const auto good = bytes_of(make_array(Eigen::VectorXd(Eigen::VectorXd::Ones(3)), "x"));
  auto bad_prefix = good;
  bad_prefix[0] = 'X';
  EXPECT_THROW((void)parse(bad_prefix), DataError);
  EXPECT_THROW((void)parse(good + "extra"), DataError);
  EXPECT_THROW((void)parse(good.substr(0, good.size() - 1)), DataError);
  EXPECT_THROW((void)parse(""), DataError);
  auto bad_header = good;
  bad_header[16] = '?';
  EXPECT_THROW((void)parse(bad_header), DataError);
}

TEST(ArrayFile, ConversionsCheckDtype) {
  const auto a = make_u8_array({1, 0}, {2}, "m");
  EXPECT_THROW((void)to_complex_matrix(a), DataError);
  EXPECT_EQ(dtype_size(DType::C128), 16u);
  EXPECT_EQ(parse_dtype(to_string(DType::U8)), DType::U8);
  EXPECT_THROW((void)parse_dtype("f32"), DataError);
}

TEST(ArrayFile, LoadNamesTheFile) {
  try {
    (void)load_array("/nonexistent/dir/file.arr");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/file.arr"), std::string::npos);
  }
}

TEST(ArrayText, RoundTrip) {
  Eigen::MatrixXd r(2, 3);
  r << 1.5, -2, 3e-12, 0, 1.0 / 3.0, 7;
  std::stringstream ss;
  write_array_text(ss, make_array(r, "r"));
  const auto back = read_array_text(ss, DType::F64, "r");
  EXPECT_EQ(back.shape, (std::vector<std::size_t>{2, 3}));
  EXPECT_EQ(to_real_matrix(back), r);

  Eigen::MatrixXcd c(1, 2);
  c << std::complex<double>(1, -1), std::complex<double>(0.25, 2);
  std::stringstream cs;
  write_array_text(cs, make_array(c, "c"));
  EXPECT_EQ(to_complex_matrix(read_array_text(cs, DType::C128, "c")), c);
}

TEST(ArrayText, MalformedInputsThrow) {
  std::istringstream no_shape("1 2 3\n");
  EXPECT_THROW((void)read_array_text(no_shape, DType::F64, "x"), DataError);
  std::istringstream short_body("# shape 2 3\n1 2 3\n4 5\n");
  EXPECT_THROW((void)read_array_text(short_body, DType::F64, "x"), DataError);
  std::istringstream bad_u8("# shape 2\n1 300\n");
  EXPECT_THROW((void)read_array_text(bad_u8, DType::U8, "x"), DataError);
}
