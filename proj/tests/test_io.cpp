#include "sparsecert/io.hpp"

#include "sparsecert/ensembles.hpp"
#include "sparsecert/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace sparsecert;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "sparsecert_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

Matrix awkward_matrix() {
  // Values whose shortest decimal form needs all 17 digits, plus signed zero
  // and extreme exponents.
  Rng rng(9);
  Matrix a(4, 5);
  for (Index k = 0; k < a.size(); ++k) a.data()[k] = rng.normal() * std::pow(10.0, rng.uniform() * 40 - 20);
  a(0, 0) = -0.0;
  a(1, 1) = 0.1;
  a(2, 2) = std::numeric_limits<double>::denorm_min();
  a(3, 3) = std::numeric_limits<double>::max();
  a(3, 4) = 1.0 / 3.0;
  return a;
}

bool bit_identical(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Matrix parse_text(const std::string& s) {
  std::istringstream in(s);
  return parse_matrix_text(in);
}

Matrix parse_csv(const std::string& s) {
  std::istringstream in(s);
  return parse_matrix_csv(in);
}

}  // namespace

TEST(MatrixFile, TextRoundTripIsBitIdentical) {
  const Matrix a = awkward_matrix();
  const auto path = scratch("a.txt").string();
  write_matrix(path, a);
  EXPECT_TRUE(bit_identical(read_matrix(path), a));
  const Matrix g = generate({EnsembleKind::Gaussian, 20, 60, 3, true}).data();
  write_matrix(path, g);
  EXPECT_TRUE(bit_identical(read_matrix(path), g));
}

TEST(MatrixFile, CsvRoundTripIsBitIdentical) {
  const Matrix a = awkward_matrix();
  const auto path = scratch("a.csv").string();
  write_matrix(path, a);
  EXPECT_TRUE(bit_identical(read_matrix(path), a));
}

TEST(MatrixFile, TextFormat) {
  const Matrix a = parse_text("# comment\n\n2 3\n1 2 3\n  # another\n4\t5   6e0\n\n");
  Matrix expect(2, 3);
  expect << 1, 2, 3, 4, 5, 6;
  EXPECT_EQ(a, expect);
  EXPECT_EQ(parse_text("1 2\n1 1\n"), Matrix::Ones(1, 2));
}

TEST(MatrixFile, TextErrors) {
  EXPECT_THROW(parse_text(""), ParseError);
  EXPECT_THROW(parse_text("2\n1 2\n"), ParseError);
  EXPECT_THROW(parse_text("2 2\n1 2\n"), ParseError);         // missing row
  EXPECT_THROW(parse_text("1 2\n1 2\n3 4\n"), ParseError);    // extra row
  EXPECT_THROW(parse_text("1 2\n1 2 3\n"), ParseError);       // ragged
  EXPECT_THROW(parse_text("1 2\n1 x\n"), ParseError);
  EXPECT_THROW(parse_text("1 2\n1 inf\n"), ParseError);
  EXPECT_THROW(parse_text("0 2\n"), ParseError);
  EXPECT_THROW(read_matrix(scratch("does_not_exist.txt").string()), ParseError);
  EXPECT_THROW(parse_text("1 2\n1\n"), DomainError);  // ParseError is an input error
}

TEST(MatrixFile, CsvFormat) {
  Matrix expect(2, 2);
  expect << 1, -2, 3.5, 4;
  EXPECT_EQ(parse_csv("1,-2\r\n3.5,4\r\n"), expect);
  EXPECT_EQ(parse_csv("\"a\",\"b, with comma\"\n\"1\", -2\n3.5,\"4\"\n"), expect);
  EXPECT_EQ(parse_csv("1,-2\n3.5,4"), expect);  // no final line break
  EXPECT_EQ(parse_csv("x,\"say \"\"hi\"\"\"\n1,-2\n3.5,4\n"), expect);
}

TEST(MatrixFile, CsvErrors) {
  EXPECT_THROW(parse_csv(""), ParseError);
  EXPECT_THROW(parse_csv("1,2\n3\n"), ParseError);
  EXPECT_THROW(parse_csv("1,\"2\n"), ParseError);
  EXPECT_THROW(parse_csv("1,2\n3,y\n"), ParseError);
}

TEST(VectorFile, RoundTripAndFormat) {
  Vector v(4);
  v << 0.1, -1e-300, 1.0 / 7.0, 0.0;
  const auto path = scratch("v.txt").string();
  write_vector(path, v);
  const Vector w = read_vector(path);
  ASSERT_EQ(w.size(), 4);
  EXPECT_EQ(0, std::memcmp(v.data(), w.data(), sizeof(double) * 4));
  std::istringstream in("# y\n1\n\n 2.5 \n");
  EXPECT_EQ(parse_vector(in), Eigen::Vector2d(1, 2.5));
  std::istringstream bad("1 2\n");
  EXPECT_THROW(parse_vector(bad), ParseError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(parse_vector(empty), ParseError);
}

TEST(Json, SeventeenDigitsAndNonFinite) {
  Json j;
  j["third"] = 1.0 / 3.0;
  j["inf"] = std::numeric_limits<double>::infinity();
  j["ninf"] = -std::numeric_limits<double>::infinity();
  j["nan"] = std::numeric_limits<double>::quiet_NaN();
  j["int"] = 3;
  j["list"] = Json::array({0.1, true, "x"});
  j["empty"] = Json::array();
  const std::string s = dump_json(j, -1);
  EXPECT_EQ(s,
            "{\"third\":0.33333333333333331,\"inf\":\"inf\",\"ninf\":\"-inf\",\"nan\":\"nan\","
            "\"int\":3,\"list\":[0.10000000000000001,true,\"x\"],\"empty\":[]}");
  // The output parses back, and every finite value round-trips exactly.
  const Json back = Json::parse(s);
  EXPECT_EQ(back["third"].get<double>(), 1.0 / 3.0);
  EXPECT_EQ(back["list"][0].get<double>(), 0.1);
  EXPECT_EQ(back["inf"], "inf");
  EXPECT_EQ(Json::parse(dump_json(j)), back);  // pretty form carries the same data
}

TEST(Json, ResultFieldNames) {
  VerificationResult v;
  v.tau = std::numeric_limits<double>::infinity();
  const Json jv = to_json(v);
  for (const char* k : {"method", "k_lower", "tau", "per_index_values", "kernel_dim", "runtime"}) {
    EXPECT_TRUE(jv.contains(k)) << k;
  }
  EXPECT_EQ(Json::parse(dump_json(jv))["tau"], "inf");

  CmsvEstimate e;
  e.converged_flags = {true, false};
  const Json je = to_json(e);
  for (const char* k : {"s", "rho_upper", "rho_lower", "objective_upper", "objective_lower", "restarts",
                        "per_restart_values", "converged_flags"}) {
    EXPECT_TRUE(je.contains(k)) << k;
  }
  EXPECT_EQ(je["converged_flags"][1], false);

  BoundReport b;
  b.ric_bound_bp = 0.5;
  const Json jb = to_json(b);
  EXPECT_EQ(jb["ric_bound_bp"].get<double>(), 0.5);
  EXPECT_TRUE(jb["ric_bound_ds"].is_null());
  EXPECT_EQ(jb["rho_source"], "SDR");

  RecoveryResult r;
  r.x_hat = Vector::Ones(2);
  EXPECT_EQ(to_json(r)["x_hat"].size(), 2u);
}
