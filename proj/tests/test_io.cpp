#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "wcp/error.hpp"
#include "wcp/io.hpp"
#include "wcp/quantile_table.hpp"

using namespace wcp;

namespace {

ErrorKind read_error(const std::string& text) {
  std::istringstream in(text);
  try {
    (void)read_series_csv(in);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error for input: " << text);
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("trim and split") {
  CHECK(trim("  a b \t\r") == "a b");
  CHECK(trim("") == "");
  CHECK(split("a,,b", ',') == std::vector<std::string>{"a", "", "b"});
}

TEST_CASE("reading a single-column series") {
  std::istringstream plain("1\n2.5\n-3e-1\n");
  CHECK(read_series_csv(plain) == std::vector<double>{1.0, 2.5, -0.3});
  std::istringstream with_header("# generated\nvalue\n\n 4 \n5\r\n");
  CHECK(read_series_csv(with_header) == std::vector<double>{4.0, 5.0});
}

TEST_CASE("series reading errors") {
  CHECK(read_error("") == ErrorKind::EmptyInput);
  CHECK(read_error("# only a comment\n\n") == ErrorKind::EmptyInput);
  CHECK(read_error("value\n") == ErrorKind::EmptyInput);
  CHECK(read_error("1\nabc\n") == ErrorKind::NonNumericInput);
  CHECK(read_error("1\n2,3\n") == ErrorKind::NonNumericInput);
  CHECK(read_error("1\nnan\n") == ErrorKind::NonNumericInput);
  CHECK(read_error("1\ninf\n") == ErrorKind::NonNumericInput);
  try {
    std::istringstream in("1\n2\nfoo\n");
    (void)read_series_csv(in);
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  try {
    (void)read_series_csv(std::filesystem::path("/nonexistent/series.csv"));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnreadableFile);
  }
}

TEST_CASE("number lists") {
  CHECK(parse_number_list("0.1, 0.05 0.01") == std::vector<double>{0.1, 0.05, 0.01});
  CHECK(parse_number_list("[1;2;3]") == std::vector<double>{1, 2, 3});
  const auto range = parse_number_list("0.025:0.025:0.975");
  CHECK(range.size() == 39);
  CHECK(range.back() == doctest::Approx(0.975));
  CHECK(parse_number_list("1:1:3") == std::vector<double>{1, 2, 3});
  CHECK_THROWS_AS(parse_number_list(""), Error);
  CHECK_THROWS_AS(parse_number_list("1,x"), Error);
  CHECK_THROWS_AS(parse_number_list("1:0:3"), Error);
}

TEST_CASE("key-value configs") {
  std::istringstream in("# experiment\nn = 1000\ngamma = 0, 0.1, 0.2\nkernel=cusum\nn = 2000\n");
  const auto cfg = KeyValueConfig::parse(in);
  CHECK(cfg.number("n") == 2000);
  CHECK(cfg.numbers("gamma") == std::vector<double>{0, 0.1, 0.2});
  CHECK(cfg.text("kernel") == "cusum");
  CHECK_FALSE(cfg.contains("alpha"));
  CHECK_THROWS_AS(cfg.text("alpha"), Error);
  CHECK_THROWS_AS(cfg.number("kernel"), Error);
  std::istringstream bad("no equals sign\n");
  CHECK_THROWS_AS(KeyValueConfig::parse(bad), Error);
  CHECK_THROWS_AS(KeyValueConfig::load("/nonexistent/config.txt"), Error);
}

TEST_CASE("quantile table CSV round trip") {
  QuantileTable t(Sidedness::TwoSidedMaxAbs);
  t.set(0.0, 0.05, {1.358, 0.004, 100000, 10000});
  t.set(0.3, 0.01, {2.61, 0.012, 100000, 10000});
  std::ostringstream out;
  t.write_csv(out, {"seed: 5"});
  const std::string text = out.str();
  CHECK(text.find("# sided: two-sided") != std::string::npos);
  CHECK(text.find("# seed: 5") != std::string::npos);
  CHECK(text.find("gamma,alpha,quantile,stderr,reps,grid_m\n") != std::string::npos);
  CHECK(text.find("0.3,0.01,2.610000,0.012000,100000,10000") != std::string::npos);
  std::istringstream in(text);
  const QuantileTable back = QuantileTable::read_csv(in);
  CHECK(back.sided() == Sidedness::TwoSidedMaxAbs);
  CHECK(back.size() == 2);
  CHECK(back.at(0.3, 0.01).quantile == doctest::Approx(2.61));
  CHECK(back.at(0.0, 0.05).reps == 100000);
  CHECK(back.gammas() == std::vector<double>{0.0, 0.3});
}
