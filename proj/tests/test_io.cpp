#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "minlor/io.hpp"
#include "support.hpp"

using namespace minlor;

TEST(FormatReal, SeventeenDigitsRoundTrip) {
  minlor::testing::Gen g(91);
  for (int k = 0; k < minlor::testing::kRandomCases; ++k) {
    const double x = g.uniform(-1, 1) * std::pow(10.0, g.integer(-30, 30));
    const std::string s = io::format_real(x);
    double back = 0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    EXPECT_EQ(back, x) << s;
    EXPECT_EQ(s.find(','), std::string::npos);
  }
}

TEST(FormatReal, Examples) {
  EXPECT_EQ(io::format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(io::format_real(1.0), "1");
  EXPECT_EQ(io::format_real(-2.5), "-2.5");
  EXPECT_EQ(io::format_real(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(io::format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(io::format_real(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(CsvWriter, Rows) {
  io::CsvWriter w({"a", "b"});
  w.add_row({1.0, 0.5});
  w.add_row_text({"x", "y"});
  EXPECT_EQ(w.str(), "a,b\n1,0.5\nx,y\n");
  try {
    w.add_row({1.0});
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(WriteFile, RoundTripAndFailure) {
  const auto dir = std::filesystem::temp_directory_path() / "minlor_io_test";
  std::filesystem::create_directories(dir);
  io::write_file(dir / "x.txt", "hello\n");
  std::ifstream f(dir / "x.txt");
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), "hello\n");
  try {
    io::write_file(dir / "missing" / "x.txt", "z");
    ADD_FAILURE() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
  std::filesystem::remove_all(dir);
}

TEST(Json, NonFiniteBecomesNull) {
  EXPECT_TRUE(io::real(std::nan("")).is_null());
  EXPECT_EQ(io::real(1.5).get<double>(), 1.5);
  EXPECT_EQ(io::to_json(NeutralVector{1, 2, 3, 4}).dump(), "[1.0,2.0,3.0,4.0]");
}

TEST(LineColumn, Offsets) {
  const std::string text = "ab\ncd\n\nef";
  EXPECT_EQ(io::line_column(text, 0), (std::pair<std::size_t, std::size_t>{1, 1}));
  EXPECT_EQ(io::line_column(text, 1), (std::pair<std::size_t, std::size_t>{1, 2}));
  EXPECT_EQ(io::line_column(text, 3), (std::pair<std::size_t, std::size_t>{2, 1}));
  EXPECT_EQ(io::line_column(text, 7), (std::pair<std::size_t, std::size_t>{4, 1}));
  EXPECT_EQ(io::line_column(text, 100), (std::pair<std::size_t, std::size_t>{4, 3}));
}
