#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "output.hpp"

using namespace bkl::cli;

TEST(FormatDouble, SeventeenSignificantDigitsRoundTrip) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    for (int k = 0; k < 10000; ++k) {
        const double v = std::ldexp(d(rng), static_cast<int>(d(rng)));
        const std::string s = format_double(v);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        ASSERT_EQ(back, v) << s;
        ASSERT_EQ(s.find(','), std::string::npos);
    }
}

TEST(FormatDouble, KnownValues) {
    EXPECT_EQ(format_double(0.0), "0");
    EXPECT_EQ(format_double(3.0), "3");
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(-2.8722839576389241), "-2.8722839576389241");
    EXPECT_EQ(format_double(1e-300), "1e-300");
    EXPECT_EQ(format_double(1.0 / 3.0), "0.33333333333333331");
}

TEST(CsvWriter, HeaderRowsAndSchemaLine) {
    CsvWriter w("events", {"n", "t_n", "eps_n"});
    w.row({1.0, 0.5, 2.5e-7});
    EXPECT_EQ(w.rows(), 1u);
    EXPECT_EQ(w.text(), "# bkl events schema_version=1\nn,t_n,eps_n\n1,0.5,2.4999999999999999e-07\n");
    EXPECT_THROW(w.row({1.0}), std::logic_error);
}

TEST(WriteAtomic, ReplacesContentAndLeavesNoTemporary) {
    const auto dir = std::filesystem::temp_directory_path() / "bkl_write_atomic";
    std::filesystem::create_directories(dir);
    const auto path = dir / "file.txt";
    write_atomic(path, "first\n");
    write_atomic(path, "second\n");
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    EXPECT_EQ(ss.str(), "second\n");
    EXPECT_FALSE(std::filesystem::exists(dir / "file.txt.tmp"));
    EXPECT_THROW(write_atomic(dir / "missing" / "x.txt", "x"), std::runtime_error);
    std::filesystem::remove_all(dir);
}
