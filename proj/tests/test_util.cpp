#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "chargeopt/errors.hpp"
#include "chargeopt/util.hpp"

using namespace chargeopt;
using doctest::Approx;

TEST_CASE("compensated accumulation survives catastrophic cancellation") {
    // Naive summation returns 0 for this pattern.
    KahanSum acc;
    acc.add(1.0);
    acc.add(1e100);
    acc.add(1.0);
    acc.add(-1e100);
    CHECK(acc.value() == 2.0);

    std::vector<double> v{1.0, 1e100, 1.0, -1e100};
    CHECK(compensated_sum(v) == 2.0);

    // A long run of an inexactly representable step stays exact to the
    // correctly rounded total.
    KahanSum tenth;
    for (int i = 0; i < 1'000'000; ++i) tenth.add(0.1);
    CHECK(tenth.value() == Approx(100000.0).epsilon(1e-15));
}

TEST_CASE("mean, stddev and standard error") {
    std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    CHECK(mean(v) == 5.0);
    CHECK(sample_stddev(v) == Approx(std::sqrt(32.0 / 7.0)).epsilon(1e-15));

    const MeanStdErr ms = mean_and_se(v);
    CHECK(ms.mean == 5.0);
    CHECK(ms.std_err == Approx(std::sqrt(32.0 / 7.0) / std::sqrt(8.0)).epsilon(1e-15));

    CHECK(sample_stddev(std::vector<double>{3.0}) == 0.0);
    CHECK(mean(std::vector<double>{}) == 0.0);
}

// Published FNV-1a 64-bit vectors.
TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64(std::string{}) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64(std::string{"a"}) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64(std::string{"foobar"}) == 0x85944171f73967e8ULL);
    CHECK(fnv1a64_hex("foobar") == "fnv64:85944171f73967e8");
}

TEST_CASE("format_double is locale free and round-trippable") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(-3.0) == "-3");
    CHECK(format_double(1234567.25) == "1234567.25");
    CHECK(format_double(1e-9, 3) == "1e-09");

    // 17 significant digits round-trip any double; the 12-digit default is
    // for display only.
    const double v = 681462649.4973242;
    CHECK(std::stod(format_double(v, 17)) == v);
    CHECK(format_double(v) == "681462649.497");
}

TEST_CASE("atomic write then read round-trips exactly") {
    const std::string path = "test_util_roundtrip.txt";
    const std::string body = "line1\nline2\n\ttabbed, no trailing newline";
    write_text_file_atomic(path, body);
    CHECK(read_text_file(path) == body);

    // Overwrite must fully replace, not append.
    write_text_file_atomic(path, "short");
    CHECK(read_text_file(path) == "short");
    std::remove(path.c_str());
}

TEST_CASE("missing file raises FileError") {
    CHECK_THROWS_AS(read_text_file("no/such/dir/file.txt"), FileError);
}
