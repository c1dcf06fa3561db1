#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "pktdet/coeff_file.hpp"

using namespace pktdet;

TEST_CASE("coefficient text layout") {
    const auto bank = CoefficientBank::from_words(40, {0xDEADBEEFU, 0x12U}, {0x0U, 0xFFU});
    CHECK(format_coefficients(bank) == "n=40\ndeadbeef\n00000012\n00000000\n000000ff\n");
}

TEST_CASE("coefficient round trip") {
    std::mt19937_64 rng(4);
    for (std::size_t n : {1U, 16U, 31U, 32U, 33U, 64U, 100U, 128U}) {
        std::vector<SignPair> s(n);
        for (auto& p : s) {
            p = {static_cast<std::int8_t>((rng() & 1U) ? 1 : -1), static_cast<std::int8_t>((rng() & 1U) ? 1 : -1)};
        }
        const auto bank = load_coefficients(s);
        CHECK(parse_coefficients(format_coefficients(bank)) == bank);
    }
}

TEST_CASE("coefficient parser leniency") {
    const auto bank = parse_coefficients("# header\n\nn=32\n0xFFFFFFFF  # all ones\n\n00000001\r\n");
    CHECK(bank.length() == 32);
    CHECK(bank.i_words()[0] == 0xFFFFFFFFU);
    CHECK(bank.q_words()[0] == 1U);
}

TEST_CASE("coefficient parser errors") {
    CHECK_THROWS_AS(parse_coefficients(""), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("00000000\n00000000\n"), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("n=0\n"), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("n=x\n0\n0\n"), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("n=32\n00000000\n"), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("n=32\n0\n0\n0\n"), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("n=32\nzz\n0\n"), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("n=32\n100000000\n0\n"), CoeffFormatError);
    CHECK_THROWS_AS(parse_coefficients("n=8\n00000100\n0\n"), CoeffFormatError); // bit past length
    CHECK_THROWS_AS(read_coefficient_file("/nonexistent/coeffs.hex"), CoeffFormatError);
}

TEST_CASE("coefficient file on disk") {
    const auto path = std::filesystem::temp_directory_path() / "pktdet_coeff_test.hex";
    const auto bank = load_coefficients(make_pn_preamble("p", 64, 3));
    {
        std::ofstream out(path);
        out << format_coefficients(bank);
    }
    CHECK(read_coefficient_file(path) == bank);
    std::filesystem::remove(path);
}
