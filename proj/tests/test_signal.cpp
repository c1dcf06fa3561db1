#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "oracles.hpp"
#include "pktdet/signal.hpp"

using namespace pktdet;

namespace {

// Exact round-half-away-from-zero of value * 2^frac using rational arithmetic.
std::int64_t rational_round(double value, int frac) {
    using boost::multiprecision::cpp_rational;
    using boost::multiprecision::cpp_int;
    cpp_rational x(value);
    x *= cpp_rational(cpp_int(1) << frac);
    const bool neg = x < 0;
    if (neg) {
        x = -x;
    }
    x += cpp_rational(1, 2);
    cpp_int floored = numerator(x) / denominator(x);
    if (neg) {
        floored = -floored;
    }
    return static_cast<std::int64_t>(floored);
}

} // namespace

TEST_CASE("format parsing and validation") {
    CHECK(parse_format("q1.15") == kQ1_15);
    CHECK(parse_format("Q4.12") == FixedPointFormat{16, 12, true});
    CHECK(parse_format("uq0.16") == FixedPointFormat{16, 16, false});
    CHECK(parse_format("q1.31").total_bits == 32);
    CHECK(kQ1_15.name() == "q1.15");
    CHECK(parse_format("uq0.8").name() == "uq0.8");
    CHECK_THROWS_AS(parse_format("q1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_format("x1.15"), std::invalid_argument);
    CHECK_THROWS_AS(parse_format("q0.1"), std::invalid_argument);  // total 1 bit
    CHECK_THROWS_AS(parse_format("q2.31"), std::invalid_argument); // 33 bits
    CHECK_THROWS_AS(parse_format("q0.16"), std::invalid_argument); // fractional == total
    CHECK_THROWS_AS(parse_format("uq1.31"), std::invalid_argument);

    CHECK(kQ1_15.max_raw() == 32767);
    CHECK(kQ1_15.min_raw() == -32768);
    CHECK(kQ1_15.step() == std::ldexp(1.0, -15));
}

TEST_CASE("quantize examples") {
    SUBCASE("zero is exact") {
        const std::vector<Complex> v{{0.0, 0.0}};
        const auto s = quantize(v, kQ1_15);
        CHECK(s[0] == IqSample{0, 0});
        CHECK(s.saturation_count() == 0);
        CHECK(s.origin_index() == 0);
    }
    SUBCASE("out of range saturates and is counted") {
        const std::vector<Complex> v{{2.0, 0.0}};
        const auto s = quantize(v, kQ1_15);
        CHECK(s[0] == IqSample{32767, 0});
        CHECK(s.saturation_count() == 1);
    }
    SUBCASE("0.1 + 0.7j rounds to nearest") {
        const std::vector<Complex> v{{0.1, 0.7}};
        const auto s = quantize(v, kQ1_15);
        CHECK(s[0].i == rational_round(0.1, 15));
        CHECK(s[0].q == rational_round(0.7, 15));
        CHECK(std::abs(s.value_at(0).real() - 0.1) < std::ldexp(1.0, -15));
        CHECK(std::abs(s.value_at(0).imag() - 0.7) < std::ldexp(1.0, -15));
    }
    SUBCASE("negative saturation") {
        const std::vector<Complex> v{{-1.5, -1.0}};
        const auto s = quantize(v, kQ1_15);
        CHECK(s[0] == IqSample{-32768, -32768});
        CHECK(s.saturation_count() == 1); // -1.0 is representable
    }
}

TEST_CASE("quantize matches the rational rounding oracle, including ties") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.2, 1.2);
    for (const auto& fmt : {kQ1_15, FixedPointFormat{12, 10, true}, FixedPointFormat{32, 28, true},
                            FixedPointFormat{8, 8 - 1, true}}) {
        for (int n = 0; n < 4000; ++n) {
            double v = uni(rng);
            if (n % 4 == 0) {
                // exact half-LSB tie
                v = (std::floor(v * std::ldexp(1.0, fmt.fractional_bits)) + 0.5) * std::ldexp(1.0, -fmt.fractional_bits);
            }
            bool sat = false;
            const auto got = quantize_component(v, fmt, &sat);
            auto expected = rational_round(v, fmt.fractional_bits);
            const bool expect_sat = expected > fmt.max_raw() || expected < fmt.min_raw();
            expected = std::clamp(expected, fmt.min_raw(), fmt.max_raw());
            REQUIRE(got == expected);
            REQUIRE(sat == expect_sat);
            if (!sat) {
                REQUIRE(std::abs(fmt.to_real(got) - v) <= std::ldexp(1.0, -fmt.fractional_bits - 1));
            }
        }
    }
}

TEST_CASE("quantize is idempotent") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 0.6);
    std::vector<Complex> v;
    for (int k = 0; k < 2000; ++k) {
        v.emplace_back(g(rng), g(rng));
    }
    for (const auto& fmt : {kQ1_15, parse_format("q3.5"), parse_format("uq0.12")}) {
        const auto once = quantize(v, fmt);
        const auto values = once.to_complex();
        const auto twice = quantize(values, fmt);
        CHECK(std::equal(once.samples().begin(), once.samples().end(), twice.samples().begin()));
        CHECK(twice.saturation_count() == 0);
    }
}

TEST_CASE("sample stream rejects values outside its format") {
    CHECK_THROWS_AS(SampleStream(kQ1_15, {IqSample{40000, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(SampleStream(parse_format("uq0.8"), {IqSample{-1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(SampleStream(kQ1_15, {}, -1), std::invalid_argument);
    CHECK_NOTHROW(SampleStream(kQ1_15, {IqSample{-32768, 32767}}, 5));
}

TEST_CASE("embed_preamble") {
    const auto pre = make_pn_preamble("p", 32, 3);
    SUBCASE("pads and ground truth") {
        const auto e = embed_preamble(pre, 100, 40);
        CHECK(e.preamble_start == 100);
        CHECK(e.samples.size() == 100 + 32 + 40);
        CHECK(e.samples[99] == Complex{});
        CHECK(e.samples[100] == pre.samples()[0]);
        CHECK(e.samples[131] == pre.samples()[31]);
    }
    SUBCASE("identity without pads") {
        const auto e = embed_preamble(pre, 0, 0);
        CHECK(e.preamble_start == 0);
        CHECK(std::equal(e.samples.begin(), e.samples.end(), pre.samples().begin(), pre.samples().end()));
    }
    SUBCASE("payload follows the preamble") {
        const std::vector<Complex> payload{{0.5, -0.5}, {0.25, 0.25}};
        const auto e = embed_preamble(pre, 3, 2, payload);
        CHECK(e.samples.size() == 3 + 32 + 2 + 2);
        CHECK(e.samples[35] == payload[0]);
        CHECK(e.samples[36] == payload[1]);
        CHECK(e.samples[37] == Complex{});
    }
    SUBCASE("ground truth equals the float correlation argmax") {
        std::mt19937_64 rng(5);
        for (int t = 0; t < 30; ++t) {
            const std::size_t len = (t % 2) ? 64 : 32;
            const auto p = make_pn_preamble("p", len, rng());
            const std::size_t before = rng() % 200;
            const auto e = embed_preamble(p, before, rng() % 50);
            const auto k = oracle::float_correlation_argmax(e.samples, p.samples());
            CHECK(k + 1 - len == e.preamble_start);
        }
    }
}

TEST_CASE("pn preambles") {
    const auto a = make_pn_preamble("a", 64, 99);
    const auto b = make_pn_preamble("b", 64, 99);
    const auto c = make_pn_preamble("c", 64, 100);
    CHECK(std::equal(a.samples().begin(), a.samples().end(), b.samples().begin()));
    CHECK_FALSE(std::equal(a.samples().begin(), a.samples().end(), c.samples().begin()));
    CHECK(mean_power(a.samples()) == doctest::Approx(1.0));
    for (const auto& v : a.samples()) {
        CHECK(std::abs(std::abs(v.real()) - std::sqrt(0.5)) < 1e-15);
        CHECK(std::abs(std::abs(v.imag()) - std::sqrt(0.5)) < 1e-15);
    }
    CHECK_THROWS_AS(make_pn_preamble("x", 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(Preamble("x", std::vector<Complex>(Preamble::kMaxLength + 1)), std::invalid_argument);
}

TEST_CASE("add_awgn") {
    std::vector<Complex> unit(100000, Complex{1.0, 0.0});
    SUBCASE("noise disabled") {
        const auto out = add_awgn(unit, kNoNoise, 1, 1.0);
        CHECK(out == unit);
    }
    SUBCASE("deterministic per seed") {
        const auto a = add_awgn(unit, 3.0, 42, 1.0);
        const auto b = add_awgn(unit, 3.0, 42, 1.0);
        const auto c = add_awgn(unit, 3.0, 43, 1.0);
        CHECK(a == b);
        CHECK(a != c);
    }
    SUBCASE("10 dB on a unit-power signal gives noise power 0.1") {
        const auto out = add_awgn(unit, 10.0, 2024, mean_power(unit));
        double acc_i = 0.0;
        double acc_q = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            const auto n = out[k] - unit[k];
            acc_i += n.real() * n.real();
            acc_q += n.imag() * n.imag();
        }
        const double power = (acc_i + acc_q) / static_cast<double>(out.size());
        CHECK(std::abs(power - 0.1) < 0.003);
        // split evenly between I and Q
        CHECK(acc_i / static_cast<double>(out.size()) == doctest::Approx(0.05).epsilon(0.05));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(add_awgn({}, 10.0, 1, 1.0), std::invalid_argument);
        CHECK_THROWS_AS(add_awgn(unit, 10.0, 1, -1.0), std::invalid_argument);
    }
}
