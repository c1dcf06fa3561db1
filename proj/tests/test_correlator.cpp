#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "pktdet/correlator.hpp"

using namespace pktdet;

namespace {

std::vector<SignPair> to_pairs(const oracle::Signs& s) {
    std::vector<SignPair> v;
    for (std::size_t k = 0; k < s.i.size(); ++k) {
        v.push_back({static_cast<std::int8_t>(s.i[k]), static_cast<std::int8_t>(s.q[k])});
    }
    return v;
}

IqSample to_sample(SignPair p, std::int32_t mag = 1000) { return {p.si * mag, p.sq * mag}; }

oracle::Signs tail(const oracle::Signs& s, std::size_t n) {
    oracle::Signs t;
    t.i.assign(s.i.end() - static_cast<std::ptrdiff_t>(n), s.i.end());
    t.q.assign(s.q.end() - static_cast<std::ptrdiff_t>(n), s.q.end());
    return t;
}

void check_against_oracle(const CorrelatorOutput& got, const oracle::Partials& want) {
    REQUIRE(got.p_ii == want.p_ii);
    REQUIRE(got.p_qq == want.p_qq);
    REQUIRE(got.p_qi == want.p_qi);
    REQUIRE(got.p_iq == want.p_iq);
    REQUIRE(got.re == want.p_ii + want.p_qq);
    REQUIRE(got.im == want.p_qi - want.p_iq);
}

WindowState fill_window(const oracle::Signs& s, std::size_t capacity) {
    WindowState w(capacity);
    for (const auto& p : to_pairs(s)) {
        w.push(p);
    }
    return w;
}

} // namespace

TEST_CASE("categorize") {
    CHECK(categorize(IqSample{5, -3}) == SignPair{1, -1});
    CHECK(categorize(IqSample{0, 0}) == SignPair{1, 1});
    CHECK(categorize(IqSample{-1, 1}) == SignPair{-1, 1});
    CHECK(categorize(Complex{-0.0, 0.0}) == SignPair{1, 1});
    CHECK(categorize(Complex{-1e-9, 2.0}) == SignPair{-1, 1});
    static_assert(categorize(IqSample{-7, 0}) == SignPair{-1, 1});
}

TEST_CASE("coefficient bank layout") {
    std::mt19937_64 rng(1);
    SUBCASE("16 points fit one word with 16 valid bits") {
        const auto b = load_coefficients(to_pairs(oracle::random_signs(16, rng)));
        CHECK(b.word_count() == 1);
        CHECK(b.valid_bits_in_last_word() == 16);
        CHECK((b.i_words()[0] >> 16) == 0);
        CHECK((b.q_words()[0] >> 16) == 0);
    }
    SUBCASE("32 points fit one full word") {
        const auto b = load_coefficients(to_pairs(oracle::random_signs(32, rng)));
        CHECK(b.word_count() == 1);
        CHECK(b.valid_bits_in_last_word() == 32);
    }
    SUBCASE("64 points use two words and unpack round-trips") {
        const auto s = to_pairs(oracle::random_signs(64, rng));
        const auto b = load_coefficients(s);
        CHECK(b.word_count() == 2);
        CHECK(b.unpack() == s);
        for (std::size_t k = 0; k < 64; ++k) {
            const bool ibit = (b.i_words()[k / 32] >> (k % 32)) & 1U;
            CHECK(ibit == (s[k].si > 0));
            CHECK(b.sign_at(k) == s[k]);
        }
    }
    SUBCASE("preamble loading uses the sign rule") {
        const Preamble p("p", {{0.5, -0.5}, {0.0, -0.0}, {-2.0, 1.0}});
        const auto b = load_coefficients(p);
        CHECK(b.unpack() == std::vector<SignPair>{{1, -1}, {1, 1}, {-1, 1}});
    }
    SUBCASE("from_words validation") {
        CHECK_NOTHROW(CoefficientBank::from_words(40, {0xFFFFFFFFU, 0xFFU}, {0U, 0U}));
        CHECK_THROWS_AS(CoefficientBank::from_words(40, {0xFFFFFFFFU, 0x1FFU}, {0U, 0U}), std::invalid_argument);
        CHECK_THROWS_AS(CoefficientBank::from_words(40, {0U}, {0U, 0U}), std::invalid_argument);
        CHECK_THROWS_AS(CoefficientBank::from_words(0, {}, {}), std::invalid_argument);
        CHECK_THROWS_AS(load_coefficients(std::span<const SignPair>{}), std::invalid_argument);
    }
}

TEST_CASE("ideal maxima") {
    std::mt19937_64 rng(2);
    for (std::size_t n : {32U, 64U}) {
        const auto s = oracle::random_signs(n, rng);
        const auto bank = load_coefficients(to_pairs(s));
        const auto w = fill_window(s, n);
        const auto out = correlate_at(w, bank);
        REQUIRE(out.has_value());
        CHECK(out->re == static_cast<std::int32_t>(2 * n));
        CHECK(out->im == 0);

        oracle::Signs neg = s;
        for (auto& x : neg.i) {
            x = -x;
        }
        for (auto& x : neg.q) {
            x = -x;
        }
        CHECK(correlate_at(fill_window(neg, n), bank)->re == -static_cast<std::int32_t>(2 * n));
    }
}

TEST_CASE("exhaustive small lengths match the naive dot product") {
    for (std::size_t n = 1; n <= 4; ++n) {
        const std::uint32_t combos = 1U << (2 * n);
        for (std::uint32_t hc = 0; hc < combos; ++hc) {
            oracle::Signs h;
            for (std::size_t k = 0; k < n; ++k) {
                h.i.push_back(((hc >> (2 * k)) & 1U) ? 1 : -1);
                h.q.push_back(((hc >> (2 * k + 1)) & 1U) ? 1 : -1);
            }
            const auto bank = load_coefficients(to_pairs(h));
            for (std::uint32_t yc = 0; yc < combos; ++yc) {
                oracle::Signs y;
                for (std::size_t k = 0; k < n; ++k) {
                    y.i.push_back(((yc >> (2 * k)) & 1U) ? 1 : -1);
                    y.q.push_back(((yc >> (2 * k + 1)) & 1U) ? 1 : -1);
                }
                check_against_oracle(*correlate_at(fill_window(y, n), bank), oracle::sign_partials(y, h));
            }
        }
    }
    // n up to 8 against a sample of windows
    std::mt19937_64 rng(4);
    for (std::size_t n = 5; n <= 8; ++n) {
        for (int t = 0; t < 2000; ++t) {
            const auto h = oracle::random_signs(n, rng);
            const auto y = oracle::random_signs(n, rng);
            check_against_oracle(*correlate_at(fill_window(y, n), load_coefficients(to_pairs(h))),
                                 oracle::sign_partials(y, h));
        }
    }
}

TEST_CASE("random lengths and longer windows match the naive dot product") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 600; ++t) {
        const std::size_t n = 1 + rng() % 128;
        const std::size_t cap = n + rng() % 70;
        const std::size_t pushed = n + rng() % 200;
        const auto h = oracle::random_signs(n, rng);
        const auto y = oracle::random_signs(pushed, rng);
        const auto w = fill_window(y, cap);
        CHECK(w.size() == std::min(cap, pushed));
        const auto got = correlate_at(w, load_coefficients(to_pairs(h)));
        REQUIRE(got.has_value());
        const auto want = oracle::sign_partials(tail(y, n), h);
        check_against_oracle(*got, want);
        // each partial is a sum of n terms of +-1, so shares n's parity
        CHECK((got->p_ii - static_cast<std::int32_t>(n)) % 2 == 0);
        CHECK(std::abs(got->re) <= static_cast<std::int32_t>(2 * n));
        CHECK(std::abs(got->im) <= static_cast<std::int32_t>(2 * n));
    }
}

TEST_CASE("window contents and shifting") {
    std::mt19937_64 rng(6);
    const auto y = oracle::random_signs(100, rng);
    const auto w = fill_window(y, 37);
    CHECK(w.full());
    CHECK(w.contents() == to_pairs(tail(y, 37)));
    WindowState e(5);
    CHECK(e.contents().empty());
    CHECK_THROWS_AS(WindowState(0), std::invalid_argument);
}

TEST_CASE("stacked cores sum to the longer correlation") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n1 = 1 + rng() % 64;
        const std::size_t n2 = 1 + rng() % 64;
        const auto h = oracle::random_signs(n1 + n2, rng);
        const auto pairs = to_pairs(h);
        const auto head = load_coefficients(std::span(pairs).first(n1));
        const auto tl = load_coefficients(std::span(pairs).subspan(n1));
        const auto full = stack_banks(head, tl);
        CHECK(full == load_coefficients(pairs));
        const auto y = oracle::random_signs(n1 + n2 + rng() % 20, rng);
        const auto w = fill_window(y, n1 + n2);
        // head lines up with the older samples, tail with the newest n2
        const auto sum = *correlate_at(w, head, n2) + *correlate_at(w, tl, 0);
        CHECK(sum == *correlate_at(w, full));
    }
}

TEST_CASE("positive scaling of the input leaves the output unchanged") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::int32_t> mag(1, 32767);
    const auto h = oracle::random_signs(64, rng);
    const auto y = oracle::random_signs(64, rng);
    const auto bank = std::make_shared<const CoefficientBank>(load_coefficients(to_pairs(h)));
    StreamCorrelator a(bank);
    StreamCorrelator b(bank);
    std::optional<CorrelatorOutput> oa;
    std::optional<CorrelatorOutput> ob;
    for (const auto& p : to_pairs(y)) {
        oa = a.push(to_sample(p, 1), true);
        ob = b.push(to_sample(p, mag(rng)), true);
    }
    CHECK(*oa == *ob);
}

TEST_CASE("not ready and misfit") {
    const auto bank = load_coefficients(std::vector<SignPair>(8));
    WindowState w(9);
    for (int k = 0; k < 7; ++k) {
        w.push({1, 1});
        CHECK_FALSE(correlate_at(w, bank).has_value());
    }
    w.push({1, 1});
    CHECK(correlate_at(w, bank)->re == 16);
    CHECK_FALSE(correlate_at(w, bank, 1).has_value());
    WindowState small(4);
    CHECK_THROWS_AS(correlate_at(small, bank), std::invalid_argument);
}

TEST_CASE("correlate_stream") {
    const auto pre = make_pn_preamble("p", 64, 17);
    const auto bank = load_coefficients(pre);
    const auto e = embed_preamble(pre, 120, 80);
    std::vector<Complex> scaled;
    for (auto v : e.samples) {
        scaled.push_back(v * 0.25);
    }
    const auto s = quantize(scaled, kQ1_15);

    SUBCASE("all-false enable does no work") {
        const auto tr = correlate_stream(s, bank, std::vector<bool>(s.size(), false));
        CHECK(tr.outputs.empty());
        CHECK(tr.work_count == 0);
    }
    SUBCASE("all-true enable peaks at the last preamble sample") {
        const auto tr = correlate_stream(s, bank, std::vector<bool>(s.size(), true));
        CHECK(tr.work_count == s.size() - 63);
        std::int32_t best = INT32_MIN;
        std::int64_t at = -1;
        int count_at_best = 0;
        for (const auto& o : tr.outputs) {
            if (o.output.re > best) {
                best = o.output.re;
                at = o.index;
                count_at_best = 1;
            } else if (o.output.re == best) {
                ++count_at_best;
            }
        }
        CHECK(best == 128);
        CHECK(count_at_best == 1);
        CHECK(at == static_cast<std::int64_t>(e.preamble_start + 63));
        CHECK(at == static_cast<std::int64_t>(oracle::float_correlation_argmax(scaled, pre.samples())));
    }
    SUBCASE("restricted enable reproduces the peak with less work") {
        std::vector<bool> en(s.size(), false);
        for (std::size_t k = 170; k < 200; ++k) {
            en[k] = true;
        }
        const auto tr = correlate_stream(s, bank, en);
        CHECK(tr.work_count == 30);
        bool found = false;
        for (const auto& o : tr.outputs) {
            CHECK(o.index >= 170);
            CHECK(o.index < 200);
            if (o.index == 183) {
                CHECK(o.output.re == 128);
                found = true;
            }
        }
        CHECK(found);
    }
    SUBCASE("hold-off keeps the correlator running after enable drops") {
        std::vector<bool> en(s.size(), false);
        en[100] = true;
        const auto tr = correlate_stream(s, bank, en, 5);
        CHECK(tr.work_count == 6);
        CHECK(tr.outputs.front().index == 100);
        CHECK(tr.outputs.back().index == 105);
    }
    SUBCASE("origin offsets the reported index") {
        const SampleStream shifted(s.format(), std::vector<IqSample>(s.samples().begin(), s.samples().end()), 1000);
        const auto tr = correlate_stream(shifted, bank, std::vector<bool>(s.size(), true));
        CHECK(tr.outputs.front().index == 1063);
    }
    SUBCASE("mask length mismatch") {
        CHECK_THROWS_AS(correlate_stream(s, bank, std::vector<bool>(3, true)), std::invalid_argument);
    }
}

TEST_CASE("stream correlator bank swap and shift") {
    std::mt19937_64 rng(9);
    const auto h1 = to_pairs(oracle::random_signs(32, rng));
    std::vector<SignPair> h2 = h1;
    for (auto& p : h2) {
        p = {static_cast<std::int8_t>(-p.si), static_cast<std::int8_t>(-p.sq)};
    }
    StreamCorrelator c(std::make_shared<const CoefficientBank>(load_coefficients(h1)), 0, 64);
    for (const auto& p : h1) {
        c.shift(to_sample(p));
    }
    CHECK(c.work_count() == 0);
    CHECK_FALSE(c.active());
    c.swap_bank(std::make_shared<const CoefficientBank>(load_coefficients(h2)));
    const auto out = c.push(to_sample(h1.back()), true);
    CHECK(out.has_value());
    CHECK(c.work_count() == 1);
    CHECK_THROWS_AS(c.swap_bank(std::make_shared<const CoefficientBank>(load_coefficients(std::vector<SignPair>(65)))),
                    std::invalid_argument);
    CHECK_THROWS_AS(StreamCorrelator(nullptr), std::invalid_argument);
}
