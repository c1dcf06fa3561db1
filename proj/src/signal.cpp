#include "pktdet/signal.hpp"

#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>

#include "pktdet/wide.hpp"

namespace pktdet {

namespace {

std::string wide_to_string(WideUInt v, bool negative) {
    std::string digits;
    do {
        digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    } while (v != 0);
    if (negative) {
        digits.insert(digits.begin(), '-');
    }
    return digits;
}

} // namespace

std::string to_string(WideUInt v) { return wide_to_string(v, false); }

std::string to_string(WideInt v) {
    const bool negative = v < 0;
    const WideUInt magnitude = negative ? WideUInt(0) - static_cast<WideUInt>(v) : static_cast<WideUInt>(v);
    return wide_to_string(magnitude, negative);
}

void FixedPointFormat::validate() const {
    if (total_bits < 2 || total_bits > 32) {
        throw std::invalid_argument("fixed-point total_bits must be in [2, 32]");
    }
    // A signed format spends one bit on the sign; an unsigned one may be all fraction.
    const int max_fraction = is_signed ? total_bits - 1 : total_bits;
    if (fractional_bits < 0 || fractional_bits > max_fraction) {
        throw std::invalid_argument("fixed-point fractional_bits out of range for " + std::to_string(total_bits) +
                                    (is_signed ? " signed" : " unsigned") + " bits");
    }
    if (!is_signed && total_bits > 31) {
        throw std::invalid_argument("unsigned fixed-point formats are limited to 31 bits");
    }
}

std::int64_t FixedPointFormat::max_raw() const {
    return is_signed ? (std::int64_t{1} << (total_bits - 1)) - 1 : (std::int64_t{1} << total_bits) - 1;
}

std::int64_t FixedPointFormat::min_raw() const {
    return is_signed ? -(std::int64_t{1} << (total_bits - 1)) : 0;
}

double FixedPointFormat::step() const { return std::ldexp(1.0, -fractional_bits); }

double FixedPointFormat::to_real(std::int64_t raw) const {
    return std::ldexp(static_cast<double>(raw), -fractional_bits);
}

std::string FixedPointFormat::name() const {
    const int integer_bits = total_bits - fractional_bits;
    return std::string(is_signed ? "q" : "uq") + std::to_string(integer_bits) + "." +
           std::to_string(fractional_bits);
}

FixedPointFormat parse_format(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("bad fixed-point format '" + std::string(text) + "'"); };
    std::string_view rest = text;
    FixedPointFormat fmt;
    fmt.is_signed = true;
    if (!rest.empty() && (rest.front() == 'u' || rest.front() == 'U')) {
        fmt.is_signed = false;
        rest.remove_prefix(1);
    }
    if (rest.empty() || (rest.front() != 'q' && rest.front() != 'Q')) {
        throw fail();
    }
    rest.remove_prefix(1);
    const auto dot = rest.find('.');
    if (dot == std::string_view::npos) {
        throw fail();
    }
    int integer_bits = 0;
    int frac_bits = 0;
    const auto int_part = rest.substr(0, dot);
    const auto frac_part = rest.substr(dot + 1);
    auto r1 = std::from_chars(int_part.data(), int_part.data() + int_part.size(), integer_bits);
    auto r2 = std::from_chars(frac_part.data(), frac_part.data() + frac_part.size(), frac_bits);
    if (r1.ec != std::errc{} || r1.ptr != int_part.data() + int_part.size() || r2.ec != std::errc{} ||
        r2.ptr != frac_part.data() + frac_part.size() || int_part.empty() || frac_part.empty()) {
        throw fail();
    }
    fmt.total_bits = integer_bits + frac_bits;
    fmt.fractional_bits = frac_bits;
    fmt.validate();
    return fmt;
}

SampleStream::SampleStream(FixedPointFormat format, std::vector<IqSample> samples, std::int64_t origin_index,
                           std::size_t saturation_count)
    : format_(format), samples_(std::move(samples)), origin_index_(origin_index),
      saturation_count_(saturation_count) {
    format_.validate();
    if (origin_index_ < 0) {
        throw std::invalid_argument("origin_index must be non-negative");
    }
    const auto lo = format_.min_raw();
    const auto hi = format_.max_raw();
    for (const auto& s : samples_) {
        if (s.i < lo || s.i > hi || s.q < lo || s.q > hi) {
            throw std::invalid_argument("sample not representable in stream format " + format_.name());
        }
    }
}

Complex SampleStream::value_at(std::size_t k) const {
    const auto& s = samples_.at(k);
    return {format_.to_real(s.i), format_.to_real(s.q)};
}

std::vector<Complex> SampleStream::to_complex() const {
    std::vector<Complex> out;
    out.reserve(samples_.size());
    for (const auto& s : samples_) {
        out.emplace_back(format_.to_real(s.i), format_.to_real(s.q));
    }
    return out;
}

std::int32_t quantize_component(double value, const FixedPointFormat& format, bool* saturated) {
    // Scaling by a power of two is exact, so std::round sees the true value.
    const double scaled = std::round(std::ldexp(value, format.fractional_bits));
    const auto hi = static_cast<double>(format.max_raw());
    const auto lo = static_cast<double>(format.min_raw());
    bool clipped = false;
    double result = scaled;
    if (std::isnan(scaled)) {
        result = 0.0;
        clipped = true;
    } else if (scaled > hi) {
        result = hi;
        clipped = true;
    } else if (scaled < lo) {
        result = lo;
        clipped = true;
    }
    if (saturated != nullptr) {
        *saturated = clipped;
    }
    return static_cast<std::int32_t>(static_cast<std::int64_t>(result));
}

SampleStream quantize(std::span<const Complex> values, const FixedPointFormat& format) {
    format.validate();
    std::vector<IqSample> samples;
    samples.reserve(values.size());
    std::size_t saturations = 0;
    for (const auto& v : values) {
        bool sat_i = false;
        bool sat_q = false;
        IqSample s{quantize_component(v.real(), format, &sat_i), quantize_component(v.imag(), format, &sat_q)};
        saturations += static_cast<std::size_t>(sat_i) + static_cast<std::size_t>(sat_q);
        samples.push_back(s);
    }
    return SampleStream(format, std::move(samples), 0, saturations);
}

Preamble::Preamble(std::string id, std::vector<Complex> samples) : id_(std::move(id)), samples_(std::move(samples)) {
    if (samples_.empty()) {
        throw std::invalid_argument("preamble must contain at least one sample");
    }
    if (samples_.size() > kMaxLength) {
        throw std::invalid_argument("preamble longer than " + std::to_string(kMaxLength) + " samples");
    }
}

Preamble make_pn_preamble(std::string id, std::size_t length, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<Complex> samples;
    samples.reserve(length);
    for (std::size_t k = 0; k < length; ++k) {
        const double re = (rng() & 1U) ? a : -a;
        const double im = (rng() & 1U) ? a : -a;
        samples.emplace_back(re, im);
    }
    return Preamble(std::move(id), std::move(samples));
}

EmbeddedSignal embed_preamble(const Preamble& preamble, std::size_t pad_before, std::size_t pad_after,
                              std::span<const Complex> payload) {
    EmbeddedSignal out;
    out.preamble_start = pad_before;
    out.samples.reserve(pad_before + preamble.length() + payload.size() + pad_after);
    out.samples.assign(pad_before, Complex{});
    out.samples.insert(out.samples.end(), preamble.samples().begin(), preamble.samples().end());
    out.samples.insert(out.samples.end(), payload.begin(), payload.end());
    out.samples.resize(out.samples.size() + pad_after, Complex{});
    return out;
}

double mean_power(std::span<const Complex> signal) {
    if (signal.empty()) {
        return 0.0;
    }
    double acc = 0.0;
    for (const auto& v : signal) {
        acc += std::norm(v);
    }
    return acc / static_cast<double>(signal.size());
}

std::vector<Complex> add_awgn(std::span<const Complex> signal, double snr_db, std::uint64_t seed,
                              double signal_power) {
    if (signal.empty()) {
        throw std::invalid_argument("add_awgn: empty signal");
    }
    if (!(signal_power >= 0.0)) {
        throw std::invalid_argument("add_awgn: signal power must be non-negative");
    }
    std::vector<Complex> out(signal.begin(), signal.end());
    if (std::isinf(snr_db) && snr_db > 0) {
        return out;
    }
    const double variance = signal_power / (2.0 * std::pow(10.0, snr_db / 10.0));
    if (variance == 0.0) {
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(variance));
    for (auto& v : out) {
        const double ni = gauss(rng);
        const double nq = gauss(rng);
        v += Complex(ni, nq);
    }
    return out;
}

} // namespace pktdet
