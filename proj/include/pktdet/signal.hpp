#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace pktdet {

using Complex = std::complex<double>;

/// Fixed-point format of one I or Q component, e.g. Q1.15 (16 bits, 15 of them
/// fractional, two's complement).
struct FixedPointFormat {
    int total_bits = 16;
    int fractional_bits = 15;
    bool is_signed = true;

    /// Throws std::invalid_argument unless total_bits in [2, 32] and
    /// fractional_bits in [0, total_bits) (signed) or [0, total_bits]
    /// (unsigned). Unsigned formats stop at 31 bits so raw values fit an int32.
    void validate() const;

    std::int64_t max_raw() const;
    std::int64_t min_raw() const;
    /// Value of one LSB.
    double step() const;
    double to_real(std::int64_t raw) const;

    /// "q1.15" style name; unsigned formats are prefixed with 'u' ("uq0.16").
    std::string name() const;

    bool operator==(const FixedPointFormat&) const = default;
};

/// Parses "q1.15", "Q3.13", "uq0.16". Throws std::invalid_argument.
FixedPointFormat parse_format(std::string_view text);

inline constexpr FixedPointFormat kQ1_15{16, 15, true};

/// One received sample as raw fixed-point integers in the owning stream's format.
struct IqSample {
    std::int32_t i = 0;
    std::int32_t q = 0;

    bool operator==(const IqSample&) const = default;
};

/// Squared magnitude in raw LSB^2 units. Never overflows for 32-bit components.
inline std::uint64_t raw_energy(IqSample s) {
    const auto i = static_cast<std::int64_t>(s.i);
    const auto q = static_cast<std::int64_t>(s.q);
    return static_cast<std::uint64_t>(i * i) + static_cast<std::uint64_t>(q * q);
}

class SampleStream {
public:
    SampleStream() = default;
    /// Throws std::invalid_argument if any sample is outside the format's range.
    SampleStream(FixedPointFormat format, std::vector<IqSample> samples,
                 std::int64_t origin_index = 0, std::size_t saturation_count = 0);

    const FixedPointFormat& format() const { return format_; }
    std::span<const IqSample> samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    const IqSample& operator[](std::size_t k) const { return samples_[k]; }
    std::int64_t origin_index() const { return origin_index_; }
    /// Number of I/Q components clipped when the stream was quantized.
    std::size_t saturation_count() const { return saturation_count_; }

    Complex value_at(std::size_t k) const;
    std::vector<Complex> to_complex() const;

private:
    FixedPointFormat format_{kQ1_15};
    std::vector<IqSample> samples_;
    std::int64_t origin_index_ = 0;
    std::size_t saturation_count_ = 0;
};

/// Round half away from zero, then saturate. `saturated` is set when clipping occurred.
std::int32_t quantize_component(double value, const FixedPointFormat& format, bool* saturated = nullptr);

SampleStream quantize(std::span<const Complex> values, const FixedPointFormat& format);

/// Known reference sequence h[n] at full precision.
class Preamble {
public:
    static constexpr std::size_t kMaxLength = std::size_t{1} << 14;

    /// Throws std::invalid_argument for an empty or over-long sequence.
    Preamble(std::string id, std::vector<Complex> samples);

    const std::string& id() const { return id_; }
    std::span<const Complex> samples() const { return samples_; }
    std::size_t length() const { return samples_.size(); }

private:
    std::string id_;
    std::vector<Complex> samples_;
};

/// Complex pseudo-noise preamble with unit mean power: each component is
/// +-1/sqrt(2), drawn from a generator seeded with `seed`.
Preamble make_pn_preamble(std::string id, std::size_t length, std::uint64_t seed);

struct EmbeddedSignal {
    std::vector<Complex> samples;
    /// Index of the first preamble sample.
    std::size_t preamble_start = 0;
};

EmbeddedSignal embed_preamble(const Preamble& preamble, std::size_t pad_before, std::size_t pad_after,
                              std::span<const Complex> payload = {});

/// Mean of |x|^2; zero for an empty span.
double mean_power(std::span<const Complex> signal);

/// Adds complex white Gaussian noise with per-component variance
/// signal_power / (2 * 10^(snr_db/10)). An infinite snr_db disables noise.
/// Throws std::invalid_argument for an empty signal or a negative power.
std::vector<Complex> add_awgn(std::span<const Complex> signal, double snr_db, std::uint64_t seed,
                              double signal_power);

/// Noise disabled.
inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

} // namespace pktdet
