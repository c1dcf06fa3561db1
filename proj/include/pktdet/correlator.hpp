#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pktdet/signal.hpp"

namespace pktdet {

/// Categorized sample: each component reduced to +1 or -1.
struct SignPair {
    std::int8_t si = 1;
    std::int8_t sq = 1;

    bool operator==(const SignPair&) const = default;
};

/// Zero maps to +1, the same rule the coefficient loader uses.
constexpr SignPair categorize(IqSample s) {
    return {static_cast<std::int8_t>(s.i >= 0 ? 1 : -1), static_cast<std::int8_t>(s.q >= 0 ? 1 : -1)};
}

inline SignPair categorize(Complex v) {
    return {static_cast<std::int8_t>(v.real() >= 0.0 ? 1 : -1), static_cast<std::int8_t>(v.imag() >= 0.0 ? 1 : -1)};
}

/// Reference signs packed into 32-bit registers. Bit k of word w holds the
/// sign of h[32w + k] (1 for >= 0, 0 for < 0); bits past `length` are zero.
class CoefficientBank {
public:
    static constexpr std::size_t kWordBits = 32;

    /// Throws std::invalid_argument if word counts do not equal
    /// ceil(length / 32) or any bit past `length` is set.
    static CoefficientBank from_words(std::size_t length, std::vector<std::uint32_t> i_words,
                                      std::vector<std::uint32_t> q_words);

    std::size_t length() const { return length_; }
    std::size_t word_count() const { return i_words_.size(); }
    std::span<const std::uint32_t> i_words() const { return i_words_; }
    std::span<const std::uint32_t> q_words() const { return q_words_; }
    std::size_t valid_bits_in_last_word() const;

    SignPair sign_at(std::size_t k) const;
    /// Signs of h[0..length).
    std::vector<SignPair> unpack() const;

    bool operator==(const CoefficientBank&) const = default;

private:
    CoefficientBank() = default;

    std::size_t length_ = 0;
    std::vector<std::uint32_t> i_words_;
    std::vector<std::uint32_t> q_words_;
};

CoefficientBank load_coefficients(const Preamble& preamble);
/// Throws std::invalid_argument for an empty sequence.
CoefficientBank load_coefficients(std::span<const SignPair> signs);

/// Concatenates two banks: `head` covers h[0..n1), `tail` covers h[n1..n1+n2).
CoefficientBank stack_banks(const CoefficientBank& head, const CoefficientBank& tail);

/// The four sign partials and the complex correlation they combine into.
struct CorrelatorOutput {
    std::int32_t p_ii = 0;
    std::int32_t p_qq = 0;
    std::int32_t p_qi = 0;
    std::int32_t p_iq = 0;
    std::int32_t re = 0;
    std::int32_t im = 0;

    std::int64_t magnitude_squared() const {
        return std::int64_t{re} * re + std::int64_t{im} * im;
    }

    CorrelatorOutput& operator+=(const CorrelatorOutput& o);
    bool operator==(const CorrelatorOutput&) const = default;
};

CorrelatorOutput operator+(CorrelatorOutput a, const CorrelatorOutput& b);

/// Sliding window of categorized samples, kept as packed bit shift registers.
/// Bit a of the packed words is the sample pushed a steps ago (age 0 = newest).
class WindowState {
public:
    /// Throws std::invalid_argument for zero capacity.
    explicit WindowState(std::size_t capacity);

    void push(SignPair s);
    void clear();

    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return size_; }
    bool full() const { return size_ == capacity_; }

    /// Stored samples, oldest first.
    std::vector<SignPair> contents() const;

    std::span<const std::uint32_t> i_bits() const { return i_bits_; }
    std::span<const std::uint32_t> q_bits() const { return q_bits_; }

private:
    std::size_t capacity_;
    std::size_t size_ = 0;
    std::vector<std::uint32_t> i_bits_;
    std::vector<std::uint32_t> q_bits_;
};

/// A bank re-packed in window (age) order so a correlation is a handful of
/// XNOR + popcount operations: bit a holds the sign of h[n - 1 - a].
class PackedReference {
public:
    explicit PackedReference(const CoefficientBank& bank);

    std::size_t length() const { return length_; }

    /// Correlates against the window samples aged [age_offset, age_offset + n).
    /// With age_offset = 0 the newest sample lines up with h[n-1]. Caller must
    /// ensure window.size() >= age_offset + length().
    CorrelatorOutput correlate(const WindowState& window, std::size_t age_offset = 0) const;

private:
    std::size_t length_;
    std::vector<std::uint32_t> i_ref_;
    std::vector<std::uint32_t> q_ref_;
};

/// Cross-correlates the most recent bank.length() window samples (oldest
/// aligned with h[0]) against the bank. Returns nullopt while the window holds
/// fewer samples than the bank. Throws std::invalid_argument if the bank can
/// never fit the window.
std::optional<CorrelatorOutput> correlate_at(const WindowState& window, const CoefficientBank& bank);

/// Same, over the window samples aged [age_offset, age_offset + n). Used to
/// stack shorter cores into a longer correlation.
std::optional<CorrelatorOutput> correlate_at(const WindowState& window, const CoefficientBank& bank,
                                             std::size_t age_offset);

/// Gated streaming correlator. The window keeps shifting on every sample; the
/// partial sums are only computed while the correlator is enabled.
class StreamCorrelator {
public:
    /// `hold_off`: number of samples the correlator stays active after the
    /// enable input drops. `window_capacity` of 0 means the bank length.
    explicit StreamCorrelator(std::shared_ptr<const CoefficientBank> bank, std::size_t hold_off = 0,
                              std::size_t window_capacity = 0);

    std::optional<CorrelatorOutput> push(IqSample sample, bool enable);
    /// Shifts a sample into the window without correlating and drops any hold-off.
    void shift(IqSample sample);

    /// Takes effect from the next push. Throws std::invalid_argument if the new
    /// bank is longer than the window.
    void swap_bank(std::shared_ptr<const CoefficientBank> bank);
    void set_hold_off(std::size_t hold_off) { hold_off_ = hold_off; }

    const CoefficientBank& bank() const { return *bank_; }
    std::uint64_t work_count() const { return work_count_; }
    bool active() const { return active_; }

private:
    std::shared_ptr<const CoefficientBank> bank_;
    PackedReference reference_;
    WindowState window_;
    std::size_t hold_off_;
    std::optional<std::size_t> since_enable_;
    bool active_ = false;
    std::uint64_t work_count_ = 0;
};

struct IndexedOutput {
    std::int64_t index = 0;
    CorrelatorOutput output;
};

struct CorrelationTrace {
    std::vector<IndexedOutput> outputs;
    /// Number of partial-sum evaluations performed.
    std::uint64_t work_count = 0;
};

/// Runs a gated correlator over the whole stream. Output indices are stream
/// indices (origin_index + k) of the newest sample in the window. Throws
/// std::invalid_argument if enable.size() != stream.size().
CorrelationTrace correlate_stream(const SampleStream& stream, const CoefficientBank& bank,
                                  const std::vector<bool>& enable, std::size_t hold_off = 0);

} // namespace pktdet
