#include "pktdet/correlator.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>
#include <string>

namespace pktdet {

namespace {

constexpr std::size_t kBits = CoefficientBank::kWordBits;

std::size_t words_for(std::size_t bits) { return (bits + kBits - 1) / kBits; }

std::uint32_t low_mask(std::size_t bits) {
    return bits >= kBits ? 0xFFFFFFFFu : ((std::uint32_t{1} << bits) - 1u);
}

bool bit_at(std::span<const std::uint32_t> words, std::size_t k) {
    return ((words[k / kBits] >> (k % kBits)) & 1u) != 0;
}

void set_bit(std::vector<std::uint32_t>& words, std::size_t k) { words[k / kBits] |= std::uint32_t{1} << (k % kBits); }

// 32 bits starting at bit `offset`; bits past the end read as zero.
std::uint32_t extract(std::span<const std::uint32_t> words, std::size_t offset) {
    const std::size_t w = offset / kBits;
    const std::size_t s = offset % kBits;
    if (w >= words.size()) {
        return 0;
    }
    std::uint32_t v = words[w] >> s;
    if (s != 0 && w + 1 < words.size()) {
        v |= words[w + 1] << (kBits - s);
    }
    return v;
}

// Sum of a[m] * b[m] over n sign pairs, via agreements: 2 * popcount(XNOR) - n.
std::int32_t sign_dot(std::span<const std::uint32_t> window, std::size_t offset, std::span<const std::uint32_t> ref,
                      std::size_t n) {
    std::int32_t agree = 0;
    for (std::size_t c = 0; c < ref.size(); ++c) {
        const std::size_t bits = std::min(kBits, n - c * kBits);
        const std::uint32_t x = ~(extract(window, offset + c * kBits) ^ ref[c]) & low_mask(bits);
        agree += std::popcount(x);
    }
    return 2 * agree - static_cast<std::int32_t>(n);
}

} // namespace

CoefficientBank CoefficientBank::from_words(std::size_t length, std::vector<std::uint32_t> i_words,
                                            std::vector<std::uint32_t> q_words) {
    if (length == 0) {
        throw std::invalid_argument("coefficient bank length must be >= 1");
    }
    const std::size_t words = words_for(length);
    if (i_words.size() != words || q_words.size() != words) {
        throw std::invalid_argument("coefficient bank of length " + std::to_string(length) + " needs " +
                                    std::to_string(words) + " I and Q words");
    }
    const std::uint32_t tail_mask = low_mask(length - (words - 1) * kBits);
    if ((i_words.back() & ~tail_mask) != 0 || (q_words.back() & ~tail_mask) != 0) {
        throw std::invalid_argument("coefficient bank has bits set past its length");
    }
    CoefficientBank bank;
    bank.length_ = length;
    bank.i_words_ = std::move(i_words);
    bank.q_words_ = std::move(q_words);
    return bank;
}

std::size_t CoefficientBank::valid_bits_in_last_word() const { return length_ - (word_count() - 1) * kBits; }

SignPair CoefficientBank::sign_at(std::size_t k) const {
    if (k >= length_) {
        throw std::out_of_range("coefficient index out of range");
    }
    return {static_cast<std::int8_t>(bit_at(i_words_, k) ? 1 : -1),
            static_cast<std::int8_t>(bit_at(q_words_, k) ? 1 : -1)};
}

std::vector<SignPair> CoefficientBank::unpack() const {
    std::vector<SignPair> out;
    out.reserve(length_);
    for (std::size_t k = 0; k < length_; ++k) {
        out.push_back(sign_at(k));
    }
    return out;
}

CoefficientBank load_coefficients(std::span<const SignPair> signs) {
    if (signs.empty()) {
        throw std::invalid_argument("cannot load an empty coefficient sequence");
    }
    std::vector<std::uint32_t> i_words(words_for(signs.size()), 0);
    std::vector<std::uint32_t> q_words(i_words.size(), 0);
    for (std::size_t k = 0; k < signs.size(); ++k) {
        if (signs[k].si > 0) {
            set_bit(i_words, k);
        }
        if (signs[k].sq > 0) {
            set_bit(q_words, k);
        }
    }
    return CoefficientBank::from_words(signs.size(), std::move(i_words), std::move(q_words));
}

CoefficientBank load_coefficients(const Preamble& preamble) {
    std::vector<SignPair> signs;
    signs.reserve(preamble.length());
    for (const auto& v : preamble.samples()) {
        signs.push_back(categorize(v));
    }
    return load_coefficients(signs);
}

CoefficientBank stack_banks(const CoefficientBank& head, const CoefficientBank& tail) {
    auto signs = head.unpack();
    const auto rest = tail.unpack();
    signs.insert(signs.end(), rest.begin(), rest.end());
    return load_coefficients(signs);
}

CorrelatorOutput& CorrelatorOutput::operator+=(const CorrelatorOutput& o) {
    p_ii += o.p_ii;
    p_qq += o.p_qq;
    p_qi += o.p_qi;
    p_iq += o.p_iq;
    re += o.re;
    im += o.im;
    return *this;
}

CorrelatorOutput operator+(CorrelatorOutput a, const CorrelatorOutput& b) { return a += b; }

WindowState::WindowState(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) {
        throw std::invalid_argument("window capacity must be >= 1");
    }
    i_bits_.assign(words_for(capacity_), 0);
    q_bits_.assign(i_bits_.size(), 0);
}

void WindowState::clear() {
    std::fill(i_bits_.begin(), i_bits_.end(), 0);
    std::fill(q_bits_.begin(), q_bits_.end(), 0);
    size_ = 0;
}

void WindowState::push(SignPair s) {
    auto shift_in = [&](std::vector<std::uint32_t>& words, bool bit) {
        for (std::size_t w = words.size(); w-- > 1;) {
            words[w] = (words[w] << 1) | (words[w - 1] >> (kBits - 1));
        }
        words[0] = (words[0] << 1) | (bit ? 1u : 0u);
        words.back() &= low_mask(capacity_ - (words.size() - 1) * kBits);
    };
    shift_in(i_bits_, s.si > 0);
    shift_in(q_bits_, s.sq > 0);
    size_ = std::min(size_ + 1, capacity_);
}

std::vector<SignPair> WindowState::contents() const {
    std::vector<SignPair> out;
    out.reserve(size_);
    for (std::size_t age = size_; age-- > 0;) {
        out.push_back({static_cast<std::int8_t>(bit_at(i_bits_, age) ? 1 : -1),
                       static_cast<std::int8_t>(bit_at(q_bits_, age) ? 1 : -1)});
    }
    return out;
}

PackedReference::PackedReference(const CoefficientBank& bank) : length_(bank.length()) {
    i_ref_.assign(words_for(length_), 0);
    q_ref_.assign(i_ref_.size(), 0);
    for (std::size_t a = 0; a < length_; ++a) {
        const std::size_t k = length_ - 1 - a;
        if (bit_at(bank.i_words(), k)) {
            set_bit(i_ref_, a);
        }
        if (bit_at(bank.q_words(), k)) {
            set_bit(q_ref_, a);
        }
    }
}

CorrelatorOutput PackedReference::correlate(const WindowState& window, std::size_t age_offset) const {
    CorrelatorOutput out;
    out.p_ii = sign_dot(window.i_bits(), age_offset, i_ref_, length_);
    out.p_qq = sign_dot(window.q_bits(), age_offset, q_ref_, length_);
    out.p_qi = sign_dot(window.q_bits(), age_offset, i_ref_, length_);
    out.p_iq = sign_dot(window.i_bits(), age_offset, q_ref_, length_);
    out.re = out.p_ii + out.p_qq;
    out.im = out.p_qi - out.p_iq;
    return out;
}

std::optional<CorrelatorOutput> correlate_at(const WindowState& window, const CoefficientBank& bank,
                                             std::size_t age_offset) {
    if (age_offset + bank.length() > window.capacity()) {
        throw std::invalid_argument("correlation of length " + std::to_string(bank.length()) +
                                    " does not fit a window of capacity " + std::to_string(window.capacity()));
    }
    if (window.size() < age_offset + bank.length()) {
        return std::nullopt;
    }
    return PackedReference(bank).correlate(window, age_offset);
}

std::optional<CorrelatorOutput> correlate_at(const WindowState& window, const CoefficientBank& bank) {
    return correlate_at(window, bank, 0);
}

StreamCorrelator::StreamCorrelator(std::shared_ptr<const CoefficientBank> bank, std::size_t hold_off,
                                   std::size_t window_capacity)
    : bank_(bank ? std::move(bank) : throw std::invalid_argument("null coefficient bank")),
      reference_(*bank_),
      window_(window_capacity == 0 ? bank_->length() : window_capacity),
      hold_off_(hold_off) {
    if (bank_->length() > window_.capacity()) {
        throw std::invalid_argument("coefficient bank longer than correlator window");
    }
}

void StreamCorrelator::swap_bank(std::shared_ptr<const CoefficientBank> bank) {
    if (!bank) {
        throw std::invalid_argument("null coefficient bank");
    }
    if (bank->length() > window_.capacity()) {
        throw std::invalid_argument("coefficient bank longer than correlator window");
    }
    reference_ = PackedReference(*bank);
    bank_ = std::move(bank);
}

void StreamCorrelator::shift(IqSample sample) {
    window_.push(categorize(sample));
    since_enable_.reset();
    active_ = false;
}

std::optional<CorrelatorOutput> StreamCorrelator::push(IqSample sample, bool enable) {
    window_.push(categorize(sample));
    if (enable) {
        since_enable_ = 0;
    } else if (since_enable_ && *since_enable_ <= hold_off_) {
        ++*since_enable_;
    }
    active_ = since_enable_.has_value() && *since_enable_ <= hold_off_;
    if (!active_ || window_.size() < reference_.length()) {
        return std::nullopt;
    }
    ++work_count_;
    return reference_.correlate(window_);
}

CorrelationTrace correlate_stream(const SampleStream& stream, const CoefficientBank& bank,
                                  const std::vector<bool>& enable, std::size_t hold_off) {
    if (enable.size() != stream.size()) {
        throw std::invalid_argument("enable mask length must equal stream length");
    }
    StreamCorrelator corr(std::make_shared<const CoefficientBank>(bank), hold_off);
    CorrelationTrace trace;
    for (std::size_t k = 0; k < stream.size(); ++k) {
        if (auto out = corr.push(stream[k], enable[k])) {
            trace.outputs.push_back({stream.origin_index() + static_cast<std::int64_t>(k), *out});
        }
    }
    trace.work_count = corr.work_count();
    return trace;
}

} // namespace pktdet
