#include "pktdet/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pktdet {

void EnergyConfig::validate() const {
    if (window_len < 1) {
        throw std::invalid_argument("energy window_len must be >= 1");
    }
    if (window_len > (std::size_t{1} << 16)) {
        throw std::invalid_argument("energy window_len must be <= 65536");
    }
    if (count_threshold > window_len) {
        throw std::invalid_argument("energy count_threshold must not exceed window_len");
    }
}

std::uint64_t energy_threshold_from_power(double power, const FixedPointFormat& format) {
    if (!(power >= 0.0)) {
        throw std::invalid_argument("energy threshold must be non-negative");
    }
    const double raw = std::round(std::ldexp(power, 2 * format.fractional_bits));
    if (raw >= 18446744073709551615.0) {
        return UINT64_MAX;
    }
    return static_cast<std::uint64_t>(raw);
}

WideUInt window_energy(const SampleStream& stream, std::size_t start, std::size_t window_len) {
    if (start > stream.size() || window_len > stream.size() - start) {
        throw std::out_of_range("energy window [" + std::to_string(start) + ", " +
                                std::to_string(start + window_len) + ") outside stream of length " +
                                std::to_string(stream.size()));
    }
    WideUInt acc = 0;
    for (std::size_t k = start; k < start + window_len; ++k) {
        acc += raw_energy(stream[k]);
    }
    return acc;
}

double energy_to_power(WideUInt raw, const FixedPointFormat& format) {
    return std::ldexp(static_cast<long double>(raw), -2 * format.fractional_bits);
}

EnergyDetector::EnergyDetector(EnergyConfig cfg) : cfg_(cfg) {
    cfg_.validate();
    ring_.assign(cfg_.window_len, 0);
}

void EnergyDetector::reset() {
    std::fill(ring_.begin(), ring_.end(), 0);
    head_ = 0;
    filled_ = 0;
    energy_ = 0;
    exceed_ = 0;
}

void EnergyDetector::reconfigure(const EnergyConfig& cfg) {
    cfg.validate();
    if (cfg.window_len != cfg_.window_len) {
        cfg_ = cfg;
        ring_.assign(cfg_.window_len, 0);
        reset();
        return;
    }
    cfg_ = cfg;
    exceed_ = 0;
    for (std::size_t k = 0; k < filled_; ++k) {
        exceed_ += ring_[k] > cfg_.sample_energy_threshold ? 1 : 0;
    }
}

std::optional<EnergyDecision> EnergyDetector::push(IqSample sample, std::int64_t index) {
    const std::uint64_t e = raw_energy(sample);
    if (filled_ == cfg_.window_len) {
        const std::uint64_t evicted = ring_[head_];
        energy_ -= evicted;
        exceed_ -= evicted > cfg_.sample_energy_threshold ? 1 : 0;
    } else {
        ++filled_;
    }
    ring_[head_] = e;
    head_ = (head_ + 1) % cfg_.window_len;
    energy_ += e;
    exceed_ += e > cfg_.sample_energy_threshold ? 1 : 0;

    if (filled_ < cfg_.window_len) {
        return std::nullopt;
    }
    EnergyDecision d;
    d.window_energy = energy_;
    d.exceed_count = exceed_;
    d.at_index = index;
    d.active = exceed_ > cfg_.count_threshold && cfg_.rssi_gate.value_or(true);
    return d;
}

std::vector<EnergyDecision> energy_gate(const SampleStream& stream, const EnergyConfig& cfg) {
    EnergyDetector det(cfg);
    std::vector<EnergyDecision> out;
    if (stream.size() >= cfg.window_len) {
        out.reserve(stream.size() - cfg.window_len + 1);
    }
    for (std::size_t k = 0; k < stream.size(); ++k) {
        if (auto d = det.push(stream[k], stream.origin_index() + static_cast<std::int64_t>(k))) {
            out.push_back(*d);
        }
    }
    return out;
}

std::vector<bool> gate_mask(const std::vector<EnergyDecision>& decisions, const SampleStream& stream) {
    std::vector<bool> mask(stream.size(), false);
    for (const auto& d : decisions) {
        const auto k = d.at_index - stream.origin_index();
        if (d.active && k >= 0 && static_cast<std::size_t>(k) < mask.size()) {
            mask[static_cast<std::size_t>(k)] = true;
        }
    }
    return mask;
}

} // namespace pktdet
