#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "pktdet/signal.hpp"
#include "pktdet/wide.hpp"

namespace pktdet {

struct EnergyConfig {
    std::size_t window_len = 16;
    /// Per-sample |y|^2 threshold in raw LSB^2 units.
    std::uint64_t sample_energy_threshold = 0;
    /// The gate opens when strictly more than this many samples in the window
    /// exceed sample_energy_threshold.
    std::size_t count_threshold = 8;
    /// External RSSI flag; when present it is ANDed into every decision.
    std::optional<bool> rssi_gate;

    /// Throws std::invalid_argument.
    void validate() const;
};

/// Converts a |y|^2 threshold in full-scale units to raw LSB^2 units (rounded).
std::uint64_t energy_threshold_from_power(double power, const FixedPointFormat& format);

struct EnergyDecision {
    bool active = false;
    WideUInt window_energy = 0;
    std::size_t exceed_count = 0;
    /// Index of the newest sample in the window.
    std::int64_t at_index = 0;
};

/// Sum of i^2 + q^2 over [start, start + window_len), in raw LSB^2 units.
/// Throws std::out_of_range if the window runs past the stream.
WideUInt window_energy(const SampleStream& stream, std::size_t start, std::size_t window_len);

/// Window energy scaled back to full-scale units.
double energy_to_power(WideUInt raw, const FixedPointFormat& format);

/// Sliding-window energy detector, one sample at a time.
class EnergyDetector {
public:
    explicit EnergyDetector(EnergyConfig cfg);

    /// Returns a decision once the window is full.
    std::optional<EnergyDecision> push(IqSample sample, std::int64_t index);
    void reset();
    /// Applies new thresholds. The window history survives unless window_len changes.
    void reconfigure(const EnergyConfig& cfg);

    const EnergyConfig& config() const { return cfg_; }

private:
    EnergyConfig cfg_;
    std::vector<std::uint64_t> ring_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    WideUInt energy_ = 0;
    std::size_t exceed_ = 0;
};

/// One decision per full window position, in stream order (stream.size() -
/// window_len + 1 decisions). Returns an empty vector if the stream is
/// shorter than the window.
std::vector<EnergyDecision> energy_gate(const SampleStream& stream, const EnergyConfig& cfg);

/// Per-sample enable mask: true where a decision ending at that sample is active.
std::vector<bool> gate_mask(const std::vector<EnergyDecision>& decisions, const SampleStream& stream);

} // namespace pktdet
