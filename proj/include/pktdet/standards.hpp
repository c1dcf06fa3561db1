#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pktdet/coarse.hpp"
#include "pktdet/correlator.hpp"
#include "pktdet/energy.hpp"
#include "pktdet/signal.hpp"

namespace pktdet {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters handed downstream once a standard is detected. Carried as
/// metadata only.
struct PayloadParams {
    std::uint32_t packet_len = 0;
    std::uint32_t symbol_size = 0;
    std::uint32_t training_period = 0;

    bool operator==(const PayloadParams&) const = default;
};

struct StandardProfile {
    std::string id;
    Preamble preamble;
    /// Compared against the real part of the sign correlation; the ideal peak
    /// is 2 * correlator_len().
    std::int32_t fine_threshold = 1;
    PayloadParams payload;

    std::size_t correlator_len() const { return preamble.length(); }
    /// Throws ConfigError unless 0 < fine_threshold <= 2 * correlator_len().
    void validate() const;
};

/// Stage settings that are not per-standard.
struct DetectorSettings {
    EnergyConfig energy;
    /// Run the correlators on every sample regardless of the energy gate.
    bool energy_bypass = false;
    /// Coarse (Schmidl-Cox) stage; disabled when empty.
    std::optional<CoarseConfig> coarse;
    /// Samples the fine stage stays enabled after the gate drops. Defaults to
    /// twice the longest preamble.
    std::optional<std::size_t> hold_off;
    /// Candidates within this many samples of the first candidate of a cluster
    /// are arbitrated together. Defaults to the longest correlator length.
    std::optional<std::size_t> arbitration_window;
};

/// Run-time control surface: a flat set of named 32-bit registers.
///
/// Global keys:
///   energy.window  energy.sample_thresh  energy.count_thresh
///   energy.rssi_enable  energy.rssi  energy.bypass
///   coarse.enable  coarse.lag  coarse.thresh_q16  coarse.plateau
///   fine.hold_off  arbiter.window
/// Per standard k (registration order):
///   std<k>.enable  std<k>.length  std<k>.threshold  std<k>.priority
///   std<k>.packet_len  std<k>.symbol_size  std<k>.training_period
///   std<k>.coeff_i.<w>  std<k>.coeff_q.<w>
///
/// coarse.thresh_q16 holds the metric threshold scaled by 65536.
/// std<k>.threshold is a two's complement int32.
class RegisterMap {
public:
    /// Throws ConfigError if a setting does not fit a register or a profile is invalid.
    static RegisterMap build(std::span<const StandardProfile> profiles, const DetectorSettings& settings);

    /// Throws ConfigError for an unknown key.
    std::uint32_t read(std::string_view key) const;
    /// Throws ConfigError for an unknown key. Register keys are fixed at build time.
    void write(std::string_view key, std::uint32_t value);

    bool contains(std::string_view key) const;
    std::vector<std::string> keys() const;
    std::size_t size() const { return regs_.size(); }

    bool operator==(const RegisterMap&) const = default;

private:
    std::map<std::string, std::uint32_t, std::less<>> regs_;
};

/// Copy of `regs` with one register changed. Throws ConfigError for an unknown key.
RegisterMap write_register(RegisterMap regs, std::string_view key, std::uint32_t value);

std::string standard_key(std::size_t standard, std::string_view field);
std::string coefficient_key(std::size_t standard, char component, std::size_t word);

/// Registers decoded and validated against the profiles.
struct ResolvedStandard {
    bool enabled = true;
    std::int32_t threshold = 0;
    std::uint32_t priority = 0;
    PayloadParams payload;
    std::shared_ptr<const CoefficientBank> bank;
};

struct ResolvedConfig {
    EnergyConfig energy;
    bool energy_bypass = false;
    std::optional<CoarseConfig> coarse;
    std::size_t hold_off = 0;
    std::size_t arbitration_window = 0;
    std::vector<ResolvedStandard> standards;
};

/// Throws ConfigError if the map does not describe exactly these profiles
/// (standard count, lengths, coefficient word counts, stray bits, threshold
/// range, stage parameter ranges).
ResolvedConfig resolve_registers(const RegisterMap& regs, std::span<const StandardProfile> profiles);

struct StageTrace {
    /// First gated sample of the episode the peak belongs to.
    std::int64_t energy_index = 0;
    /// Start of the coarse plateau that armed the fine stage, when coarse is enabled.
    std::optional<std::int64_t> coarse_index;

    bool operator==(const StageTrace&) const = default;
};

struct Candidate {
    std::size_t profile_index = 0;
    std::size_t correlator_len = 0;
    std::int32_t peak_value = 0;
    std::int64_t peak_index = 0;
    /// Final tie-break, lower wins. Defaults to registration order.
    std::uint32_t priority = 0;
    StageTrace trace;
    PayloadParams payload;
};

/// True when `a` wins over `b`: longer correlator, then higher peak, then
/// earlier peak, then lower priority value, then earlier registration.
bool outranks(const Candidate& a, const Candidate& b);

/// Throws std::invalid_argument for an empty set.
Candidate arbitrate(std::span<const Candidate> candidates);

struct DetectionEvent {
    std::string standard_id;
    std::int32_t peak_value = 0;
    /// Stream index of the newest sample in the correlation window at the peak.
    std::int64_t peak_index = 0;
    /// peak_index - correlator_len + 1.
    std::int64_t preamble_start = 0;
    StageTrace stage_trace;
    PayloadParams payload;

    bool operator==(const DetectionEvent&) const = default;
};

/// One correlator evaluation, reported to an observer.
struct CorrelatorSample {
    std::size_t profile_index = 0;
    std::int64_t index = 0;
    CorrelatorOutput output;
    /// Configuration generation the output was computed under (0 = initial).
    std::uint64_t generation = 0;
};

/// Energy -> (coarse) -> fine -> arbitration over a set of standards, one sample
/// at a time. Single owner; submit() alone may be called from another thread.
class DetectorBank {
public:
    struct ProfileStats {
        std::uint64_t work_count = 0;
        std::uint64_t crossings = 0;
        std::optional<std::int32_t> max_re;
    };

    /// Throws ConfigError.
    DetectorBank(std::vector<StandardProfile> profiles, const RegisterMap& regs, std::int64_t origin_index = 0);

    /// Validates and queues a complete register snapshot; it replaces the
    /// running configuration at the next sample boundary. Throws ConfigError.
    void submit(const RegisterMap& regs);

    /// Processes one sample; returns events whose arbitration window closed.
    std::vector<DetectionEvent> push(IqSample sample);
    /// Arbitrates any open cluster.
    std::vector<DetectionEvent> finish();

    void set_observer(std::function<void(const CorrelatorSample&)> observer) { observer_ = std::move(observer); }

    const std::vector<StandardProfile>& profiles() const { return profiles_; }
    const std::vector<ProfileStats>& stats() const { return stats_; }
    std::uint64_t generation() const { return generation_; }
    std::int64_t next_index() const { return next_index_; }
    /// Whether the fine stage was enabled for the most recent sample.
    bool fine_enabled() const { return fine_enabled_; }

private:
    void apply(ResolvedConfig cfg);
    DetectionEvent make_event(const Candidate& winner) const;
    void close_cluster(std::vector<DetectionEvent>& events);

    std::vector<StandardProfile> profiles_;
    ResolvedConfig cfg_;
    std::uint64_t generation_ = 0;

    std::mutex pending_mutex_;
    std::optional<ResolvedConfig> pending_;
    std::atomic<bool> has_pending_{false};

    std::optional<EnergyDetector> energy_;
    std::optional<SchmidlCoxTracker> coarse_;
    std::vector<StreamCorrelator> correlators_;
    std::vector<ProfileStats> stats_;
    std::function<void(const CorrelatorSample&)> observer_;

    std::int64_t next_index_ = 0;
    std::size_t coarse_run_ = 0;
    std::optional<std::int64_t> coarse_armed_at_;
    std::size_t since_energy_ = 0;
    std::optional<std::int64_t> episode_start_;
    std::size_t since_gate_ = 0;
    bool fine_enabled_ = false;

    std::vector<Candidate> cluster_;
    std::int64_t cluster_anchor_ = 0;
};

/// Runs a fresh detector bank over a whole stream. Throws ConfigError before
/// any sample is processed if the registers do not match the profiles.
std::vector<DetectionEvent> run_detector_bank(const SampleStream& stream, std::span<const StandardProfile> profiles,
                                              const RegisterMap& regs);

} // namespace pktdet
