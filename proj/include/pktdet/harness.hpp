#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pktdet/config_file.hpp"
#include "pktdet/signal.hpp"
#include "pktdet/standards.hpp"

namespace pktdet {

struct SweepConfig {
    std::vector<StandardProfile> profiles;
    std::string transmitted_profile_id;
    std::vector<double> snr_points_db;
    std::size_t trials_per_point = 300;
    std::uint64_t seed = 1;
    /// pad_before is drawn uniformly from [pad_min, pad_max] for every trial.
    std::size_t pad_min = 64;
    std::size_t pad_max = 256;
    std::size_t pad_after = 128;
    /// Random QPSK samples following the preamble.
    std::size_t payload_len = 0;
    FixedPointFormat format = kQ1_15;
    /// Scale applied to the preamble and payload before noise and quantization.
    double amplitude = 0.25;
    DetectorOptions detector;
    /// Worker threads for run_sweep; 0 picks the hardware concurrency.
    unsigned threads = 1;

    /// Throws std::invalid_argument.
    void validate() const;
    const StandardProfile& transmitted() const;
};

enum class Outcome { correct, missed, false_standard };

std::string_view to_string(Outcome o);

struct TrialOutcome {
    Outcome outcome = Outcome::missed;
    /// Standard of the first detection event, if any.
    std::optional<std::string> winner_id;
    std::optional<std::int64_t> peak_index;
    std::size_t preamble_start = 0;
    /// Largest correlator output seen per profile (unset if never evaluated).
    std::vector<std::optional<std::int32_t>> max_re;
    std::size_t event_count = 0;
};

/// Seed for one trial, derived from (seed, snr_index, trial_index) only.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t trial_index);

/// Builds the signal (embed, AWGN, quantize), runs the detector bank, and
/// classifies the first event. Deterministic per trial_seed.
TrialOutcome run_trial(const SweepConfig& cfg, double snr_db, std::uint64_t trial_seed);

struct TrialRecord {
    std::size_t snr_index = 0;
    double snr_db = 0.0;
    std::size_t trial_index = 0;
    TrialOutcome outcome;
};

struct SweepRow {
    double snr_db = 0.0;
    std::size_t trials = 0;
    std::size_t correct = 0;
    std::size_t missed = 0;
    std::size_t false_standard = 0;
    double probability = 0.0;
    /// 95% Wilson score interval for the probability.
    double ci_low = 0.0;
    double ci_high = 0.0;

    double ci_half_width() const { return 0.5 * (ci_high - ci_low); }
};

struct SweepResult {
    std::vector<SweepRow> rows;
    /// Every trial, ordered by (snr_index, trial_index).
    std::vector<TrialRecord> trials;
};

/// 95% Wilson score interval for `successes` out of `trials`.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials);

SweepRow aggregate_row(double snr_db, std::span<const TrialRecord> records);

/// Runs every SNR point x trial. Serial and parallel runs give identical results.
SweepResult run_sweep(const SweepConfig& cfg);

void write_sweep_csv(std::ostream& out, const SweepResult& result);

struct ScopeTrace {
    std::vector<std::string> profile_ids;
    /// Ungated correlator `re` per profile and sample; unset until the window fills.
    std::vector<std::vector<std::optional<std::int32_t>>> re;
    /// Fine-stage enable as seen by the detector bank.
    std::vector<bool> gate;
    std::size_t preamble_start = 0;
    std::vector<DetectionEvent> events;
    /// The received samples the traces were computed from.
    SampleStream stream;
};

/// One capture at `snr_db`: the transmitted preamble embedded in noise, with
/// every profile's correlator output over the whole stream.
ScopeTrace run_scope_scenario(const SweepConfig& cfg, double snr_db, std::uint64_t seed);

void write_scope_csv(std::ostream& out, const ScopeTrace& trace);

/// Three random complex PN standards: "pn32" (32 samples, threshold 50),
/// "pn64a" and "pn64b" (64 samples, threshold 100).
std::vector<StandardProfile> make_reference_profiles(std::uint64_t seed);

/// Reference profiles, SNR -10..14 dB in 2 dB steps, 300 trials per point.
SweepConfig make_reference_sweep(std::string transmitted_id, std::uint64_t seed);

/// Expands "snr_db" given as a list or as {"start", "stop", "step"}.
std::vector<double> parse_snr_grid(const nlohmann::json& value);

/// Sweep configuration from JSON; unspecified fields keep make_reference_sweep defaults.
SweepConfig parse_sweep_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

} // namespace pktdet
