#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pktdet/coarse.hpp"
#include "pktdet/signal.hpp"
#include "pktdet/standards.hpp"

namespace pktdet {

class ConfigFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Detector stage options in full-scale units, independent of the sample format.
struct DetectorOptions {
    std::size_t energy_window = 16;
    /// Per-sample |y|^2 threshold, full-scale units.
    double energy_sample_thresh = 0.015625;
    std::size_t energy_count_thresh = 8;
    bool energy_bypass = false;
    std::optional<bool> rssi;
    std::optional<CoarseConfig> coarse;
    std::optional<std::size_t> hold_off;
    std::optional<std::size_t> arbitration_window;

    DetectorSettings resolve(const FixedPointFormat& format) const;
};

/// Reads a preamble from text: one complex value per line as "re im" or
/// "re,im"; '#' starts a comment.
Preamble parse_preamble_text(std::string id, std::string_view text);
Preamble read_preamble_file(std::string id, const std::filesystem::path& path);

/// Profiles from a JSON array. Each entry has "id", "threshold", optional
/// "packet_len" / "symbol_size" / "training_period", and exactly one preamble
/// source: "pn": {"seed", "length"}, "preamble_file", or "coeff_file".
/// Relative paths resolve against `base_dir`.
std::vector<StandardProfile> parse_profiles(const nlohmann::json& array, const std::filesystem::path& base_dir);

/// Reads {"energy_window", "energy_sample_thresh", "energy_count_thresh",
/// "energy_bypass", "rssi", "coarse": {"lag", "threshold", "plateau"},
/// "hold_off", "arbitration_window"} on top of `defaults`.
DetectorOptions parse_detector_options(const nlohmann::json& obj, DetectorOptions defaults = {});

struct ProfileFile {
    std::vector<StandardProfile> profiles;
    DetectorOptions detector;
};

/// {"profiles": [...], "detector": {...}}
ProfileFile load_profile_file(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

} // namespace pktdet
