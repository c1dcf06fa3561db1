#include "pktdet/config_file.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pktdet/coeff_file.hpp"

namespace pktdet {

using nlohmann::json;

namespace {

std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigFileError(std::string("bad value for '") + key + "': " + e.what());
    }
}

Preamble preamble_from_bank(std::string id, const CoefficientBank& bank) {
    const double a = 1.0 / std::sqrt(2.0);
    std::vector<Complex> samples;
    for (const auto& s : bank.unpack()) {
        samples.emplace_back(s.si * a, s.sq * a);
    }
    return Preamble(std::move(id), std::move(samples));
}

} // namespace

DetectorSettings DetectorOptions::resolve(const FixedPointFormat& format) const {
    DetectorSettings s;
    s.energy.window_len = energy_window;
    s.energy.sample_energy_threshold = energy_threshold_from_power(energy_sample_thresh, format);
    s.energy.count_threshold = energy_count_thresh;
    s.energy.rssi_gate = rssi;
    s.energy_bypass = energy_bypass;
    s.coarse = coarse;
    s.hold_off = hold_off;
    s.arbitration_window = arbitration_window;
    return s;
}

Preamble parse_preamble_text(std::string id, std::string_view text) {
    std::vector<Complex> samples;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.resize(hash);
        }
        for (auto& c : line) {
            if (c == ',') {
                c = ' ';
            }
        }
        std::istringstream fields(line);
        double re = 0.0;
        double im = 0.0;
        if (!(fields >> re)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                continue;
            }
            throw ConfigFileError("preamble line " + std::to_string(line_no) + ": expected 're im'");
        }
        if (!(fields >> im)) {
            throw ConfigFileError("preamble line " + std::to_string(line_no) + ": missing imaginary part");
        }
        std::string extra;
        if (fields >> extra) {
            throw ConfigFileError("preamble line " + std::to_string(line_no) + ": trailing text");
        }
        samples.emplace_back(re, im);
    }
    try {
        return Preamble(std::move(id), std::move(samples));
    } catch (const std::invalid_argument& e) {
        throw ConfigFileError(e.what());
    }
}

Preamble read_preamble_file(std::string id, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigFileError("cannot open preamble file " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_preamble_text(std::move(id), ss.str());
}

std::vector<StandardProfile> parse_profiles(const json& array, const std::filesystem::path& base_dir) {
    if (!array.is_array() || array.empty()) {
        throw ConfigFileError("'profiles' must be a non-empty array");
    }
    std::vector<StandardProfile> out;
    for (const auto& entry : array) {
        if (!entry.is_object()) {
            throw ConfigFileError("each profile must be an object");
        }
        const auto id = get_or<std::string>(entry, "id", "");
        if (id.empty()) {
            throw ConfigFileError("profile without an 'id'");
        }
        const int sources = static_cast<int>(entry.contains("pn")) + static_cast<int>(entry.contains("preamble_file")) +
                            static_cast<int>(entry.contains("coeff_file"));
        if (sources != 1) {
            throw ConfigFileError("profile '" + id + "' needs exactly one of 'pn', 'preamble_file', 'coeff_file'");
        }
        std::optional<Preamble> preamble;
        try {
            if (entry.contains("pn")) {
                const auto& pn = entry.at("pn");
                const auto length = get_or<std::size_t>(pn, "length", 0);
                const auto seed = get_or<std::uint64_t>(pn, "seed", 0);
                preamble = make_pn_preamble(id, length, seed);
            } else if (entry.contains("preamble_file")) {
                preamble = read_preamble_file(id, resolve_path(base_dir, entry.at("preamble_file").get<std::string>()));
            } else {
                const auto bank =
                    read_coefficient_file(resolve_path(base_dir, entry.at("coeff_file").get<std::string>()));
                preamble = preamble_from_bank(id, bank);
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigFileError("profile '" + id + "': " + e.what());
        } catch (const CoeffFormatError& e) {
            throw ConfigFileError("profile '" + id + "': " + e.what());
        }
        StandardProfile p{id, std::move(*preamble), get_or<std::int32_t>(entry, "threshold", 0), {}};
        p.payload.packet_len = get_or<std::uint32_t>(entry, "packet_len", 0);
        p.payload.symbol_size = get_or<std::uint32_t>(entry, "symbol_size", 0);
        p.payload.training_period = get_or<std::uint32_t>(entry, "training_period", 0);
        try {
            p.validate();
        } catch (const ConfigError& e) {
            throw ConfigFileError(e.what());
        }
        out.push_back(std::move(p));
    }
    return out;
}

DetectorOptions parse_detector_options(const json& obj, DetectorOptions d) {
    if (!obj.is_object()) {
        throw ConfigFileError("'detector' must be an object");
    }
    d.energy_window = get_or(obj, "energy_window", d.energy_window);
    d.energy_sample_thresh = get_or(obj, "energy_sample_thresh", d.energy_sample_thresh);
    d.energy_count_thresh = get_or(obj, "energy_count_thresh", d.energy_count_thresh);
    d.energy_bypass = get_or(obj, "energy_bypass", d.energy_bypass);
    if (obj.contains("rssi")) {
        d.rssi = get_or(obj, "rssi", false);
    }
    if (obj.contains("coarse")) {
        const auto& c = obj.at("coarse");
        if (c.is_null() || (c.is_boolean() && !c.get<bool>())) {
            d.coarse.reset();
        } else {
            CoarseConfig cc = d.coarse.value_or(CoarseConfig{});
            if (c.is_object()) {
                cc.half_period = get_or(c, "lag", cc.half_period);
                cc.metric_threshold = get_or(c, "threshold", cc.metric_threshold);
                cc.plateau_min = get_or(c, "plateau", cc.plateau_min);
            }
            d.coarse = cc;
        }
    }
    if (obj.contains("hold_off")) {
        d.hold_off = get_or<std::size_t>(obj, "hold_off", 0);
    }
    if (obj.contains("arbitration_window")) {
        d.arbitration_window = get_or<std::size_t>(obj, "arbitration_window", 0);
    }
    return d;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigFileError("cannot open " + path.string());
    }
    try {
        return json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigFileError(path.string() + ": " + e.what());
    }
}

ProfileFile load_profile_file(const std::filesystem::path& path) {
    const auto doc = read_json_file(path);
    if (!doc.is_object() || !doc.contains("profiles")) {
        throw ConfigFileError(path.string() + ": expected an object with a 'profiles' array");
    }
    ProfileFile pf;
    pf.profiles = parse_profiles(doc.at("profiles"), path.parent_path());
    if (doc.contains("detector")) {
        pf.detector = parse_detector_options(doc.at("detector"));
    }
    return pf;
}

} // namespace pktdet
