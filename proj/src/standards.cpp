#include "pktdet/standards.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pktdet {

namespace {

constexpr std::uint32_t kQ16One = 65536;

std::uint32_t to_register(std::uint64_t value, std::string_view what) {
    if (value > std::numeric_limits<std::uint32_t>::max()) {
        throw ConfigError(std::string(what) + " does not fit a 32-bit register");
    }
    return static_cast<std::uint32_t>(value);
}

std::size_t longest_length(std::span<const StandardProfile> profiles) {
    std::size_t longest = 0;
    for (const auto& p : profiles) {
        longest = std::max(longest, p.correlator_len());
    }
    return longest;
}

} // namespace

void StandardProfile::validate() const {
    if (id.empty()) {
        throw ConfigError("standard profile needs an id");
    }
    const auto max_peak = 2 * static_cast<std::int64_t>(correlator_len());
    if (fine_threshold <= 0 || fine_threshold > max_peak) {
        throw ConfigError("profile '" + id + "': fine_threshold must be in (0, " + std::to_string(max_peak) + "]");
    }
}

std::string standard_key(std::size_t standard, std::string_view field) {
    return "std" + std::to_string(standard) + "." + std::string(field);
}

std::string coefficient_key(std::size_t standard, char component, std::size_t word) {
    return "std" + std::to_string(standard) + ".coeff_" + component + "." + std::to_string(word);
}

RegisterMap RegisterMap::build(std::span<const StandardProfile> profiles, const DetectorSettings& settings) {
    if (profiles.empty()) {
        throw ConfigError("detector bank needs at least one standard profile");
    }
    try {
        settings.energy.validate();
        if (settings.coarse) {
            settings.coarse->validate();
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const std::size_t longest = longest_length(profiles);

    RegisterMap map;
    auto& r = map.regs_;
    r["energy.window"] = to_register(settings.energy.window_len, "energy window");
    r["energy.sample_thresh"] = to_register(settings.energy.sample_energy_threshold, "energy sample threshold");
    r["energy.count_thresh"] = to_register(settings.energy.count_threshold, "energy count threshold");
    r["energy.rssi_enable"] = settings.energy.rssi_gate.has_value() ? 1 : 0;
    r["energy.rssi"] = settings.energy.rssi_gate.value_or(false) ? 1 : 0;
    r["energy.bypass"] = settings.energy_bypass ? 1 : 0;

    const CoarseConfig coarse = settings.coarse.value_or(CoarseConfig{});
    r["coarse.enable"] = settings.coarse.has_value() ? 1 : 0;
    r["coarse.lag"] = to_register(coarse.half_period, "coarse lag");
    r["coarse.thresh_q16"] = static_cast<std::uint32_t>(std::lround(coarse.metric_threshold * kQ16One));
    r["coarse.plateau"] = to_register(coarse.plateau_min, "coarse plateau");

    r["fine.hold_off"] = to_register(settings.hold_off.value_or(2 * longest), "hold-off");
    r["arbiter.window"] = to_register(settings.arbitration_window.value_or(longest), "arbitration window");

    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto& p = profiles[k];
        p.validate();
        for (std::size_t j = 0; j < k; ++j) {
            if (profiles[j].id == p.id) {
                throw ConfigError("duplicate profile id '" + p.id + "'");
            }
        }
        r[standard_key(k, "enable")] = 1;
        r[standard_key(k, "length")] = static_cast<std::uint32_t>(p.correlator_len());
        r[standard_key(k, "threshold")] = static_cast<std::uint32_t>(p.fine_threshold);
        r[standard_key(k, "priority")] = static_cast<std::uint32_t>(k);
        r[standard_key(k, "packet_len")] = p.payload.packet_len;
        r[standard_key(k, "symbol_size")] = p.payload.symbol_size;
        r[standard_key(k, "training_period")] = p.payload.training_period;
        const auto bank = load_coefficients(p.preamble);
        for (std::size_t w = 0; w < bank.word_count(); ++w) {
            r[coefficient_key(k, 'i', w)] = bank.i_words()[w];
            r[coefficient_key(k, 'q', w)] = bank.q_words()[w];
        }
    }
    return map;
}

std::uint32_t RegisterMap::read(std::string_view key) const {
    const auto it = regs_.find(key);
    if (it == regs_.end()) {
        throw ConfigError("unknown register '" + std::string(key) + "'");
    }
    return it->second;
}

void RegisterMap::write(std::string_view key, std::uint32_t value) {
    const auto it = regs_.find(key);
    if (it == regs_.end()) {
        throw ConfigError("unknown register '" + std::string(key) + "'");
    }
    it->second = value;
}

bool RegisterMap::contains(std::string_view key) const { return regs_.find(key) != regs_.end(); }

std::vector<std::string> RegisterMap::keys() const {
    std::vector<std::string> out;
    out.reserve(regs_.size());
    for (const auto& [k, v] : regs_) {
        out.push_back(k);
    }
    return out;
}

RegisterMap write_register(RegisterMap regs, std::string_view key, std::uint32_t value) {
    regs.write(key, value);
    return regs;
}

ResolvedConfig resolve_registers(const RegisterMap& regs, std::span<const StandardProfile> profiles) {
    if (profiles.empty()) {
        throw ConfigError("detector bank needs at least one standard profile");
    }
    if (regs.contains(standard_key(profiles.size(), "length"))) {
        throw ConfigError("register map describes more standards than the " + std::to_string(profiles.size()) +
                          " supplied profiles");
    }
    ResolvedConfig cfg;
    cfg.energy.window_len = regs.read("energy.window");
    cfg.energy.sample_energy_threshold = regs.read("energy.sample_thresh");
    cfg.energy.count_threshold = regs.read("energy.count_thresh");
    if (regs.read("energy.rssi_enable") != 0) {
        cfg.energy.rssi_gate = regs.read("energy.rssi") != 0;
    }
    cfg.energy_bypass = regs.read("energy.bypass") != 0;
    if (regs.read("coarse.enable") != 0) {
        CoarseConfig c;
        c.half_period = regs.read("coarse.lag");
        const auto q16 = regs.read("coarse.thresh_q16");
        if (q16 > kQ16One) {
            throw ConfigError("coarse.thresh_q16 exceeds 1.0");
        }
        c.metric_threshold = static_cast<double>(q16) / kQ16One;
        c.plateau_min = regs.read("coarse.plateau");
        cfg.coarse = c;
    }
    try {
        cfg.energy.validate();
        if (cfg.coarse) {
            cfg.coarse->validate();
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    cfg.hold_off = regs.read("fine.hold_off");
    cfg.arbitration_window = regs.read("arbiter.window");

    for (std::size_t k = 0; k < profiles.size(); ++k) {
        const auto& p = profiles[k];
        if (!regs.contains(standard_key(k, "length"))) {
            throw ConfigError("register map has no standard " + std::to_string(k) + " for profile '" + p.id + "'");
        }
        const std::size_t length = regs.read(standard_key(k, "length"));
        if (length != p.correlator_len()) {
            throw ConfigError("profile '" + p.id + "': length register " + std::to_string(length) +
                              " does not match preamble length " + std::to_string(p.correlator_len()));
        }
        const std::size_t words = (length + 31) / 32;
        if (regs.contains(coefficient_key(k, 'i', words)) || regs.contains(coefficient_key(k, 'q', words))) {
            throw ConfigError("profile '" + p.id + "': more coefficient words than its length needs");
        }
        std::vector<std::uint32_t> i_words;
        std::vector<std::uint32_t> q_words;
        for (std::size_t w = 0; w < words; ++w) {
            if (!regs.contains(coefficient_key(k, 'i', w)) || !regs.contains(coefficient_key(k, 'q', w))) {
                throw ConfigError("profile '" + p.id + "': missing coefficient word " + std::to_string(w));
            }
            i_words.push_back(regs.read(coefficient_key(k, 'i', w)));
            q_words.push_back(regs.read(coefficient_key(k, 'q', w)));
        }
        ResolvedStandard s;
        try {
            s.bank = std::make_shared<const CoefficientBank>(
                CoefficientBank::from_words(length, std::move(i_words), std::move(q_words)));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("profile '" + p.id + "': " + e.what());
        }
        s.enabled = regs.read(standard_key(k, "enable")) != 0;
        s.threshold = static_cast<std::int32_t>(regs.read(standard_key(k, "threshold")));
        if (s.threshold <= 0 || s.threshold > 2 * static_cast<std::int64_t>(length)) {
            throw ConfigError("profile '" + p.id + "': threshold " + std::to_string(s.threshold) +
                              " outside (0, " + std::to_string(2 * length) + "]");
        }
        s.priority = regs.read(standard_key(k, "priority"));
        s.payload.packet_len = regs.read(standard_key(k, "packet_len"));
        s.payload.symbol_size = regs.read(standard_key(k, "symbol_size"));
        s.payload.training_period = regs.read(standard_key(k, "training_period"));
        cfg.standards.push_back(std::move(s));
    }
    return cfg;
}

bool outranks(const Candidate& a, const Candidate& b) {
    if (a.correlator_len != b.correlator_len) {
        return a.correlator_len > b.correlator_len;
    }
    if (a.peak_value != b.peak_value) {
        return a.peak_value > b.peak_value;
    }
    if (a.peak_index != b.peak_index) {
        return a.peak_index < b.peak_index;
    }
    if (a.priority != b.priority) {
        return a.priority < b.priority;
    }
    return a.profile_index < b.profile_index;
}

Candidate arbitrate(std::span<const Candidate> candidates) {
    if (candidates.empty()) {
        throw std::invalid_argument("arbitrate: no candidates");
    }
    return *std::min_element(candidates.begin(), candidates.end(),
                             [](const Candidate& a, const Candidate& b) { return outranks(a, b); });
}

} // namespace pktdet
