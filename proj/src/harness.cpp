#include "pktdet/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

namespace pktdet {

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (std::uint64_t{out[0]} << 32) | out[1];
}

struct TrialSignal {
    SampleStream stream;
    std::size_t preamble_start = 0;
};

TrialSignal make_trial_signal(const SweepConfig& cfg, double snr_db, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pad_dist(cfg.pad_min, cfg.pad_max);
    const std::size_t pad_before = pad_dist(rng);

    const auto& tx = cfg.transmitted().preamble;
    std::vector<Complex> scaled;
    scaled.reserve(tx.length());
    for (const auto& v : tx.samples()) {
        scaled.push_back(v * cfg.amplitude);
    }
    const double preamble_power = mean_power(scaled);

    std::vector<Complex> payload;
    payload.reserve(cfg.payload_len);
    const double a = cfg.amplitude / std::sqrt(2.0);
    for (std::size_t k = 0; k < cfg.payload_len; ++k) {
        const auto bits = rng();
        payload.emplace_back((bits & 1U) ? a : -a, (bits & 2U) ? a : -a);
    }

    const auto embedded = embed_preamble(Preamble(tx.id(), std::move(scaled)), pad_before, cfg.pad_after, payload);
    const auto noisy = add_awgn(embedded.samples, snr_db, rng(), preamble_power);
    return {quantize(noisy, cfg.format), embedded.preamble_start};
}

TrialOutcome run_trial_with(const SweepConfig& cfg, const RegisterMap& regs, double snr_db, std::uint64_t seed) {
    const auto signal = make_trial_signal(cfg, snr_db, seed);
    DetectorBank bank(cfg.profiles, regs, signal.stream.origin_index());
    std::vector<DetectionEvent> events;
    for (const auto& s : signal.stream.samples()) {
        auto out = bank.push(s);
        events.insert(events.end(), out.begin(), out.end());
    }
    auto tail = bank.finish();
    events.insert(events.end(), tail.begin(), tail.end());

    TrialOutcome t;
    t.preamble_start = signal.preamble_start;
    t.event_count = events.size();
    for (const auto& st : bank.stats()) {
        t.max_re.push_back(st.max_re);
    }
    if (events.empty()) {
        t.outcome = Outcome::missed;
        return t;
    }
    const auto& first = events.front();
    t.winner_id = first.standard_id;
    t.peak_index = first.peak_index;
    t.outcome = first.standard_id == cfg.transmitted_profile_id ? Outcome::correct : Outcome::false_standard;
    return t;
}

std::string format_double(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

} // namespace

void SweepConfig::validate() const {
    if (profiles.empty()) {
        throw std::invalid_argument("sweep needs at least one profile");
    }
    if (trials_per_point < 1) {
        throw std::invalid_argument("trials_per_point must be >= 1");
    }
    if (pad_min > pad_max) {
        throw std::invalid_argument("pad_min must not exceed pad_max");
    }
    if (!(amplitude > 0.0)) {
        throw std::invalid_argument("amplitude must be positive");
    }
    format.validate();
    (void)transmitted();
}

const StandardProfile& SweepConfig::transmitted() const {
    const auto it = std::find_if(profiles.begin(), profiles.end(),
                                 [&](const StandardProfile& p) { return p.id == transmitted_profile_id; });
    if (it == profiles.end()) {
        throw std::invalid_argument("transmitted profile '" + transmitted_profile_id + "' is not in the profile set");
    }
    return *it;
}

std::string_view to_string(Outcome o) {
    switch (o) {
    case Outcome::correct:
        return "correct";
    case Outcome::missed:
        return "missed";
    case Outcome::false_standard:
        return "false_standard";
    }
    return "unknown";
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t snr_index, std::size_t trial_index) {
    return derive_seed(seed, snr_index + 1, trial_index);
}

TrialOutcome run_trial(const SweepConfig& cfg, double snr_db, std::uint64_t seed) {
    cfg.validate();
    const auto regs = RegisterMap::build(cfg.profiles, cfg.detector.resolve(cfg.format));
    return run_trial_with(cfg, regs, snr_db, seed);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials) {
    if (trials == 0) {
        return {0.0, 1.0};
    }
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (p + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / denom;
    const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

SweepRow aggregate_row(double snr_db, std::span<const TrialRecord> records) {
    SweepRow row;
    row.snr_db = snr_db;
    row.trials = records.size();
    for (const auto& r : records) {
        switch (r.outcome.outcome) {
        case Outcome::correct:
            ++row.correct;
            break;
        case Outcome::missed:
            ++row.missed;
            break;
        case Outcome::false_standard:
            ++row.false_standard;
            break;
        }
    }
    row.probability = row.trials == 0 ? 0.0 : static_cast<double>(row.correct) / static_cast<double>(row.trials);
    std::tie(row.ci_low, row.ci_high) = wilson_interval(row.correct, row.trials);
    return row;
}

SweepResult run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const auto regs = RegisterMap::build(cfg.profiles, cfg.detector.resolve(cfg.format));

    const std::size_t points = cfg.snr_points_db.size();
    const std::size_t total = points * cfg.trials_per_point;
    SweepResult result;
    result.trials.resize(total);

    auto run_one = [&](std::size_t task) {
        const std::size_t snr_index = task / cfg.trials_per_point;
        const std::size_t trial = task % cfg.trials_per_point;
        const double snr = cfg.snr_points_db[snr_index];
        auto& rec = result.trials[task];
        rec.snr_index = snr_index;
        rec.snr_db = snr;
        rec.trial_index = trial;
        rec.outcome = run_trial_with(cfg, regs, snr, trial_seed(cfg.seed, snr_index, trial));
    };

    unsigned threads = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
    if (threads <= 1) {
        for (std::size_t task = 0; task < total; ++task) {
            run_one(task);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> workers;
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&] {
                for (std::size_t task = next++; task < total; task = next++) {
                    run_one(task);
                }
            });
        }
    }

    for (std::size_t p = 0; p < points; ++p) {
        const std::span<const TrialRecord> slice(result.trials.data() + p * cfg.trials_per_point,
                                                 cfg.trials_per_point);
        result.rows.push_back(aggregate_row(cfg.snr_points_db[p], slice));
    }
    return result;
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    out << "snr_db,trials,correct,missed,false_standard,probability,ci_low,ci_high,ci_half_width\n";
    for (const auto& r : result.rows) {
        out << format_double(r.snr_db, "%.3f") << ',' << r.trials << ',' << r.correct << ',' << r.missed << ','
            << r.false_standard << ',' << format_double(r.probability, "%.6f") << ','
            << format_double(r.ci_low, "%.6f") << ',' << format_double(r.ci_high, "%.6f") << ','
            << format_double(r.ci_half_width(), "%.6f") << '\n';
    }
}

ScopeTrace run_scope_scenario(const SweepConfig& cfg, double snr_db, std::uint64_t seed) {
    cfg.validate();
    const auto regs = RegisterMap::build(cfg.profiles, cfg.detector.resolve(cfg.format));
    const auto signal = make_trial_signal(cfg, snr_db, seed);
    const auto& stream = signal.stream;

    ScopeTrace trace;
    trace.preamble_start = signal.preamble_start;
    std::vector<StreamCorrelator> free_running;
    for (const auto& p : cfg.profiles) {
        trace.profile_ids.push_back(p.id);
        free_running.emplace_back(std::make_shared<const CoefficientBank>(load_coefficients(p.preamble)));
        trace.re.emplace_back();
        trace.re.back().reserve(stream.size());
    }

    DetectorBank bank(cfg.profiles, regs, stream.origin_index());
    trace.gate.reserve(stream.size());
    for (const auto& s : stream.samples()) {
        auto ev = bank.push(s);
        trace.events.insert(trace.events.end(), ev.begin(), ev.end());
        trace.gate.push_back(bank.fine_enabled());
        for (std::size_t k = 0; k < free_running.size(); ++k) {
            const auto out = free_running[k].push(s, true);
            trace.re[k].push_back(out ? std::optional<std::int32_t>(out->re) : std::nullopt);
        }
    }
    auto tail = bank.finish();
    trace.events.insert(trace.events.end(), tail.begin(), tail.end());
    trace.stream = stream;
    return trace;
}

void write_scope_csv(std::ostream& out, const ScopeTrace& trace) {
    out << "index,gate";
    for (const auto& id : trace.profile_ids) {
        out << ',' << id;
    }
    out << '\n';
    for (std::size_t k = 0; k < trace.gate.size(); ++k) {
        out << k << ',' << (trace.gate[k] ? 1 : 0);
        for (const auto& series : trace.re) {
            out << ',';
            if (series[k]) {
                out << *series[k];
            }
        }
        out << '\n';
    }
}

std::vector<StandardProfile> make_reference_profiles(std::uint64_t seed) {
    std::vector<StandardProfile> out;
    out.push_back({"pn32", make_pn_preamble("pn32", 32, derive_seed(seed, 0, 32)), 50, {}});
    out.push_back({"pn64a", make_pn_preamble("pn64a", 64, derive_seed(seed, 1, 64)), 100, {}});
    out.push_back({"pn64b", make_pn_preamble("pn64b", 64, derive_seed(seed, 2, 64)), 100, {}});
    return out;
}

SweepConfig make_reference_sweep(std::string transmitted_id, std::uint64_t seed) {
    SweepConfig cfg;
    cfg.profiles = make_reference_profiles(seed);
    cfg.transmitted_profile_id = std::move(transmitted_id);
    for (int snr = -10; snr <= 14; snr += 2) {
        cfg.snr_points_db.push_back(snr);
    }
    cfg.trials_per_point = 300;
    cfg.seed = seed;
    return cfg;
}

std::vector<double> parse_snr_grid(const nlohmann::json& value) {
    std::vector<double> grid;
    if (value.is_array()) {
        for (const auto& v : value) {
            grid.push_back(v.get<double>());
        }
    } else if (value.is_object()) {
        const double start = value.at("start").get<double>();
        const double stop = value.at("stop").get<double>();
        const double step = value.at("step").get<double>();
        if (!(step > 0.0) || stop < start) {
            throw ConfigFileError("snr_db range needs step > 0 and stop >= start");
        }
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::size_t k = 0; k < count; ++k) {
            grid.push_back(start + static_cast<double>(k) * step);
        }
    } else {
        grid.push_back(value.get<double>());
    }
    if (grid.empty()) {
        throw ConfigFileError("empty SNR grid");
    }
    return grid;
}

SweepConfig parse_sweep_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) {
        throw ConfigFileError("sweep config must be a JSON object");
    }
    try {
        const auto seed = doc.value("seed", std::uint64_t{1});
        SweepConfig cfg = make_reference_sweep(doc.value("transmit", std::string("pn64a")), seed);
        if (doc.contains("profiles")) {
            cfg.profiles = parse_profiles(doc.at("profiles"), base_dir);
        }
        if (doc.contains("snr_db")) {
            cfg.snr_points_db = parse_snr_grid(doc.at("snr_db"));
        }
        cfg.trials_per_point = doc.value("trials", cfg.trials_per_point);
        cfg.pad_min = doc.value("pad_min", cfg.pad_min);
        cfg.pad_max = doc.value("pad_max", cfg.pad_max);
        cfg.pad_after = doc.value("pad_after", cfg.pad_after);
        cfg.payload_len = doc.value("payload_len", cfg.payload_len);
        cfg.amplitude = doc.value("amplitude", cfg.amplitude);
        cfg.threads = doc.value("threads", cfg.threads);
        if (doc.contains("format")) {
            cfg.format = parse_format(doc.at("format").get<std::string>());
        }
        if (doc.contains("detector")) {
            cfg.detector = parse_detector_options(doc.at("detector"), cfg.detector);
        }
        cfg.validate();
        return cfg;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigFileError(std::string("sweep config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigFileError(std::string("sweep config: ") + e.what());
    }
}

} // namespace pktdet
