// pktdet: command-line front end for the packet detector model.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pktdet/coeff_file.hpp"
#include "pktdet/config_file.hpp"
#include "pktdet/harness.hpp"
#include "pktdet/iq_file.hpp"
#include "pktdet/standards.hpp"

using namespace pktdet;

namespace {

struct DetectorFlags {
    std::optional<std::size_t> energy_window;
    std::optional<double> energy_sample_thresh;
    std::optional<std::size_t> energy_count_thresh;
    bool energy_bypass = false;
    bool coarse = false;
    bool no_coarse = false;
    std::optional<std::size_t> coarse_lag;
    std::optional<double> coarse_thresh;
    std::optional<std::size_t> coarse_plateau;
    std::optional<std::size_t> hold_off;

    void attach(CLI::App* app) {
        app->add_option("--energy-window", energy_window, "Energy detector window length (samples)");
        app->add_option("--energy-sample-thresh", energy_sample_thresh,
                        "Per-sample |y|^2 threshold in full-scale units");
        app->add_option("--energy-count-thresh", energy_count_thresh,
                        "Gate opens when more than this many window samples exceed the threshold");
        app->add_flag("--energy-bypass", energy_bypass, "Keep the correlators enabled on every sample");
        app->add_flag("--coarse", coarse, "Enable the Schmidl-Cox coarse stage");
        app->add_flag("--no-coarse", no_coarse, "Disable the coarse stage (default)");
        app->add_option("--coarse-lag", coarse_lag, "Schmidl-Cox repetition lag L");
        app->add_option("--coarse-thresh", coarse_thresh, "Schmidl-Cox metric threshold in [0, 1]");
        app->add_option("--coarse-plateau", coarse_plateau, "Consecutive samples above threshold to trigger");
        app->add_option("--hold-off", hold_off, "Samples the fine stage stays enabled after the gate drops");
    }

    DetectorOptions apply(DetectorOptions d) const {
        if (energy_window) d.energy_window = *energy_window;
        if (energy_sample_thresh) d.energy_sample_thresh = *energy_sample_thresh;
        if (energy_count_thresh) d.energy_count_thresh = *energy_count_thresh;
        if (energy_bypass) d.energy_bypass = true;
        if (coarse || coarse_lag || coarse_thresh || coarse_plateau) {
            CoarseConfig c = d.coarse.value_or(CoarseConfig{});
            if (coarse_lag) c.half_period = *coarse_lag;
            if (coarse_thresh) c.metric_threshold = *coarse_thresh;
            if (coarse_plateau) c.plateau_min = *coarse_plateau;
            d.coarse = c;
        }
        if (no_coarse) d.coarse.reset();
        if (hold_off) d.hold_off = *hold_off;
        return d;
    }
};

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_.open(path, std::ios::binary);
            if (!file_) {
                throw std::runtime_error("cannot open " + path + " for writing");
            }
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

SweepConfig base_sweep(const std::string& config_path, std::uint64_t seed, const std::string& transmit) {
    if (config_path.empty()) {
        return make_reference_sweep(transmit.empty() ? "pn64a" : transmit, seed);
    }
    auto cfg = parse_sweep_config(read_json_file(config_path), std::filesystem::path(config_path).parent_path());
    if (!transmit.empty()) {
        cfg.transmitted_profile_id = transmit;
    }
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-standard OFDM packet detector model"};
    app.require_subcommand(1);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Detection probability versus SNR");
    std::string sweep_config, sweep_out, sweep_log, sweep_transmit, sweep_format;
    std::optional<std::uint64_t> sweep_seed;
    std::optional<std::size_t> sweep_trials;
    std::optional<unsigned> sweep_threads;
    DetectorFlags sweep_flags;
    sweep->add_option("--config", sweep_config, "Sweep configuration (JSON); reference setup if omitted");
    sweep->add_option("--out", sweep_out, "Output CSV (default stdout)");
    sweep->add_option("--trials-log", sweep_log, "Per-trial outcome CSV");
    sweep->add_option("--transmit", sweep_transmit, "Transmitted profile id");
    sweep->add_option("--seed", sweep_seed, "RNG seed");
    sweep->add_option("--trials", sweep_trials, "Trials per SNR point");
    sweep->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");
    sweep->add_option("--format", sweep_format, "Sample format, e.g. q1.15");
    sweep_flags.attach(sweep);

    // scope
    auto* scope = app.add_subcommand("scope", "Correlator output traces for one capture");
    std::string scope_config, scope_out, scope_transmit, scope_format;
    double scope_snr = 10.0;
    std::uint64_t scope_seed = 1;
    DetectorFlags scope_flags;
    scope->add_option("--config", scope_config, "Sweep configuration (JSON) for profiles and signal layout");
    scope->add_option("--snr", scope_snr, "SNR in dB")->capture_default_str();
    scope->add_option("--seed", scope_seed, "RNG seed")->capture_default_str();
    scope->add_option("--transmit", scope_transmit, "Transmitted profile id");
    scope->add_option("--format", scope_format, "Sample format, e.g. q1.15");
    scope->add_option("--out", scope_out, "Output CSV (default stdout)");
    scope_flags.attach(scope);

    // gen-coeff
    auto* gen_coeff = app.add_subcommand("gen-coeff", "Pack a preamble into coefficient registers");
    std::string coeff_preamble, coeff_out;
    std::optional<std::uint64_t> coeff_pn_seed;
    std::size_t coeff_length = 64;
    auto* preamble_opt = gen_coeff->add_option("--preamble", coeff_preamble, "Preamble file ('re im' per line)");
    auto* pn_opt = gen_coeff->add_option("--pn-seed", coeff_pn_seed, "Generate a PN preamble from this seed");
    gen_coeff->add_option("--length", coeff_length, "PN preamble length")->capture_default_str();
    gen_coeff->add_option("--out", coeff_out, "Output file (default stdout)");
    preamble_opt->excludes(pn_opt);

    // detect
    auto* detect = app.add_subcommand("detect", "Run the detector bank over an IQ file");
    std::string detect_profiles, detect_input, detect_out;
    DetectorFlags detect_flags;
    detect->add_option("--profiles", detect_profiles, "Profile definition file (JSON)")->required();
    detect->add_option("--input", detect_input, "IQ file")->required();
    detect->add_option("--out", detect_out, "Output CSV (default stdout)");
    detect_flags.attach(detect);

    // gen-iq
    auto* gen_iq = app.add_subcommand("gen-iq", "Synthesize an IQ file carrying one preamble");
    std::string geniq_profiles, geniq_transmit, geniq_out, geniq_format = "q1.15";
    double geniq_snr = 10.0, geniq_amplitude = 0.25;
    std::uint64_t geniq_seed = 1;
    std::size_t geniq_pad_before = 200, geniq_pad_after = 200;
    gen_iq->add_option("--profiles", geniq_profiles, "Profile definition file (JSON)")->required();
    gen_iq->add_option("--transmit", geniq_transmit, "Profile id to embed")->required();
    gen_iq->add_option("--snr", geniq_snr, "SNR in dB (inf for no noise)")->capture_default_str();
    gen_iq->add_option("--seed", geniq_seed, "Noise seed")->capture_default_str();
    gen_iq->add_option("--amplitude", geniq_amplitude, "Preamble scale")->capture_default_str();
    gen_iq->add_option("--pad-before", geniq_pad_before, "Silent samples before the preamble")->capture_default_str();
    gen_iq->add_option("--pad-after", geniq_pad_after, "Silent samples after the preamble")->capture_default_str();
    gen_iq->add_option("--format", geniq_format, "Sample format (at most 16 bits)")->capture_default_str();
    gen_iq->add_option("--out", geniq_out, "Output IQ file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sweep->parsed()) {
            auto cfg = base_sweep(sweep_config, sweep_seed.value_or(1), sweep_transmit);
            if (sweep_seed) cfg.seed = *sweep_seed;
            if (sweep_trials) cfg.trials_per_point = *sweep_trials;
            if (sweep_threads) cfg.threads = *sweep_threads;
            if (!sweep_format.empty()) cfg.format = parse_format(sweep_format);
            cfg.detector = sweep_flags.apply(cfg.detector);
            const auto result = run_sweep(cfg);
            Output out(sweep_out);
            write_sweep_csv(out.stream(), result);
            if (!sweep_log.empty()) {
                Output log(sweep_log);
                log.stream() << "snr_db,trial,outcome,winner,peak_index,preamble_start\n";
                for (const auto& t : result.trials) {
                    log.stream() << t.snr_db << ',' << t.trial_index << ',' << to_string(t.outcome.outcome) << ','
                                 << t.outcome.winner_id.value_or("") << ',';
                    if (t.outcome.peak_index) log.stream() << *t.outcome.peak_index;
                    log.stream() << ',' << t.outcome.preamble_start << '\n';
                }
            }
        } else if (scope->parsed()) {
            auto cfg = base_sweep(scope_config, scope_seed, scope_transmit);
            if (!scope_format.empty()) cfg.format = parse_format(scope_format);
            cfg.detector = scope_flags.apply(cfg.detector);
            const auto trace = run_scope_scenario(cfg, scope_snr, scope_seed);
            Output out(scope_out);
            write_scope_csv(out.stream(), trace);
            for (const auto& ev : trace.events) {
                std::cerr << "event " << ev.standard_id << " peak " << ev.peak_value << " at " << ev.peak_index
                          << "\n";
            }
        } else if (gen_coeff->parsed()) {
            std::optional<Preamble> preamble;
            if (!coeff_preamble.empty()) {
                preamble = read_preamble_file("preamble", coeff_preamble);
            } else if (coeff_pn_seed) {
                preamble = make_pn_preamble("pn", coeff_length, *coeff_pn_seed);
            } else {
                std::cerr << "gen-coeff: need --preamble or --pn-seed\n";
                return 2;
            }
            Output out(coeff_out);
            out.stream() << format_coefficients(load_coefficients(*preamble));
        } else if (detect->parsed()) {
            const auto pf = load_profile_file(detect_profiles);
            const auto stream = read_iq_file(detect_input);
            const auto options = detect_flags.apply(pf.detector);
            const auto regs = RegisterMap::build(pf.profiles, options.resolve(stream.format()));
            const auto events = run_detector_bank(stream, pf.profiles, regs);
            Output out(detect_out);
            out.stream() << "standard_id,peak_value,peak_index\n";
            for (const auto& ev : events) {
                out.stream() << ev.standard_id << ',' << ev.peak_value << ',' << ev.peak_index << '\n';
            }
        } else if (gen_iq->parsed()) {
            const auto pf = load_profile_file(geniq_profiles);
            SweepConfig cfg;
            cfg.profiles = pf.profiles;
            cfg.transmitted_profile_id = geniq_transmit;
            const auto& tx = cfg.transmitted().preamble;
            std::vector<Complex> scaled;
            for (const auto& v : tx.samples()) {
                scaled.push_back(v * geniq_amplitude);
            }
            const double power = mean_power(scaled);
            const auto embedded =
                embed_preamble(Preamble(tx.id(), std::move(scaled)), geniq_pad_before, geniq_pad_after);
            const auto noisy = add_awgn(embedded.samples, geniq_snr, geniq_seed, power);
            write_iq_file(geniq_out, quantize(noisy, parse_format(geniq_format)));
            std::cerr << "preamble " << tx.id() << " starts at " << embedded.preamble_start << ", peak expected at "
                      << embedded.preamble_start + tx.length() - 1 << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "pktdet: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
