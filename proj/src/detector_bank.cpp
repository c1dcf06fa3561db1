#include <algorithm>

#include "pktdet/standards.hpp"

namespace pktdet {

DetectorBank::DetectorBank(std::vector<StandardProfile> profiles, const RegisterMap& regs, std::int64_t origin_index)
    : profiles_(std::move(profiles)), next_index_(origin_index) {
    auto cfg = resolve_registers(regs, profiles_);
    for (std::size_t k = 0; k < profiles_.size(); ++k) {
        correlators_.emplace_back(cfg.standards[k].bank, cfg.hold_off, profiles_[k].correlator_len());
    }
    stats_.resize(profiles_.size());
    apply(std::move(cfg));
    generation_ = 0;
}

void DetectorBank::submit(const RegisterMap& regs) {
    auto cfg = resolve_registers(regs, profiles_);
    std::lock_guard lock(pending_mutex_);
    pending_ = std::move(cfg);
    has_pending_.store(true, std::memory_order_release);
}

void DetectorBank::apply(ResolvedConfig cfg) {
    if (!energy_) {
        energy_.emplace(cfg.energy);
    } else {
        energy_->reconfigure(cfg.energy);
    }
    if (cfg.coarse) {
        if (!coarse_ || coarse_->half_period() != cfg.coarse->half_period) {
            coarse_.emplace(cfg.coarse->half_period);
            coarse_run_ = 0;
        }
    } else {
        coarse_.reset();
        coarse_run_ = 0;
        coarse_armed_at_.reset();
    }
    for (std::size_t k = 0; k < correlators_.size(); ++k) {
        correlators_[k].swap_bank(cfg.standards[k].bank);
        correlators_[k].set_hold_off(cfg.hold_off);
    }
    cfg_ = std::move(cfg);
    ++generation_;
}

DetectionEvent DetectorBank::make_event(const Candidate& winner) const {
    DetectionEvent ev;
    ev.standard_id = profiles_[winner.profile_index].id;
    ev.peak_value = winner.peak_value;
    ev.peak_index = winner.peak_index;
    ev.preamble_start = winner.peak_index - static_cast<std::int64_t>(winner.correlator_len) + 1;
    ev.stage_trace = winner.trace;
    ev.payload = winner.payload;
    return ev;
}

void DetectorBank::close_cluster(std::vector<DetectionEvent>& events) {
    if (cluster_.empty()) {
        return;
    }
    events.push_back(make_event(arbitrate(cluster_)));
    cluster_.clear();
}

std::vector<DetectionEvent> DetectorBank::push(IqSample sample) {
    std::vector<DetectionEvent> events;

    // Register snapshots are swapped only here, between samples.
    if (has_pending_.load(std::memory_order_acquire)) {
        std::lock_guard lock(pending_mutex_);
        if (pending_) {
            apply(std::move(*pending_));
            pending_.reset();
        }
        has_pending_.store(false, std::memory_order_release);
    }

    const std::int64_t index = next_index_++;
    if (!cluster_.empty() && index > cluster_anchor_ + static_cast<std::int64_t>(cfg_.arbitration_window)) {
        close_cluster(events);
    }

    const auto decision = energy_->push(sample, index);
    const bool energy_active = cfg_.energy_bypass || (decision && decision->active);
    since_energy_ = energy_active ? 0 : since_energy_ + 1;

    bool gate = energy_active;
    if (cfg_.coarse) {
        if (auto terms = coarse_->push(sample)) {
            coarse_run_ = terms->metric() >= cfg_.coarse->metric_threshold ? coarse_run_ + 1 : 0;
            if (coarse_run_ >= cfg_.coarse->plateau_min && !coarse_armed_at_) {
                const std::int64_t d = index - 2 * static_cast<std::int64_t>(cfg_.coarse->half_period) + 1;
                coarse_armed_at_ = d - static_cast<std::int64_t>(cfg_.coarse->plateau_min) + 1;
            }
        }
        if (coarse_armed_at_ && since_energy_ > cfg_.hold_off) {
            coarse_armed_at_.reset();
        }
        gate = energy_active && coarse_armed_at_.has_value();
    }

    if (gate) {
        since_gate_ = 0;
        if (!episode_start_) {
            episode_start_ = index;
        }
    } else if (episode_start_ && ++since_gate_ > cfg_.hold_off) {
        episode_start_.reset();
    }
    fine_enabled_ = episode_start_.has_value();

    for (std::size_t k = 0; k < correlators_.size(); ++k) {
        const auto& std_cfg = cfg_.standards[k];
        if (!std_cfg.enabled) {
            correlators_[k].shift(sample);
            continue;
        }
        const auto out = correlators_[k].push(sample, gate);
        stats_[k].work_count = correlators_[k].work_count();
        if (!out) {
            continue;
        }
        if (observer_) {
            observer_({k, index, *out, generation_});
        }
        auto& st = stats_[k];
        st.max_re = st.max_re ? std::max(*st.max_re, out->re) : out->re;
        if (out->re >= std_cfg.threshold) {
            ++st.crossings;
            Candidate c;
            c.profile_index = k;
            c.correlator_len = std_cfg.bank->length();
            c.peak_value = out->re;
            c.peak_index = index;
            c.priority = std_cfg.priority;
            c.trace.energy_index = episode_start_.value_or(index);
            c.trace.coarse_index = coarse_armed_at_;
            c.payload = std_cfg.payload;
            if (cluster_.empty()) {
                cluster_anchor_ = index;
            }
            cluster_.push_back(c);
        }
    }
    return events;
}

std::vector<DetectionEvent> DetectorBank::finish() {
    std::vector<DetectionEvent> events;
    close_cluster(events);
    return events;
}

std::vector<DetectionEvent> run_detector_bank(const SampleStream& stream, std::span<const StandardProfile> profiles,
                                              const RegisterMap& regs) {
    DetectorBank bank(std::vector<StandardProfile>(profiles.begin(), profiles.end()), regs, stream.origin_index());
    std::vector<DetectionEvent> events;
    for (const auto& s : stream.samples()) {
        auto out = bank.push(s);
        events.insert(events.end(), out.begin(), out.end());
    }
    auto tail = bank.finish();
    events.insert(events.end(), tail.begin(), tail.end());
    return events;
}

} // namespace pktdet
