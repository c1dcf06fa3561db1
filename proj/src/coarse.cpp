#include "pktdet/coarse.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace pktdet {

namespace {

// conj(a) * b
void accumulate_product(AutoCorrTerms& t, IqSample a, IqSample b, int sign) {
    const WideInt ai = a.i, aq = a.q, bi = b.i, bq = b.q;
    t.p_re += sign * (ai * bi + aq * bq);
    t.p_im += sign * (ai * bq - aq * bi);
}

} // namespace

void CoarseConfig::validate() const {
    if (half_period < 1) {
        throw std::invalid_argument("coarse half_period must be >= 1");
    }
    if (!(metric_threshold >= 0.0 && metric_threshold <= 1.0)) {
        throw std::invalid_argument("coarse metric_threshold must be in [0, 1]");
    }
    if (plateau_min < 1) {
        throw std::invalid_argument("coarse plateau_min must be >= 1");
    }
}

double AutoCorrTerms::metric() const {
    if (r == 0) {
        return 0.0;
    }
    const auto pr = static_cast<long double>(p_re);
    const auto pi = static_cast<long double>(p_im);
    const auto rr = static_cast<long double>(r);
    return static_cast<double>((pr * pr + pi * pi) / (rr * rr));
}

SchmidlCoxTracker::SchmidlCoxTracker(std::size_t half_period) : lag_(half_period) {
    if (lag_ < 1) {
        throw std::invalid_argument("Schmidl-Cox lag must be >= 1");
    }
    ring_.assign(2 * lag_, IqSample{});
}

void SchmidlCoxTracker::reset() {
    std::fill(ring_.begin(), ring_.end(), IqSample{});
    head_ = 0;
    filled_ = 0;
    terms_ = {};
}

std::optional<AutoCorrTerms> SchmidlCoxTracker::push(IqSample sample) {
    const std::size_t n = ring_.size();
    // ring_[head_] is the oldest sample once full; relative index j maps to (head_ + j) % n.
    auto at = [&](std::size_t j) { return ring_[(head_ + j) % n]; };

    if (filled_ == n) {
        // Drop offset d: remove conj(y[d]) y[d+L] and |y[d+L]|^2.
        const IqSample oldest = at(0);
        const IqSample mid = at(lag_);
        accumulate_product(terms_, oldest, mid, -1);
        terms_.r -= static_cast<WideInt>(raw_energy(mid));
        // Add conj(y[d+L]) y[d+2L] and |y[d+2L]|^2.
        accumulate_product(terms_, mid, sample, +1);
        terms_.r += static_cast<WideInt>(raw_energy(sample));
        ring_[head_] = sample;
        head_ = (head_ + 1) % n;
        return terms_;
    }

    ring_[(head_ + filled_) % n] = sample;
    ++filled_;
    if (filled_ > lag_) {
        // Newly pushed sample is y[m + L] for m = filled_ - 1 - L.
        const std::size_t m = filled_ - 1 - lag_;
        accumulate_product(terms_, at(m), sample, +1);
        terms_.r += static_cast<WideInt>(raw_energy(sample));
    }
    if (filled_ == n) {
        return terms_;
    }
    return std::nullopt;
}

std::vector<AutoCorrTerms> schmidl_cox_terms(const SampleStream& stream, std::size_t half_period) {
    if (half_period < 1) {
        throw std::invalid_argument("Schmidl-Cox lag must be >= 1");
    }
    if (stream.size() < 2 * half_period) {
        throw std::out_of_range("Schmidl-Cox needs at least 2L = " + std::to_string(2 * half_period) +
                                " samples, stream has " + std::to_string(stream.size()));
    }
    SchmidlCoxTracker tracker(half_period);
    std::vector<AutoCorrTerms> out;
    out.reserve(stream.size() - 2 * half_period + 1);
    for (const auto& s : stream.samples()) {
        if (auto t = tracker.push(s)) {
            out.push_back(*t);
        }
    }
    return out;
}

std::vector<double> schmidl_cox_metric(const SampleStream& stream, std::size_t half_period) {
    const auto terms = schmidl_cox_terms(stream, half_period);
    std::vector<double> metric;
    metric.reserve(terms.size());
    for (const auto& t : terms) {
        metric.push_back(t.metric());
    }
    return metric;
}

std::optional<std::size_t> coarse_trigger(const std::vector<double>& metric, const CoarseConfig& cfg) {
    cfg.validate();
    std::size_t run = 0;
    for (std::size_t d = 0; d < metric.size(); ++d) {
        run = metric[d] >= cfg.metric_threshold ? run + 1 : 0;
        if (run == cfg.plateau_min) {
            return d + 1 - cfg.plateau_min;
        }
    }
    return std::nullopt;
}

CoarseOutput coarse_detect(const SampleStream& stream, const CoarseConfig& cfg) {
    cfg.validate();
    CoarseOutput out;
    out.metric = schmidl_cox_metric(stream, cfg.half_period);
    out.first_trigger = coarse_trigger(out.metric, cfg);
    return out;
}

} // namespace pktdet
