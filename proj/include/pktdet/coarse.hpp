#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pktdet/signal.hpp"
#include "pktdet/wide.hpp"

namespace pktdet {

struct CoarseConfig {
    /// Repetition lag L (half the training symbol).
    std::size_t half_period = 16;
    double metric_threshold = 0.8;
    std::size_t plateau_min = 8;

    /// Throws std::invalid_argument.
    void validate() const;
};

/// Exact integer auto-correlation terms at one offset d:
///   P(d) = sum_{m<L} conj(y[d+m]) * y[d+m+L]
///   R(d) = sum_{m<L} |y[d+m+L]|^2
struct AutoCorrTerms {
    WideInt p_re = 0;
    WideInt p_im = 0;
    WideInt r = 0;

    /// |P|^2 / R^2, or 0 when R == 0.
    double metric() const;

    bool operator==(const AutoCorrTerms&) const = default;
};

/// Streaming Schmidl-Cox tracker. Keeps the last 2L samples and updates P and
/// R in O(1) per sample.
class SchmidlCoxTracker {
public:
    /// Throws std::invalid_argument for L == 0.
    explicit SchmidlCoxTracker(std::size_t half_period);

    /// After at least 2L samples, returns the terms for the offset whose
    /// window ends at the sample just pushed (d = pushed - 2L).
    std::optional<AutoCorrTerms> push(IqSample sample);
    void reset();

    std::size_t half_period() const { return lag_; }

private:
    std::size_t lag_;
    std::vector<IqSample> ring_;
    std::size_t head_ = 0;
    std::size_t filled_ = 0;
    AutoCorrTerms terms_;
};

/// Terms for every offset d in [0, size - 2L]. Throws std::out_of_range if the
/// stream is shorter than 2L.
std::vector<AutoCorrTerms> schmidl_cox_terms(const SampleStream& stream, std::size_t half_period);

/// M(d) = |P(d)|^2 / R(d)^2 for every offset d in [0, size - 2L].
std::vector<double> schmidl_cox_metric(const SampleStream& stream, std::size_t half_period);

/// First d that starts a run of at least plateau_min consecutive values >= threshold.
std::optional<std::size_t> coarse_trigger(const std::vector<double>& metric, const CoarseConfig& cfg);

struct CoarseOutput {
    std::vector<double> metric;
    std::optional<std::size_t> first_trigger;
};

CoarseOutput coarse_detect(const SampleStream& stream, const CoarseConfig& cfg);

} // namespace pktdet
