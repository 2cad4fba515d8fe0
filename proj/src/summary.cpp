#include "curvwomb/summary.hpp"

#include "curvwomb/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace curvwomb {

HPDInterval hpd(std::span<const double> samples, double prob) {
    if (samples.empty()) throw EmptySamples("HPD requested for an empty sample");
    if (!(prob > 0.0 && prob < 1.0)) throw ConfigError("HPD probability must lie in (0, 1)");
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    const auto m = static_cast<std::size_t>(std::ceil(prob * static_cast<double>(n) - 1e-9));
    const std::size_t window = std::clamp<std::size_t>(m, 1, n);
    std::size_t best = 0;
    double width = s[window - 1] - s[0];
    for (std::size_t i = 1; i + window <= n; ++i) {
        const double w = s[i + window - 1] - s[i];
        if (w < width) {
            width = w;
            best = i;
        }
    }
    return {s[best], s[best + window - 1], prob};
}

double median(std::span<const double> samples) {
    if (samples.empty()) throw EmptySamples("median requested for an empty sample");
    std::vector<double> s(samples.begin(), samples.end());
    const std::size_t n = s.size();
    const std::size_t mid = n / 2;
    std::nth_element(s.begin(), s.begin() + mid, s.end());
    if (n % 2 == 1) return s[mid];
    const double hi = s[mid];
    const double lo = *std::max_element(s.begin(), s.begin() + mid);
    return 0.5 * (lo + hi);
}

Significance significance(const HPDInterval& interval) {
    if (interval.lower > 0.0) return Significance::Positive;
    if (interval.upper < 0.0) return Significance::Negative;
    return Significance::None;
}

std::string_view to_string(Significance s) {
    switch (s) {
    case Significance::Positive: return "positive";
    case Significance::Negative: return "negative";
    case Significance::None: return "none";
    }
    return "none";
}

Significance significance_from_string(std::string_view s) {
    if (s == "positive") return Significance::Positive;
    if (s == "negative") return Significance::Negative;
    if (s == "none") return Significance::None;
    throw ConfigError("unknown significance flag '" + std::string(s) + "'");
}

Summary summarize(std::span<const double> samples, double prob) {
    const HPDInterval h = hpd(samples, prob);
    // The median always lies inside the HPD for unimodal samples; clamp so the
    // ordering invariant also holds for pathological ones.
    const double med = std::clamp(median(samples), h.lower, h.upper);
    return {med, h.lower, h.upper, significance(h)};
}

FieldMetrics coverage_and_rmse(const std::vector<Summary>& estimates, const std::vector<double>& truths) {
    if (estimates.size() != truths.size())
        throw LengthMismatch("got " + std::to_string(estimates.size()) + " estimates for " + std::to_string(truths.size()) +
                             " truths");
    if (estimates.empty()) throw EmptySamples("no locations to assess");
    double sq = 0.0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
        const double e = estimates[i].median - truths[i];
        sq += e * e;
        if (estimates[i].lower <= truths[i] && truths[i] <= estimates[i].upper) ++covered;
    }
    const auto n = static_cast<double>(truths.size());
    return {std::sqrt(sq / n), static_cast<double>(covered) / n};
}

}  // namespace curvwomb
