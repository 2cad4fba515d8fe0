#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace curvwomb {

struct HPDInterval {
    double lower{0};
    double upper{0};
    double prob{0.95};
};

/// Empirical shortest interval holding ceil(prob * n) order statistics. Ties
/// go to the smallest lower endpoint.
[[nodiscard]] HPDInterval hpd(std::span<const double> samples, double prob);

[[nodiscard]] double median(std::span<const double> samples);

enum class Significance { None, Positive, Negative };

[[nodiscard]] Significance significance(const HPDInterval& interval);
[[nodiscard]] std::string_view to_string(Significance s);
[[nodiscard]] Significance significance_from_string(std::string_view s);

/// Median, HPD bounds and significance of one scalar posterior.
struct Summary {
    double median{0};
    double lower{0};
    double upper{0};
    Significance flag{Significance::None};
};

[[nodiscard]] Summary summarize(std::span<const double> samples, double prob);

struct FieldMetrics {
    double rmse{0};
    double coverage{0};
};

/// RMSE of the medians against the truths and fraction of HPDs holding the
/// truth. Throws LengthMismatch.
[[nodiscard]] FieldMetrics coverage_and_rmse(const std::vector<Summary>& estimates, const std::vector<double>& truths);

}  // namespace curvwomb
