#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace noisecal {

/// Pooled or per-fold evaluation statistics. Metrics that are undefined for
/// the inputs (zero variance) are left empty rather than forced to 0.
struct MetricSet {
    std::optional<double> r2;
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> pearson_r;
    std::optional<double> p_value;
    std::size_t n = 0;
};

struct EvalReport : MetricSet {
    std::vector<MetricSet> per_fold;
};

// R^2, MAE, RMSE, Pearson r and its two-tailed p-value. Requires equal
// lengths with n >= 3.
EvalReport evaluate(std::span<const double> pred, std::span<const double> actual);

// Same metrics without the n >= 3 floor; used for tiny CV folds where only
// MAE/RMSE remain defined.
MetricSet compute_metrics(std::span<const double> pred, std::span<const double> actual);

}  // namespace noisecal
