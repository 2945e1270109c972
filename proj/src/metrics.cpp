#include "noisecal/metrics.hpp"

#include <cmath>

#include "noisecal/stats.hpp"
#include "noisecal/types.hpp"

namespace noisecal {

MetricSet compute_metrics(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) throw Error("evaluate: length mismatch");
    if (pred.empty()) throw Error("evaluate: empty input");
    MetricSet m;
    m.n = pred.size();
    double abs_sum = 0.0, sq_sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double e = actual[i] - pred[i];
        abs_sum += std::fabs(e);
        sq_sum += e * e;
    }
    const double n = static_cast<double>(m.n);
    m.mae = abs_sum / n;
    m.rmse = std::sqrt(sq_sum / n);

    if (m.n >= 2) {
        const double ss_tot = stats::sum_sq_dev(actual);
        if (ss_tot > 0.0) m.r2 = 1.0 - sq_sum / ss_tot;
        m.pearson_r = stats::pearson(actual, pred);
        if (m.pearson_r && m.n >= 3) m.p_value = stats::pearson_p_value(*m.pearson_r, m.n);
    }
    return m;
}

EvalReport evaluate(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) throw Error("evaluate: length mismatch");
    if (pred.size() < 3) throw Error("evaluate: need n >= 3");
    EvalReport r;
    static_cast<MetricSet&>(r) = compute_metrics(pred, actual);
    return r;
}

}  // namespace noisecal
