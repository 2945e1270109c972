#include "noisecal/calibrate.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace noisecal {

EvalReport cross_validate(const Dataset& d, const FitSpec& spec, int folds, std::uint64_t seed,
                          bool temporal_blocks) {
    if (folds < 2) throw Error("cross_validate: need at least 2 folds");
    const std::size_t n = d.n();
    if (n < static_cast<std::size_t>(folds)) throw Error("cross_validate: folds exceed n");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (!temporal_blocks) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
    }

    // First n % folds folds take one extra sample.
    const std::size_t base = n / static_cast<std::size_t>(folds);
    const std::size_t extra = n % static_cast<std::size_t>(folds);

    EvalReport report;
    std::vector<double> pooled_pred(n), pooled_actual(n);
    std::size_t cursor = 0;
    for (int f = 0; f < folds; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        const std::span<const std::size_t> test(order.data() + cursor, size);
        std::vector<std::size_t> train;
        train.reserve(n - size);
        train.insert(train.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cursor));
        train.insert(train.end(), order.begin() + static_cast<std::ptrdiff_t>(cursor + size),
                     order.end());
        cursor += size;

        Model m;
        try {
            m = fit_model(subset(d, train), spec);
        } catch (const Error& e) {
            throw Error("cross_validate: fold " + std::to_string(f) + ": " + e.what());
        }
        const Dataset held = subset(d, test);
        const auto pred = m.predict(held.X);
        for (std::size_t k = 0; k < size; ++k) {
            pooled_pred[test[k]] = pred[k];
            pooled_actual[test[k]] = held.y[k];
        }
        report.per_fold.push_back(compute_metrics(pred, held.y));
    }

    static_cast<MetricSet&>(report) = compute_metrics(pooled_pred, pooled_actual);
    return report;
}

EvalReport transfer_evaluate(const Model& m, const Dataset& target) {
    if (target.n() == 0) throw Error("transfer_evaluate: empty target dataset");
    return evaluate(m.predict(target.X), target.y);
}

}  // namespace noisecal
