#include "noisecal/dataset.hpp"

#include <cmath>

namespace noisecal {

void Dataset::validate() const {
    if (X.rows != y.size()) throw Error("dataset: X/y length mismatch");
    if (X.cols == 0) throw Error("dataset: predictor column 0 missing");
    if (X.rows < 10) throw Error("dataset: need n >= 10 for fitting");
    for (double v : X.data)
        if (!std::isfinite(v)) throw Error("dataset: non-finite predictor entry");
    for (double v : y)
        if (!std::isfinite(v)) throw Error("dataset: non-finite target entry");
}

Dataset make_dataset(const std::vector<AlignedSeries>& windows, bool with_velocity) {
    std::vector<const AlignedSeries*> rows;
    rows.reserve(windows.size());
    for (const auto& w : windows) {
        if (with_velocity && !w.features.contains("velocity_mps")) continue;
        rows.push_back(&w);
    }
    if (rows.empty()) throw Error("make_dataset: no usable windows");

    Dataset d;
    d.column_names = {"node_dba"};
    if (with_velocity) d.column_names.push_back("velocity_mps");
    d.X = Matrix(rows.size(), d.column_names.size());
    d.y.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        d.X(i, 0) = rows[i]->node_mean;
        if (with_velocity) d.X(i, 1) = rows[i]->features.at("velocity_mps");
        d.y[i] = rows[i]->ref_mean;
    }
    return d;
}

Dataset subset(const Dataset& d, std::span<const std::size_t> idx) {
    Dataset out;
    out.column_names = d.column_names;
    out.X = Matrix(idx.size(), d.p());
    out.y.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        for (std::size_t j = 0; j < d.p(); ++j) out.X(i, j) = d.X(idx[i], j);
        out.y[i] = d.y[idx[i]];
    }
    return out;
}

}  // namespace noisecal
