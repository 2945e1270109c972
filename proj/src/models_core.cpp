#include <algorithm>
#include <cmath>

#include "noisecal/models.hpp"

namespace noisecal {

std::string family_name(Family f) {
    switch (f) {
        case Family::Slr: return "SLR";
        case Family::Mlr: return "MLR";
        case Family::Pr: return "PR";
        case Family::Sr: return "SR";
        case Family::Svr: return "SVR";
        case Family::Dt: return "DT";
        case Family::Rfr: return "RFR";
    }
    throw Error("unknown family");
}

Family family_from_name(const std::string& name) {
    std::string u = name;
    for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (u == "SLR") return Family::Slr;
    if (u == "MLR") return Family::Mlr;
    if (u == "PR") return Family::Pr;
    if (u == "SR") return Family::Sr;
    if (u == "SVR") return Family::Svr;
    if (u == "DT") return Family::Dt;
    if (u == "RFR") return Family::Rfr;
    throw Error("unknown model family: " + name);
}

double hp_get(const Hyperparams& hp, const std::string& key, double fallback) {
    const auto it = hp.find(key);
    return it == hp.end() ? fallback : it->second;
}

namespace {

double tree_predict(const TreeParams& t, std::span<const double> row) {
    int idx = 0;
    while (true) {
        const TreeNode& n = t.nodes[static_cast<std::size_t>(idx)];
        if (n.feature < 0) return n.value;
        idx = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
}

}  // namespace

double Model::predict_one(std::span<const double> row) const {
    if (row.empty()) throw Error("predict: empty row");
    switch (family) {
        case Family::Slr:
        case Family::Mlr: {
            const auto& p = std::get<LinearParams>(params);
            if (row.size() < p.slopes.size()) throw Error("predict: feature count mismatch");
            double y = p.intercept;
            for (std::size_t j = 0; j < p.slopes.size(); ++j) y += p.slopes[j] * row[j];
            return y;
        }
        case Family::Pr: {
            const auto& p = std::get<PolyParams>(params);
            double y = 0.0;
            for (std::size_t k = p.coeffs.size(); k-- > 0;) y = y * row[0] + p.coeffs[k];
            return y;
        }
        case Family::Sr: {
            const auto& p = std::get<SegmentedParams>(params);
            return row[0] < p.breakpoint ? p.a1 + p.b1 * row[0] : p.a2 + p.b2 * row[0];
        }
        case Family::Svr: {
            const auto& p = std::get<SvrParams>(params);
            if (row.size() != p.support_x.cols && p.support_x.rows > 0)
                throw Error("predict: feature count mismatch");
            double y = p.bias;
            for (std::size_t i = 0; i < p.support_x.rows; ++i) {
                double d2 = 0.0;
                const auto sv = p.support_x.row(i);
                for (std::size_t j = 0; j < sv.size(); ++j) {
                    const double d = sv[j] - row[j];
                    d2 += d * d;
                }
                y += p.dual_coef[i] * std::exp(-p.gamma * d2);
            }
            return y;
        }
        case Family::Dt: {
            if (row.size() != n_features) throw Error("predict: feature count mismatch");
            return tree_predict(std::get<TreeParams>(params), row);
        }
        case Family::Rfr: {
            if (row.size() != n_features) throw Error("predict: feature count mismatch");
            const auto& p = std::get<ForestParams>(params);
            double s = 0.0;
            for (const auto& t : p.trees) s += tree_predict(t, row);
            return s / static_cast<double>(p.trees.size());
        }
    }
    throw Error("predict: unknown family");
}

std::vector<double> Model::predict(const Matrix& X) const {
    const bool col0_only = family == Family::Slr || family == Family::Pr || family == Family::Sr;
    if (!col0_only && X.cols != n_features)
        throw Error("predict: expected " + std::to_string(n_features) + " columns, got " +
                    std::to_string(X.cols));
    if (X.cols == 0) throw Error("predict: empty matrix");
    std::vector<double> out(X.rows);
    for (std::size_t i = 0; i < X.rows; ++i) {
        const double y = predict_one(X.row(i));
        if (!std::isfinite(y)) throw Error("predict: non-finite output");
        out[i] = y;
    }
    return out;
}

Model fit_model(const Dataset& d, const FitSpec& spec) {
    switch (spec.family) {
        case Family::Slr: return fit_slr(d);
        case Family::Mlr: return fit_mlr(d);
        case Family::Pr: return fit_pr(d, static_cast<int>(hp_get(spec.hp, "degree", 4)));
        case Family::Sr: {
            SrGrid grid;
            grid.exact_midpoints = hp_get(spec.hp, "exact_midpoints", 0) != 0;
            return fit_sr(d, grid);
        }
        case Family::Svr:
            return fit_svr(d, hp_get(spec.hp, "C", 10.0), hp_get(spec.hp, "epsilon", 0.5),
                           hp_get(spec.hp, "gamma", 0.0));
        case Family::Dt:
            return fit_dt(d, static_cast<int>(hp_get(spec.hp, "max_depth", 5)),
                          static_cast<int>(hp_get(spec.hp, "min_leaf", 5)));
        case Family::Rfr: {
            const auto p = static_cast<double>(d.p());
            const int subset_default = std::max(1, static_cast<int>(std::ceil(p / 3.0)));
            return fit_rfr(d, static_cast<int>(hp_get(spec.hp, "n_trees", 100)),
                           static_cast<int>(hp_get(spec.hp, "max_depth", 5)),
                           static_cast<int>(hp_get(spec.hp, "feature_subset", subset_default)),
                           hp_get(spec.hp, "bootstrap", 1) != 0,
                           static_cast<std::uint64_t>(hp_get(spec.hp, "seed", 0)));
        }
    }
    throw Error("fit_model: unknown family");
}

}  // namespace noisecal
