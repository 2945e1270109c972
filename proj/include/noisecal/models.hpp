#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "noisecal/dataset.hpp"

namespace noisecal {

enum class Family { Slr, Mlr, Pr, Sr, Svr, Dt, Rfr };

std::string family_name(Family f);
Family family_from_name(const std::string& name);

using Hyperparams = std::map<std::string, double>;

struct LinearParams {
    double intercept = 0.0;
    std::vector<double> slopes;  // one per predictor column
};

struct PolyParams {
    std::vector<double> coeffs;  // coeffs[k] multiplies x^k, original scale
};

struct SegmentedParams {
    double breakpoint = 0.0;
    double a1 = 0.0, b1 = 0.0;  // x < breakpoint
    double a2 = 0.0, b2 = 0.0;  // x >= breakpoint
};

struct SvrParams {
    Matrix support_x;
    std::vector<double> dual_coef;  // alpha_i - alpha_i^* per support vector
    double bias = 0.0;
    double gamma = 0.0;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf prediction
};

struct TreeParams {
    std::vector<TreeNode> nodes;  // node 0 is the root
};

struct ForestParams {
    std::vector<TreeParams> trees;
};

using ModelParams =
    std::variant<LinearParams, PolyParams, SegmentedParams, SvrParams, TreeParams, ForestParams>;

struct Model {
    Family family = Family::Slr;
    Hyperparams hyperparams;
    ModelParams params;
    std::vector<double> residuals;  // training residuals, for diagnostics
    double y_min = 0.0, y_max = 0.0;
    std::size_t n_features = 1;  // predictor columns seen at fit time

    [[nodiscard]] double predict_one(std::span<const double> row) const;
    [[nodiscard]] std::vector<double> predict(const Matrix& X) const;
};

Model fit_slr(const Dataset& d);
Model fit_mlr(const Dataset& d);
Model fit_pr(const Dataset& d, int degree);

struct SrGrid {
    double lo_percentile = 5.0;
    double hi_percentile = 95.0;
    double step_percentile = 1.0;
    bool exact_midpoints = false;  // search every midpoint of distinct x instead
};
Model fit_sr(const Dataset& d, const SrGrid& grid = {});

// gamma <= 0 selects the 1/(p * var(X)) default.
Model fit_svr(const Dataset& d, double c, double epsilon, double gamma);

Model fit_dt(const Dataset& d, int max_depth, int min_leaf);
Model fit_rfr(const Dataset& d, int n_trees, int max_depth, int feature_subset, bool bootstrap,
              std::uint64_t seed);

// Defaults applied when a hyperparameter is absent:
//   PR degree=4; SR percentile grid; SVR C=10, epsilon=0.5, gamma auto;
//   DT max_depth=5, min_leaf=5; RFR n_trees=100, max_depth=5,
//   feature_subset=max(1, ceil(p/3)), bootstrap=1, seed=0.
struct FitSpec {
    Family family = Family::Slr;
    Hyperparams hp;
};
Model fit_model(const Dataset& d, const FitSpec& spec);

double hp_get(const Hyperparams& hp, const std::string& key, double fallback);

// Versioned self-describing JSON document.
std::string serialize_model(const Model& m);
Model deserialize_model(const std::string& text);
void save_model(const Model& m, const std::string& path);
Model load_model(const std::string& path);

}  // namespace noisecal
