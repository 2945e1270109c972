#include <algorithm>
#include <cmath>
#include <numeric>

#include "noisecal/models.hpp"
#include "noisecal/stats.hpp"

namespace noisecal {

namespace {

// Gaussian elimination with partial pivoting on A x = b (A square, destroyed).
// Column k hitting a negligible pivot reports through `bad_col`.
std::vector<double> solve_ppivot(Matrix A, std::vector<double> b, std::size_t* bad_col = nullptr) {
    const std::size_t n = A.rows;
    double scale = 0.0;
    for (double v : A.data) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) scale = 1.0;
    const double tol = 1e-12 * scale;

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(A(i, k)) > std::fabs(A(piv, k))) piv = i;
        if (std::fabs(A(piv, k)) <= tol) {
            if (bad_col) *bad_col = k;
            throw Error("linear system is singular");
        }
        if (piv != k) {
            for (std::size_t j = k; j < n; ++j) std::swap(A(piv, j), A(k, j));
            std::swap(b[piv], b[k]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A(i, k) / A(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= A(k, j) * x[j];
        x[k] = s / A(k, k);
    }
    return x;
}

std::vector<double> residuals_for(const Model& m, const Dataset& d) {
    const auto pred = m.predict(d.X);
    std::vector<double> r(d.n());
    for (std::size_t i = 0; i < d.n(); ++i) r[i] = d.y[i] - pred[i];
    return r;
}

void finish_model(Model& m, const Dataset& d) {
    m.y_min = *std::min_element(d.y.begin(), d.y.end());
    m.y_max = *std::max_element(d.y.begin(), d.y.end());
    m.residuals = residuals_for(m, d);
}

struct SlrFit {
    double intercept = 0.0;
    double slope = 0.0;
    double sse = 0.0;
};

SlrFit slr_on(std::span<const double> x, std::span<const double> y) {
    const double mx = stats::mean(x);
    const double my = stats::mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw Error("fit_slr: zero predictor variance");
    SlrFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - f.intercept - f.slope * x[i];
        f.sse += e * e;
    }
    return f;
}

}  // namespace

Model fit_slr(const Dataset& d) {
    d.validate();
    const auto x = d.column(0);
    const SlrFit f = slr_on(x, d.y);
    Model m;
    m.family = Family::Slr;
    m.n_features = d.p();
    m.params = LinearParams{f.intercept, {f.slope}};
    finish_model(m, d);
    return m;
}

Model fit_mlr(const Dataset& d) {
    d.validate();
    if (d.p() < 2) throw Error("fit_mlr: need at least 2 predictor columns");
    const std::size_t q = d.p() + 1;  // intercept column first
    Matrix xtx(q, q);
    std::vector<double> xty(q, 0.0);
    for (std::size_t i = 0; i < d.n(); ++i) {
        std::vector<double> row(q, 1.0);
        for (std::size_t j = 0; j < d.p(); ++j) row[j + 1] = d.X(i, j);
        for (std::size_t a = 0; a < q; ++a) {
            for (std::size_t b = 0; b < q; ++b) xtx(a, b) += row[a] * row[b];
            xty[a] += row[a] * d.y[i];
        }
    }
    std::size_t bad_col = q;
    std::vector<double> beta;
    try {
        beta = solve_ppivot(std::move(xtx), std::move(xty), &bad_col);
    } catch (const Error&) {
        std::string name = bad_col == 0 ? "intercept"
                           : bad_col <= d.column_names.size()
                               ? d.column_names[bad_col - 1]
                               : "column " + std::to_string(bad_col - 1);
        throw Error("fit_mlr: design matrix rank-deficient near '" + name + "'");
    }
    Model m;
    m.family = Family::Mlr;
    m.n_features = d.p();
    LinearParams lp;
    lp.intercept = beta[0];
    lp.slopes.assign(beta.begin() + 1, beta.end());
    m.params = std::move(lp);
    finish_model(m, d);
    return m;
}

Model fit_pr(const Dataset& d, int degree) {
    d.validate();
    if (degree < 1 || degree > 8) throw Error("fit_pr: degree must be in [1, 8]");
    if (d.n() <= static_cast<std::size_t>(degree) + 1) throw Error("fit_pr: insufficient points");

    // Standardize the predictor for conditioning, fit on z, expand back.
    const auto x = d.column(0);
    const double mx = stats::mean(x);
    double sx = std::sqrt(stats::variance_pop(x));
    if (sx <= 0.0) sx = 1.0;

    const std::size_t q = static_cast<std::size_t>(degree) + 1;
    Matrix ata(q, q);
    std::vector<double> atb(q, 0.0);
    std::vector<double> pw(q);
    for (std::size_t i = 0; i < d.n(); ++i) {
        const double z = (x[i] - mx) / sx;
        pw[0] = 1.0;
        for (std::size_t k = 1; k < q; ++k) pw[k] = pw[k - 1] * z;
        for (std::size_t a = 0; a < q; ++a) {
            for (std::size_t b = 0; b < q; ++b) ata(a, b) += pw[a] * pw[b];
            atb[a] += pw[a] * d.y[i];
        }
    }
    const auto c = solve_ppivot(std::move(ata), std::move(atb));

    // sum_k c_k ((x - mx)/sx)^k expanded onto the power basis of x.
    std::vector<double> coeffs(q, 0.0);
    for (std::size_t k = 0; k < q; ++k) {
        // binomial expansion of (x - mx)^k
        std::vector<double> binom(k + 1, 0.0);
        binom[0] = 1.0;
        for (std::size_t t = 1; t <= k; ++t)
            for (std::size_t j = t; j-- > 0;)
                binom[j + 1] += binom[j];
        double mpow = 1.0;  // (-mx)^(k-j) built from high j downward
        for (std::size_t j = k + 1; j-- > 0;) {
            coeffs[j] += c[k] / std::pow(sx, static_cast<double>(k)) * binom[j] * mpow;
            mpow *= -mx;
        }
    }

    Model m;
    m.family = Family::Pr;
    m.hyperparams["degree"] = degree;
    m.n_features = d.p();
    m.params = PolyParams{std::move(coeffs)};
    finish_model(m, d);
    return m;
}

Model fit_sr(const Dataset& d, const SrGrid& grid) {
    d.validate();
    if (d.n() < 8) throw Error("fit_sr: need at least 8 points");
    const auto x = d.column(0);
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> candidates;
    if (grid.exact_midpoints) {
        for (std::size_t i = 1; i < sorted.size(); ++i)
            if (sorted[i] > sorted[i - 1])
                candidates.push_back(0.5 * (sorted[i - 1] + sorted[i]));
    } else {
        for (double p = grid.lo_percentile; p <= grid.hi_percentile + 1e-9;
             p += grid.step_percentile)
            candidates.push_back(stats::percentile_sorted(sorted, p));
        std::sort(candidates.begin(), candidates.end());
        candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }

    bool found = false;
    double best_sse = 0.0;
    SegmentedParams best;
    std::vector<double> lx, ly, rx, ry;
    for (const double xb : candidates) {
        lx.clear();
        ly.clear();
        rx.clear();
        ry.clear();
        for (std::size_t i = 0; i < d.n(); ++i) {
            if (x[i] < xb) {
                lx.push_back(x[i]);
                ly.push_back(d.y[i]);
            } else {
                rx.push_back(x[i]);
                ry.push_back(d.y[i]);
            }
        }
        if (lx.size() < 3 || rx.size() < 3) continue;
        SlrFit lf, rf;
        try {
            lf = slr_on(lx, ly);
            rf = slr_on(rx, ry);
        } catch (const Error&) {
            continue;  // zero variance on a side
        }
        const double sse = lf.sse + rf.sse;
        if (!found || sse < best_sse) {
            found = true;
            best_sse = sse;
            best = {xb, lf.intercept, lf.slope, rf.intercept, rf.slope};
        }
    }
    if (!found) throw Error("fit_sr: no admissible breakpoint candidate");

    Model m;
    m.family = Family::Sr;
    m.n_features = d.p();
    m.params = best;
    finish_model(m, d);
    return m;
}

}  // namespace noisecal
