#include <algorithm>
#include <cmath>
#include <limits>

#include "noisecal/models.hpp"
#include "noisecal/stats.hpp"

namespace noisecal {

namespace {

constexpr double kKktTol = 1e-3;
constexpr long kMaxUpdates = 100000;  // SMO iteration cap

// Dual in beta_i = alpha_i - alpha_i^*:
//   maximize  -1/2 sum_ij beta_i beta_j K_ij + sum_i y_i beta_i - eps sum_i |beta_i|
//   subject to sum_i beta_i = 0, beta_i in [-C, C].
struct SmoState {
    const Matrix& X;
    std::span<const double> y;
    double C, eps, gamma;
    std::vector<double> beta;
    std::vector<double> g;  // y_i - sum_j beta_j K_ij
    std::vector<std::vector<double>> kcache;
    std::vector<int> krow;  // feature row cached at slot, -1 when empty

    SmoState(const Matrix& x, std::span<const double> yy, double c, double e, double gm)
        : X(x), y(yy), C(c), eps(e), gamma(gm), beta(x.rows, 0.0), g(yy.begin(), yy.end()) {
        const std::size_t n = x.rows;
        const std::size_t slots = n <= 2048 ? n : 64;
        kcache.assign(slots, {});
        krow.assign(n, -1);
        slot_of_.assign(n, -1);
        next_slot_ = 0;
    }

    std::span<const double> kernel_row(std::size_t i) {
        if (slot_of_[i] >= 0) return kcache[static_cast<std::size_t>(slot_of_[i])];
        const auto slot = next_slot_ % kcache.size();
        next_slot_++;
        if (krow[slot] >= 0) slot_of_[static_cast<std::size_t>(krow[slot])] = -1;
        auto& row = kcache[slot];
        row.resize(X.rows);
        const auto xi = X.row(i);
        for (std::size_t j = 0; j < X.rows; ++j) {
            double d2 = 0.0;
            const auto xj = X.row(j);
            for (std::size_t k = 0; k < xi.size(); ++k) {
                const double d = xi[k] - xj[k];
                d2 += d * d;
            }
            row[j] = std::exp(-gamma * d2);
        }
        krow[slot] = static_cast<int>(i);
        slot_of_[i] = static_cast<int>(slot);
        return row;
    }

 private:
    std::vector<int> slot_of_;
    std::size_t next_slot_ = 0;

 public:
    // Derivative of the objective for increasing beta_i.
    double up_value(std::size_t i) const { return beta[i] < 0.0 ? g[i] + eps : g[i] - eps; }
    // Matching value for decreasing beta_j (objective gains -down_value per unit).
    double down_value(std::size_t j) const { return beta[j] > 0.0 ? g[j] - eps : g[j] + eps; }
};

}  // namespace

Model fit_svr(const Dataset& d, double c, double epsilon, double gamma) {
    d.validate();
    if (c <= 0.0) throw Error("fit_svr: C must be positive");
    if (epsilon < 0.0) throw Error("fit_svr: epsilon must be non-negative");
    if (gamma <= 0.0) {
        const double v = stats::variance_pop(d.X.data);
        gamma = v > 0.0 ? 1.0 / (static_cast<double>(d.p()) * v) : 1.0;
    }

    const std::size_t n = d.n();
    SmoState s(d.X, d.y, c, epsilon, gamma);

    double bias = 0.0;
    bool converged = false;
    double gap = std::numeric_limits<double>::infinity();
    for (long iter = 0; iter < kMaxUpdates; ++iter) {
        std::size_t i_up = n, j_low = n;
        double p_max = -std::numeric_limits<double>::infinity();
        double q_min = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i) {
            if (s.beta[i] < c && s.up_value(i) > p_max) {
                p_max = s.up_value(i);
                i_up = i;
            }
            if (s.beta[i] > -c && s.down_value(i) < q_min) {
                q_min = s.down_value(i);
                j_low = i;
            }
        }
        gap = p_max - q_min;
        if (i_up == n || j_low == n || gap <= kKktTol) {
            bias = 0.5 * (p_max + q_min);
            converged = true;
            break;
        }

        const std::size_t i = i_up, j = j_low;
        // Copy row i: loading row j may evict it from a small cache.
        const auto ki_span = s.kernel_row(i);
        const std::vector<double> ki(ki_span.begin(), ki_span.end());
        const double kii = ki[i], kij = ki[j];
        const auto kj = s.kernel_row(j);
        const double kjj = kj[j];
        double eta = kii + kjj - 2.0 * kij;
        if (eta <= 1e-12) eta = 1e-12;

        // Move beta_i += delta, beta_j -= delta over the feasible range,
        // maximizing the piecewise quadratic (the eps*|.| terms kink at
        // beta_i = 0 and beta_j = 0).
        const double dmax = std::min(c - s.beta[i], s.beta[j] + c);
        std::vector<double> knots{0.0, dmax};
        if (s.beta[i] < 0.0 && -s.beta[i] < dmax) knots.push_back(-s.beta[i]);
        if (s.beta[j] > 0.0 && s.beta[j] < dmax) knots.push_back(s.beta[j]);
        std::sort(knots.begin(), knots.end());

        const double slope0 = s.g[i] - s.g[j];
        auto w_at = [&](double delta) {
            return delta * slope0 - 0.5 * eta * delta * delta -
                   epsilon * (std::fabs(s.beta[i] + delta) - std::fabs(s.beta[i])) -
                   epsilon * (std::fabs(s.beta[j] - delta) - std::fabs(s.beta[j]));
        };
        double best_delta = 0.0, best_w = 0.0;
        for (std::size_t seg = 0; seg + 1 < knots.size(); ++seg) {
            const double a = knots[seg], b = knots[seg + 1];
            if (b - a <= 0.0) continue;
            const double mid = 0.5 * (a + b);
            const double s1 = s.beta[i] + mid >= 0.0 ? 1.0 : -1.0;
            const double s2 = s.beta[j] - mid >= 0.0 ? 1.0 : -1.0;
            double dstar = (slope0 - epsilon * (s1 - s2)) / eta;
            dstar = std::clamp(dstar, a, b);
            for (const double cand : {dstar, a, b}) {
                const double w = w_at(cand);
                if (w > best_w) {
                    best_w = w;
                    best_delta = cand;
                }
            }
        }
        if (best_delta <= 1e-14) {
            // No usable progress on the maximal violating pair; report as
            // converged at the achieved gap.
            bias = 0.5 * (p_max + q_min);
            converged = gap <= kKktTol;
            break;
        }

        s.beta[i] += best_delta;
        s.beta[j] -= best_delta;
        for (std::size_t k = 0; k < n; ++k) s.g[k] -= best_delta * (ki[k] - kj[k]);
    }
    if (!converged)
        throw Error("fit_svr: SMO did not converge within " + std::to_string(kMaxUpdates) +
                    " updates (KKT gap " + std::to_string(gap) + ")");

    SvrParams params;
    params.gamma = gamma;
    params.bias = bias;
    std::vector<std::size_t> sv;
    for (std::size_t i = 0; i < n; ++i)
        if (std::fabs(s.beta[i]) > 1e-12) sv.push_back(i);
    params.support_x = Matrix(sv.size(), d.p());
    params.dual_coef.resize(sv.size());
    for (std::size_t r = 0; r < sv.size(); ++r) {
        for (std::size_t jcol = 0; jcol < d.p(); ++jcol)
            params.support_x(r, jcol) = d.X(sv[r], jcol);
        params.dual_coef[r] = s.beta[sv[r]];
    }

    Model m;
    m.family = Family::Svr;
    m.hyperparams = {{"C", c}, {"epsilon", epsilon}, {"gamma", gamma}};
    m.n_features = d.p();
    m.params = std::move(params);
    m.y_min = *std::min_element(d.y.begin(), d.y.end());
    m.y_max = *std::max_element(d.y.begin(), d.y.end());
    const auto pred = m.predict(d.X);
    m.residuals.resize(n);
    for (std::size_t i = 0; i < n; ++i) m.residuals[i] = d.y[i] - pred[i];
    return m;
}

}  // namespace noisecal
