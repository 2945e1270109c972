#include "noisecal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "noisecal/types.hpp"

namespace noisecal::stats {

double mean(std::span<const double> v) {
    if (v.empty()) throw Error("mean of empty series");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sum_sq_dev(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s;
}

double variance_pop(std::span<const double> v) {
    return sum_sq_dev(v) / static_cast<double>(v.size());
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw Error("pearson: mismatched or short series");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    double r = sab / std::sqrt(saa * sbb);
    return std::clamp(r, -1.0, 1.0);
}

namespace {

// Continued fraction for the incomplete beta function (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 1e-14;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
    if (x < 0.0 || x > 1.0) throw Error("reg_inc_beta: x out of [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_beta =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_beta);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double t_two_tailed_p(double t, double df) {
    if (df <= 0.0) throw Error("t_two_tailed_p: df must be positive");
    if (!std::isfinite(t)) return 0.0;
    const double x = df / (df + t * t);
    return reg_inc_beta(df / 2.0, 0.5, x);
}

double pearson_p_value(double r, std::size_t n) {
    if (n < 3) throw Error("pearson_p_value: need n >= 3");
    const double df = static_cast<double>(n - 2);
    if (std::fabs(r) >= 1.0) return 0.0;
    const double t = r * std::sqrt(df) / std::sqrt(1.0 - r * r);
    return t_two_tailed_p(t, df);
}

namespace {

double median_sorted(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Hinges tukey_hinges(std::span<const double> v) {
    if (v.size() < 4) throw Error("tukey_hinges: need at least 4 values");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const std::size_t half = s.size() / 2;  // median excluded when odd
    Hinges h;
    h.q1 = median_sorted(std::span<const double>(s.data(), half));
    h.q3 = median_sorted(std::span<const double>(s.data() + (s.size() - half), half));
    return h;
}

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error("percentile of empty series");
    if (p <= 0.0) return sorted.front();
    if (p >= 100.0) return sorted.back();
    const double pos = p / 100.0 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double energetic_mean(std::span<const double> levels) {
    if (levels.empty()) throw Error("energetic mean of empty series");
    double s = 0.0;
    for (double l : levels) s += std::pow(10.0, l / 10.0);
    return 10.0 * std::log10(s / static_cast<double>(levels.size()));
}

}  // namespace noisecal::stats
