#include "noisecal/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include "noisecal/stats.hpp"

namespace noisecal {

IqrSplit remove_outliers_iqr(std::span<const double> values, double fence_factor) {
    if (values.size() < 4) throw Error("remove_outliers_iqr: need at least 4 values");
    const auto h = stats::tukey_hinges(values);
    const double iqr = h.q3 - h.q1;
    const double lo = h.q1 - fence_factor * iqr;
    const double hi = h.q3 + fence_factor * iqr;
    IqrSplit out;
    for (double v : values) {
        if (v < lo || v > hi)
            out.removed.push_back(v);
        else
            out.kept.push_back(v);
    }
    return out;
}

Campaign remove_outlier_samples(const Campaign& c, double fence_factor) {
    if (c.samples.size() < 4) throw Error("remove_outlier_samples: campaign too short");
    std::vector<double> node, ref;
    node.reserve(c.samples.size());
    for (const auto& s : c.samples) {
        node.push_back(s.node_level);
        if (s.ref_level) ref.push_back(*s.ref_level);
    }
    const auto hn = stats::tukey_hinges(node);
    const double niqr = hn.q3 - hn.q1;
    const double nlo = hn.q1 - fence_factor * niqr;
    const double nhi = hn.q3 + fence_factor * niqr;

    double rlo = -std::numeric_limits<double>::infinity();
    double rhi = std::numeric_limits<double>::infinity();
    if (ref.size() >= 4) {
        const auto hr = stats::tukey_hinges(ref);
        const double riqr = hr.q3 - hr.q1;
        rlo = hr.q1 - fence_factor * riqr;
        rhi = hr.q3 + fence_factor * riqr;
    }

    Campaign out;
    out.id = c.id;
    out.meta = c.meta;
    out.lag_applied = c.lag_applied;
    for (const auto& s : c.samples) {
        if (s.node_level < nlo || s.node_level > nhi) continue;
        if (s.ref_level && (*s.ref_level < rlo || *s.ref_level > rhi)) continue;
        out.samples.push_back(s);
    }
    if (out.samples.empty()) throw Error("remove_outlier_samples: all samples removed");
    return out;
}

namespace {

struct LagScore {
    bool valid = false;
    double r = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
};

LagScore score_at_lag(std::span<const double> node, std::span<const double> ref, int lag) {
    const auto nn = static_cast<std::ptrdiff_t>(node.size());
    const auto nr = static_cast<std::ptrdiff_t>(ref.size());
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, lag);
    const std::ptrdiff_t hi = std::min(nn, nr + lag);
    LagScore sc;
    if (hi - lo < 30) return sc;
    double sn = 0, sr = 0;
    std::size_t cnt = 0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
        const double a = node[static_cast<std::size_t>(i)];
        const double b = ref[static_cast<std::size_t>(i - lag)];
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        sn += a;
        sr += b;
        ++cnt;
    }
    if (cnt < 30) return sc;
    const double mn = sn / static_cast<double>(cnt);
    const double mr = sr / static_cast<double>(cnt);
    double sab = 0, saa = 0, sbb = 0, abs_err = 0, sq_err = 0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) {
        const double a = node[static_cast<std::size_t>(i)];
        const double b = ref[static_cast<std::size_t>(i - lag)];
        if (!std::isfinite(a) || !std::isfinite(b)) continue;
        sab += (a - mn) * (b - mr);
        saa += (a - mn) * (a - mn);
        sbb += (b - mr) * (b - mr);
        abs_err += std::fabs(a - b);
        sq_err += (a - b) * (a - b);
    }
    if (saa <= 0.0 || sbb <= 0.0) return sc;
    sc.valid = true;
    sc.r = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
    sc.mae = abs_err / static_cast<double>(cnt);
    sc.rmse = std::sqrt(sq_err / static_cast<double>(cnt));
    return sc;
}

}  // namespace

LagEstimate estimate_lag(std::span<const double> node, std::span<const double> ref, int max_lag) {
    if (max_lag < 0) throw Error("estimate_lag: negative max_lag");
    const std::size_t need = 2 * static_cast<std::size_t>(max_lag) + 30;
    if (node.size() < need || ref.size() < need)
        throw Error("estimate_lag: insufficient overlap (need " + std::to_string(need) + " s)");

    LagEstimate best;
    bool found = false;
    // |lag| ascending so ties resolve toward the smallest shift.
    for (int a = 0; a <= max_lag; ++a) {
        for (const int lag : {a, -a}) {
            if (lag == 0 && a != 0) continue;
            const LagScore sc = score_at_lag(node, ref, lag);
            if (!sc.valid) continue;
            if (!found || sc.r > best.peak_correlation) {
                found = true;
                best.lag = lag;
                best.peak_correlation = sc.r;
                best.mae_at_lag = sc.mae;
                best.rmse_at_lag = sc.rmse;
            }
        }
    }
    if (!found) throw Error("estimate_lag: correlation undefined (zero variance in overlap)");
    best.at_boundary = std::abs(best.lag) == max_lag && max_lag > 0;
    return best;
}

LagEstimate estimate_lag(const Campaign& merged, int max_lag) {
    std::int64_t t0 = 0, t1 = 0;
    bool any = false;
    for (const auto& s : merged.samples) {
        if (!s.ref_level) continue;
        if (!any) {
            t0 = t1 = s.timestamp;
            any = true;
        } else {
            t0 = std::min(t0, s.timestamp);
            t1 = std::max(t1, s.timestamp);
        }
    }
    if (!any) throw Error("estimate_lag: no paired samples");
    const auto n = static_cast<std::size_t>(t1 - t0 + 1);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> node(n, nan), ref(n, nan);
    for (const auto& s : merged.samples) {
        if (s.timestamp < t0 || s.timestamp > t1) continue;
        const auto i = static_cast<std::size_t>(s.timestamp - t0);
        node[i] = s.node_level;
        if (s.ref_level) ref[i] = *s.ref_level;
    }
    return estimate_lag(node, ref, max_lag);
}

Campaign apply_lag(const Campaign& c, int lag) {
    if (c.samples.empty()) throw Error("apply_lag: empty campaign");
    if (lag == 0) return c;
    const std::int64_t span = c.samples.back().timestamp - c.samples.front().timestamp;
    if (std::abs(static_cast<std::int64_t>(lag)) > span)
        throw Error("apply_lag: lag exceeds campaign duration");

    std::unordered_map<std::int64_t, double> ref_by_time;
    for (const auto& s : c.samples)
        if (s.ref_level) ref_by_time.emplace(s.timestamp, *s.ref_level);

    Campaign out;
    out.id = c.id;
    out.meta = c.meta;
    out.lag_applied = c.lag_applied + lag;
    for (const auto& s : c.samples) {
        const auto it = ref_by_time.find(s.timestamp - lag);
        if (it == ref_by_time.end()) continue;
        GeoSample m = s;
        m.ref_level = it->second;
        out.samples.push_back(m);
    }
    if (out.samples.empty()) throw Error("apply_lag: shift leaves zero paired samples");
    return out;
}

std::vector<AlignedSeries> time_average(const Campaign& c, int window, std::size_t min_count,
                                        AverageMode mode) {
    if (window < 1) throw Error("time_average: window must be >= 1 s");
    struct Acc {
        double node = 0, ref = 0, lat = 0, lon = 0;
        std::size_t n = 0;
    };
    std::map<std::int64_t, Acc> acc;
    for (const auto& s : c.samples) {
        if (!s.ref_level) continue;
        std::int64_t start = s.timestamp / window * window;
        if (s.timestamp < 0 && s.timestamp % window != 0) start -= window;
        auto& a = acc[start];
        if (mode == AverageMode::Arithmetic) {
            a.node += s.node_level;
            a.ref += *s.ref_level;
        } else {
            a.node += std::pow(10.0, s.node_level / 10.0);
            a.ref += std::pow(10.0, *s.ref_level / 10.0);
        }
        a.lat += s.latitude;
        a.lon += s.longitude;
        ++a.n;
    }
    std::vector<AlignedSeries> out;
    for (const auto& [start, a] : acc) {
        if (a.n < min_count) continue;
        AlignedSeries w;
        w.window_start = start;
        w.sample_count = a.n;
        const double n = static_cast<double>(a.n);
        if (mode == AverageMode::Arithmetic) {
            w.node_mean = a.node / n;
            w.ref_mean = a.ref / n;
        } else {
            w.node_mean = 10.0 * std::log10(a.node / n);
            w.ref_mean = 10.0 * std::log10(a.ref / n);
        }
        w.latitude = a.lat / n;
        w.longitude = a.lon / n;
        w.lag_applied = c.lag_applied;
        out.push_back(std::move(w));
    }
    if (out.empty()) throw Error("time_average: no window meets min_count");
    return out;
}

void write_aligned_csv(const std::vector<AlignedSeries>& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write to " + path);
    out << "window_start,node_mean,ref_mean,count,velocity_mps,lag_applied\n";
    for (const auto& w : series) {
        out << w.window_start << "," << w.node_mean << "," << w.ref_mean << "," << w.sample_count
            << ",";
        if (const auto it = w.features.find("velocity_mps"); it != w.features.end())
            out << it->second;
        out << "," << w.lag_applied << "\n";
    }
    if (!out) throw Error("write failed: " + path);
}

}  // namespace noisecal
