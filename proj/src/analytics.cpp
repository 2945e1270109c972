#include "noisecal/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "noisecal/stats.hpp"

namespace noisecal {

std::vector<TemporalProfile> temporal_profile(std::span<const Campaign> campaigns,
                                              int bucket_seconds, int utc_offset_seconds) {
    if (campaigns.empty()) throw Error("temporal_profile: no campaigns");
    if (bucket_seconds < 1 || 86400 % bucket_seconds != 0)
        throw Error("temporal_profile: bucket must divide a day evenly");

    std::map<std::pair<std::string, std::int64_t>, std::vector<double>> groups;
    for (const auto& c : campaigns) {
        const std::string label = c.meta.day_class + "-" + c.meta.session;
        for (const auto& s : c.samples) {
            std::int64_t tod = (s.timestamp + utc_offset_seconds) % 86400;
            if (tod < 0) tod += 86400;
            const std::int64_t bucket = tod / bucket_seconds * bucket_seconds;
            groups[{label, bucket}].push_back(s.node_level);
        }
    }
    if (groups.empty()) throw Error("temporal_profile: empty selection");

    std::vector<TemporalProfile> out;
    for (const auto& [key, values] : groups) {
        TemporalProfile p;
        p.group = key.first;
        p.bucket = key.second;
        p.count = values.size();
        p.mean_dba = stats::mean(values);
        p.variance = stats::variance_pop(values);
        out.push_back(std::move(p));
    }
    return out;
}

std::tuple<DistributionSummary, DistributionSummary, DistributionDelta> compare_distributions(
    std::span<const double> a, std::span<const double> b, const std::string& label_a,
    const std::string& label_b) {
    if (a.empty() || b.empty()) throw Error("compare_distributions: empty input");
    auto summarize = [](std::span<const double> v, const std::string& label) {
        DistributionSummary s;
        s.label = label;
        s.mean = stats::mean(v);
        s.variance = stats::variance_pop(v);
        s.min = *std::min_element(v.begin(), v.end());
        s.max = *std::max_element(v.begin(), v.end());
        s.count = v.size();
        return s;
    };
    const auto sa = summarize(a, label_a);
    const auto sb = summarize(b, label_b);
    DistributionDelta d;
    d.mean_diff = sa.mean - sb.mean;
    d.var_ratio = sb.variance > 0.0 ? sa.variance / sb.variance
                                    : std::numeric_limits<double>::infinity();
    if (sa.variance == 0.0 && sb.variance == 0.0) d.var_ratio = 1.0;
    return {sa, sb, d};
}

std::vector<HotspotCell> hotspots(const NoiseGrid& g, double threshold_dba) {
    if (g.cells.empty()) throw Error("hotspots: empty grid");
    std::vector<HotspotCell> out;
    for (const auto& [key, cell] : g.cells)
        if (cell.mean_dba >= threshold_dba) out.push_back({key, cell});
    std::stable_sort(out.begin(), out.end(), [](const HotspotCell& a, const HotspotCell& b) {
        return a.cell.mean_dba > b.cell.mean_dba;
    });
    return out;
}

Zone zone_from_name(const std::string& name) {
    std::string l = name;
    for (char& c : l) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (l == "industrial") return Zone::Industrial;
    if (l == "commercial") return Zone::Commercial;
    if (l == "residential") return Zone::Residential;
    if (l == "silence") return Zone::Silence;
    throw Error("unknown zone: " + name);
}

double standards_limit(Zone zone, Period period) {
    const bool day = period == Period::Day;
    switch (zone) {
        case Zone::Industrial: return day ? 75.0 : 70.0;
        case Zone::Commercial: return day ? 65.0 : 55.0;
        case Zone::Residential: return day ? 55.0 : 45.0;
        case Zone::Silence: return day ? 50.0 : 40.0;
    }
    throw Error("unknown zone");
}

ExceedanceReport standards_check(std::span<const double> levels, Zone zone, Period period) {
    if (levels.empty()) throw Error("standards_check: empty input");
    ExceedanceReport r;
    r.zone = zone;
    r.period = period;
    r.limit = standards_limit(zone, period);
    r.leq = stats::energetic_mean(levels);
    r.leq_exceeds = r.leq > r.limit;
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] > r.limit) r.exceedance_indices.push_back(i);
    r.fraction =
        static_cast<double>(r.exceedance_indices.size()) / static_cast<double>(levels.size());
    return r;
}

VelocityTrend velocity_noise_trend(const std::vector<AlignedSeries>& series, double bin_width_mps,
                                   bool use_ref) {
    std::vector<double> vel, dba;
    for (const auto& w : series) {
        const auto it = w.features.find("velocity_mps");
        if (it == w.features.end()) continue;
        vel.push_back(it->second);
        dba.push_back(use_ref ? w.ref_mean : w.node_mean);
    }
    if (vel.size() < 10) throw Error("velocity_noise_trend: need >= 10 velocity windows");

    VelocityTrend t;
    std::map<std::int64_t, std::pair<double, std::size_t>> bins;
    for (std::size_t i = 0; i < vel.size(); ++i) {
        const auto b = static_cast<std::int64_t>(std::floor(vel[i] / bin_width_mps));
        auto& acc = bins[b];
        acc.first += dba[i];
        ++acc.second;
    }
    if (bins.size() < 2) throw Error("velocity_noise_trend: all velocities in a single bin");
    for (const auto& [b, acc] : bins)
        t.bins.push_back({static_cast<double>(b) * bin_width_mps,
                          acc.first / static_cast<double>(acc.second), acc.second});

    const double mv = stats::mean(vel);
    const double md = stats::mean(dba);
    double svv = 0.0, svd = 0.0;
    for (std::size_t i = 0; i < vel.size(); ++i) {
        svv += (vel[i] - mv) * (vel[i] - mv);
        svd += (vel[i] - mv) * (dba[i] - md);
    }
    if (svv <= 0.0) throw Error("velocity_noise_trend: zero velocity variance");
    t.slope = svd / svv;
    t.intercept = md - t.slope * mv;
    const auto r = stats::pearson(vel, dba);
    t.p_value = r ? stats::pearson_p_value(*r, vel.size()) : 1.0;
    return t;
}

}  // namespace noisecal
