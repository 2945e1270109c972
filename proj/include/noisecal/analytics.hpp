#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "noisecal/geo.hpp"
#include "noisecal/preprocess.hpp"
#include "noisecal/types.hpp"

namespace noisecal {

struct TemporalProfile {
    std::int64_t bucket = 0;  // seconds since local midnight, bucket start
    double mean_dba = 0.0;
    double variance = 0.0;  // population variance, dBA^2
    std::size_t count = 0;
    std::string group;  // e.g. "weekday-morning"
};

struct DistributionSummary {
    std::string label;
    double mean = 0.0;
    double variance = 0.0;  // population variance
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

struct DistributionDelta {
    double mean_diff = 0.0;  // a - b
    double var_ratio = 1.0;  // a / b
};

// Buckets calibrated levels by local time of day, grouped by
// "<day_class>-<session>". Bucket width must divide into a day.
std::vector<TemporalProfile> temporal_profile(std::span<const Campaign> campaigns,
                                              int bucket_seconds,
                                              int utc_offset_seconds = kDefaultUtcOffset);

std::tuple<DistributionSummary, DistributionSummary, DistributionDelta> compare_distributions(
    std::span<const double> a, std::span<const double> b, const std::string& label_a = "a",
    const std::string& label_b = "b");

struct HotspotCell {
    GridCellKey key;
    GridCell cell;
};

// Cells with mean >= threshold, sorted descending by mean.
std::vector<HotspotCell> hotspots(const NoiseGrid& g, double threshold_dba);

enum class Zone { Industrial, Commercial, Residential, Silence };
enum class Period { Day, Night };

Zone zone_from_name(const std::string& name);

// CPCB ambient noise limit, dBA Leq.
double standards_limit(Zone zone, Period period);

struct ExceedanceReport {
    Zone zone = Zone::Industrial;
    Period period = Period::Day;
    double limit = 0.0;
    double leq = 0.0;            // energetic aggregate of the input levels
    bool leq_exceeds = false;
    double fraction = 0.0;       // share of individual levels above the limit
    std::vector<std::size_t> exceedance_indices;
};

ExceedanceReport standards_check(std::span<const double> levels, Zone zone, Period period);

struct VelocityTrend {
    struct Bin {
        double velocity_lo = 0.0;  // bin start, m/s
        double mean_dba = 0.0;
        std::size_t count = 0;
    };
    std::vector<Bin> bins;
    double slope = 0.0;      // dBA per m/s
    double intercept = 0.0;
    double p_value = 1.0;    // two-tailed, of the velocity-level correlation
};

// Per-1 m/s-bin mean levels plus the straight-line slope of level vs
// velocity over velocity-augmented windows. use_ref selects the reference
// (calibrated) column; otherwise the node column.
VelocityTrend velocity_noise_trend(const std::vector<AlignedSeries>& series,
                                   double bin_width_mps = 1.0, bool use_ref = true);

}  // namespace noisecal
