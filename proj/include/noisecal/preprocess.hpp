#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "noisecal/types.hpp"

namespace noisecal {

/// One lag-corrected, window-averaged paired observation.
struct AlignedSeries {
    std::int64_t window_start = 0;  // epoch seconds, multiple of the window
    double node_mean = 0.0;
    double ref_mean = 0.0;
    std::size_t sample_count = 0;
    double latitude = 0.0;   // centroid of contributing samples
    double longitude = 0.0;
    std::map<std::string, double> features;  // e.g. "velocity_mps"
    int lag_applied = 0;
};

struct LagEstimate {
    int lag = 0;                    // seconds; positive = node trails reference
    double peak_correlation = 0.0;  // Pearson r at that lag
    double mae_at_lag = 0.0;        // dBA
    double rmse_at_lag = 0.0;       // dBA
    bool at_boundary = false;       // best lag sits on the search-window edge
};

struct IqrSplit {
    std::vector<double> kept;     // input order preserved
    std::vector<double> removed;  // values outside [Q1 - k*IQR, Q3 + k*IQR]
};

// Tukey-hinge IQR fence filter. Requires at least 4 values.
IqrSplit remove_outliers_iqr(std::span<const double> values, double fence_factor);

// Applies the IQR filter independently to the node and reference level
// columns and drops every sample flagged in either.
Campaign remove_outlier_samples(const Campaign& c, double fence_factor);

// Series are on the same 1 Hz grid starting at the same second; NaN entries
// mark gaps and are excluded pairwise. Requires 2*max_lag + 30 s of overlap.
LagEstimate estimate_lag(std::span<const double> node, std::span<const double> ref, int max_lag);

// Builds the paired 1 Hz grids from a merged campaign and estimates the lag.
LagEstimate estimate_lag(const Campaign& merged, int max_lag);

// Shifts the reference column by `lag` seconds (node sample at t receives the
// reference reading originally at t - lag); samples losing their pair drop.
Campaign apply_lag(const Campaign& c, int lag);

enum class AverageMode { Arithmetic, Energetic };

// Fixed windows aligned to epoch multiples of `window`; only paired samples
// contribute; windows below min_count drop.
std::vector<AlignedSeries> time_average(const Campaign& c, int window, std::size_t min_count,
                                        AverageMode mode = AverageMode::Arithmetic);

// `window_start,node_mean,ref_mean,count,velocity_mps,lag_applied` rows.
void write_aligned_csv(const std::vector<AlignedSeries>& series, const std::string& path);

}  // namespace noisecal
