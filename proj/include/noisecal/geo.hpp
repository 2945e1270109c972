#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "noisecal/preprocess.hpp"
#include "noisecal/types.hpp"

namespace noisecal {

inline constexpr double kEarthRadiusM = 6371008.8;
inline constexpr double kDefaultSpeedCapMps = 42.0;  // ~150 km/h

// Great-circle distance in meters.
double haversine_m(double lat1, double lon1, double lat2, double lon2);

struct VelocityPoint {
    std::int64_t timestamp = 0;     // later timestamp of the pair
    double speed = 0.0;             // m/s
    double segment_distance = 0.0;  // meters
    double dt = 0.0;                // seconds
    bool plausible = true;          // speed <= cap
};

struct VelocityTrace {
    std::vector<VelocityPoint> points;
    std::size_t skipped_nonpositive_dt = 0;
};

// Consecutive-pair haversine speed; pairs with dt <= 0 skipped and counted,
// speeds above the cap flagged implausible.
VelocityTrace velocity_trace(const Campaign& c, double cap_mps = kDefaultSpeedCapMps);

// Attaches "velocity_mps" = mean plausible speed inside each window. Windows
// without a plausible point are returned without the feature; building a
// velocity-augmented dataset then drops them (see make_dataset).
std::vector<AlignedSeries> join_velocity(const std::vector<AlignedSeries>& series,
                                         const std::vector<VelocityPoint>& v);

struct GridCellKey {
    std::int64_t row = 0;
    std::int64_t col = 0;
    auto operator<=>(const GridCellKey&) const = default;
};

struct GridCell {
    double mean_dba = 0.0;
    double max_dba = 0.0;
    std::size_t count = 0;
    double centroid_lat = 0.0;
    double centroid_lon = 0.0;
};

struct NoiseGrid {
    double cell_size = 100.0;  // meters
    double origin_lat = 0.0;   // projection anchor (campaign centroid)
    double origin_lon = 0.0;
    std::map<GridCellKey, GridCell> cells;
};

// Local equirectangular projection about the centroid; cell index is
// floor(projected / cell_size).
NoiseGrid build_noise_grid(const Campaign& c, double cell_size_m = 100.0);
NoiseGrid build_noise_grid(const std::vector<AlignedSeries>& windows, double cell_size_m = 100.0);

// Optionally replace the binned levels: calibrated campaigns are binned from
// precomputed level vectors aligned with the samples.
NoiseGrid build_noise_grid_levels(const Campaign& c, const std::vector<double>& levels,
                                  double cell_size_m = 100.0);

// RFC 7946 FeatureCollection of cell polygons with properties
// {mean_dba, max_dba, count, band}; bands named from the threshold cut
// points (defaults 75 and 90 dBA: "lt75", "75to90", "gt90").
void export_geojson(const NoiseGrid& g, const std::string& path,
                    const std::vector<double>& thresholds = {75.0, 90.0});

std::string band_label(double value, const std::vector<double>& thresholds);

}  // namespace noisecal
