#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace noisecal {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// SEN0232 measuring range.
inline constexpr double kLevelMin = 30.0;
inline constexpr double kLevelMax = 130.0;

// Campaign city default: IST (+05:30).
inline constexpr int kDefaultUtcOffset = 5 * 3600 + 30 * 60;

/// One timestamped, geotagged measurement pair.
struct GeoSample {
    std::int64_t timestamp = 0;  // UTC epoch seconds, 1 s resolution
    double latitude = 0.0;       // decimal degrees, WGS84
    double longitude = 0.0;
    double node_level = 0.0;     // dBA
    std::optional<double> ref_level;  // dBA, when a reference meter reading exists

    bool operator==(const GeoSample&) const = default;
};

struct CampaignMeta {
    std::string route = "default";
    std::string session = "all";        // morning / evening / all
    std::string day_class = "typical";  // weekday / weekend / festival / typical
};

struct Campaign {
    std::string id;
    std::vector<GeoSample> samples;  // sorted by timestamp
    CampaignMeta meta;
    int lag_applied = 0;  // seconds of ref shift already applied

    [[nodiscard]] std::size_t paired_count() const {
        std::size_t n = 0;
        for (const auto& s : samples) n += s.ref_level.has_value();
        return n;
    }
};

}  // namespace noisecal
