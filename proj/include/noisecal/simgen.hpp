#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "noisecal/types.hpp"

namespace noisecal {

/// Node distortion relative to the reference meter.
struct SensorErrorModel {
    double bias = 0.0;           // dBA
    double gain = 1.0;
    double nonlinearity = 0.0;   // coefficient on (L - 80)^2, per dBA
    double noise_sd = 0.0;       // dBA, Gaussian
    int lag = 0;                 // seconds the node trails the reference
    double outlier_rate = 0.0;   // per-second probability, <= 0.05
    double outlier_magnitude = 0.0;  // dBA
    double velocity_gain = 0.0;  // dBA per m/s picked up by the node mic (wind)
};

struct SpeedSegment {
    double duration_s = 60.0;
    double speed_mps = 0.0;
};

struct RouteSpec {
    std::vector<std::pair<double, double>> waypoints;  // lat, lon; cycled
    std::vector<SpeedSegment> speed_profile;           // cycled
    std::vector<double> segment_levels;  // base dBA per polyline segment
    double base_level = 70.0;            // fallback when segment_levels empty
    double tod_amplitude = 0.0;          // daily sinusoidal modulation, dBA
    double sweep_amplitude = 0.0;        // fast sinusoidal sweep, dBA
    double sweep_period_s = 600.0;
    double velocity_coupling = 0.0;      // dBA per m/s in the ambient field
    double ambient_walk_sd = 0.0;        // AR(1) innovation sd, dBA
    double ambient_walk_phi = 0.995;
    double burst_rate = 0.0;             // per-second burst start probability
    double burst_magnitude = 0.0;        // dBA added while a burst is active
    double burst_duration_mean_s = 3.0;
    double level_min = 32.0;             // ambient clamp
    double level_max = 128.0;
};

struct GroundTruth {
    SensorErrorModel err;
    std::int64_t start_epoch = 0;
    std::vector<double> velocity;           // per second, m/s
    std::vector<double> ambient;            // per second, dBA (reference truth)
    std::vector<std::size_t> outlier_seconds;  // indices of injected outliers
};

struct SimResult {
    Campaign node;
    Campaign ref;
    GroundTruth truth;
};

// 2024-05-01 09:00 IST.
inline constexpr std::int64_t kDefaultStartEpoch = 1714534200;

// 1 Hz reference = ambient field along the route; node = distorted, delayed,
// noisy copy with injected outliers. Deterministic per seed.
SimResult generate_campaign(const RouteSpec& route, const SensorErrorModel& err, int duration_s,
                            std::uint64_t seed, std::int64_t start_epoch = kDefaultStartEpoch);

struct Scenario {
    std::string name;
    RouteSpec route;
    SensorErrorModel err;
};

// "lab" (narrow 50-90 dBA, stationary), "mobile" (wide range,
// velocity-coupled), "festival" (burst events on top of mobile).
std::vector<Scenario> default_scenarios();

Scenario scenario_by_name(const std::string& name);

// Structured truth document (JSON).
void write_truth(const GroundTruth& truth, const std::string& path);

}  // namespace noisecal
