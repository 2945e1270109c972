#include "noisecal/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "noisecal/geo.hpp"

namespace noisecal {

namespace {

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{seed, stream};
    return std::mt19937_64(seq);
}

struct RouteWalker {
    const RouteSpec& route;
    std::vector<double> seg_len;  // meters, closed loop
    double total_len = 0.0;

    explicit RouteWalker(const RouteSpec& r) : route(r) {
        if (r.waypoints.size() < 2) throw Error("generate_campaign: need >= 2 waypoints");
        const std::size_t n = r.waypoints.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& a = r.waypoints[i];
            const auto& b = r.waypoints[(i + 1) % n];
            seg_len.push_back(haversine_m(a.first, a.second, b.first, b.second));
            total_len += seg_len.back();
        }
    }

    // Position and polyline segment index at a travelled distance.
    void at(double dist, double& lat, double& lon, std::size_t& seg) const {
        if (total_len <= 0.0) {  // stationary route
            lat = route.waypoints[0].first;
            lon = route.waypoints[0].second;
            seg = 0;
            return;
        }
        double d = std::fmod(dist, total_len);
        if (d < 0.0) d += total_len;
        const std::size_t n = route.waypoints.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (d <= seg_len[i] || i + 1 == n) {
                const double f = seg_len[i] > 0.0 ? std::min(1.0, d / seg_len[i]) : 0.0;
                const auto& a = route.waypoints[i];
                const auto& b = route.waypoints[(i + 1) % n];
                lat = a.first + f * (b.first - a.first);
                lon = a.second + f * (b.second - a.second);
                seg = i;
                return;
            }
            d -= seg_len[i];
        }
    }
};

double speed_at(const RouteSpec& route, double t) {
    if (route.speed_profile.empty()) return 0.0;
    double cycle = 0.0;
    for (const auto& s : route.speed_profile) cycle += s.duration_s;
    if (cycle <= 0.0) return route.speed_profile.front().speed_mps;
    double u = std::fmod(t, cycle);
    if (u < 0.0) u += cycle;
    for (const auto& s : route.speed_profile) {
        if (u < s.duration_s) return s.speed_mps;
        u -= s.duration_s;
    }
    return route.speed_profile.back().speed_mps;
}

}  // namespace

SimResult generate_campaign(const RouteSpec& route, const SensorErrorModel& err, int duration_s,
                            std::uint64_t seed, std::int64_t start_epoch) {
    if (duration_s < 60) throw Error("generate_campaign: duration must be >= 60 s");
    if (err.outlier_rate < 0.0 || err.outlier_rate > 0.05)
        throw Error("generate_campaign: outlier_rate must be in [0, 0.05]");
    if (err.noise_sd < 0.0) throw Error("generate_campaign: negative noise_sd");
    const RouteWalker walker(route);

    const int pad = std::abs(err.lag);
    const int lo = -pad;                 // extended range [lo, hi)
    const int hi = duration_s + pad;
    const auto ext = static_cast<std::size_t>(hi - lo);
    auto at_ext = [&](int t) { return static_cast<std::size_t>(t - lo); };

    // Velocity and travelled distance over the extended range.
    std::vector<double> vel(ext), dist(ext);
    double d = 0.0;
    for (int t = lo; t < hi; ++t) {
        vel[at_ext(t)] = speed_at(route, static_cast<double>(t));
        dist[at_ext(t)] = d;
        d += vel[at_ext(t)];
    }

    // Ambient field: segment base + daily and sweep modulation + velocity
    // coupling + AR(1) walk + bursts.
    auto walk_rng = stream_rng(seed, 1);
    auto burst_rng = stream_rng(seed, 2);
    std::normal_distribution<double> walk_innov(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> ambient(ext);
    double walk = 0.0;
    int burst_left = 0;
    for (int t = lo; t < hi; ++t) {
        const std::size_t i = at_ext(t);
        double lat = 0, lon = 0;
        std::size_t seg = 0;
        walker.at(dist[i], lat, lon, seg);
        double level = seg < route.segment_levels.size() ? route.segment_levels[seg]
                                                         : route.base_level;
        if (route.tod_amplitude != 0.0) {
            std::int64_t tod = (start_epoch + t + kDefaultUtcOffset) % 86400;
            if (tod < 0) tod += 86400;
            level += route.tod_amplitude *
                     std::sin(2.0 * std::numbers::pi * static_cast<double>(tod) / 86400.0);
        }
        if (route.sweep_amplitude != 0.0 && route.sweep_period_s > 0.0)
            level += route.sweep_amplitude *
                     std::sin(2.0 * std::numbers::pi * static_cast<double>(t - lo) /
                              route.sweep_period_s);
        level += route.velocity_coupling * vel[i];
        if (route.ambient_walk_sd > 0.0) {
            walk = route.ambient_walk_phi * walk + route.ambient_walk_sd * walk_innov(walk_rng);
            level += walk;
        }
        if (route.burst_rate > 0.0) {
            if (burst_left > 0) {
                level += route.burst_magnitude;
                --burst_left;
            } else if (unit(burst_rng) < route.burst_rate) {
                burst_left = std::max(
                    1, static_cast<int>(std::round(-route.burst_duration_mean_s *
                                                   std::log(std::max(1e-12, unit(burst_rng))))));
                level += route.burst_magnitude;
            }
        }
        ambient[i] = std::clamp(level, route.level_min, route.level_max);
    }

    auto noise_rng = stream_rng(seed, 3);
    auto outlier_rng = stream_rng(seed, 4);
    std::normal_distribution<double> noise(0.0, 1.0);

    SimResult out;
    out.node.id = "sim-node";
    out.ref.id = "sim-ref";
    out.truth.err = err;
    out.truth.start_epoch = start_epoch;
    out.truth.velocity.resize(static_cast<std::size_t>(duration_s));
    out.truth.ambient.resize(static_cast<std::size_t>(duration_s));

    for (int t = 0; t < duration_s; ++t) {
        const std::size_t i = at_ext(t);
        double lat = 0, lon = 0;
        std::size_t seg = 0;
        walker.at(dist[i], lat, lon, seg);

        const double a_ref = ambient[i];
        GeoSample rs;
        rs.timestamp = start_epoch + t;
        rs.latitude = lat;
        rs.longitude = lon;
        rs.node_level = a_ref;
        rs.ref_level = a_ref;
        out.ref.samples.push_back(rs);

        const double a_delayed = ambient[at_ext(t - err.lag)];
        double node = err.gain * a_delayed + err.bias +
                      err.nonlinearity * (a_delayed - 80.0) * (a_delayed - 80.0) +
                      err.velocity_gain * vel[i];
        if (err.noise_sd > 0.0) node += err.noise_sd * noise(noise_rng);
        if (err.outlier_rate > 0.0 && unit(outlier_rng) < err.outlier_rate) {
            node += (unit(outlier_rng) < 0.5 ? -1.0 : 1.0) * err.outlier_magnitude;
            out.truth.outlier_seconds.push_back(static_cast<std::size_t>(t));
        }
        GeoSample ns;
        ns.timestamp = start_epoch + t;
        ns.latitude = lat;
        ns.longitude = lon;
        ns.node_level = std::clamp(node, kLevelMin, kLevelMax);
        out.node.samples.push_back(ns);

        out.truth.velocity[static_cast<std::size_t>(t)] = vel[i];
        out.truth.ambient[static_cast<std::size_t>(t)] = a_ref;
    }
    return out;
}

std::vector<Scenario> default_scenarios() {
    std::vector<Scenario> out;

    {
        Scenario lab;
        lab.name = "lab";
        lab.route.waypoints = {{17.4454, 78.3489}, {17.44541, 78.3489}};
        lab.route.speed_profile = {{3600.0, 0.0}};
        lab.route.base_level = 70.0;
        lab.route.sweep_amplitude = 18.0;
        lab.route.sweep_period_s = 700.0;
        lab.route.ambient_walk_sd = 0.3;
        lab.route.ambient_walk_phi = 0.99;
        lab.route.level_min = 50.0;
        lab.route.level_max = 90.0;
        lab.err = {12.0, 0.85, 0.02, 2.5, 3, 0.002, 30.0, 0.0};
        out.push_back(std::move(lab));
    }

    {
        Scenario mob;
        mob.name = "mobile";
        mob.route.waypoints = {{17.4400, 78.3400},
                               {17.4600, 78.3500},
                               {17.4700, 78.3700},
                               {17.4500, 78.3800},
                               {17.4300, 78.3600}};
        mob.route.segment_levels = {68.0, 82.0, 96.0, 74.0, 90.0};
        mob.route.speed_profile = {{120.0, 3.0}, {90.0, 8.0},  {150.0, 12.0}, {60.0, 5.0},
                                   {100.0, 14.0}, {80.0, 2.0}, {130.0, 10.0}, {70.0, 6.0}};
        mob.route.tod_amplitude = 2.0;
        mob.route.sweep_amplitude = 4.0;
        mob.route.sweep_period_s = 900.0;
        mob.route.velocity_coupling = -0.5;
        mob.route.ambient_walk_sd = 1.5;
        mob.route.ambient_walk_phi = 0.995;
        mob.route.level_min = 45.0;
        mob.route.level_max = 112.0;
        mob.err = {5.0, 0.95, 0.015, 3.0, 7, 0.003, 25.0, 0.4};
        out.push_back(std::move(mob));
    }

    {
        Scenario fest = out.back();
        fest.name = "festival";
        fest.route.burst_rate = 0.008;
        fest.route.burst_magnitude = 16.0;
        fest.route.burst_duration_mean_s = 5.0;
        out.push_back(std::move(fest));
    }
    return out;
}

Scenario scenario_by_name(const std::string& name) {
    for (auto& s : default_scenarios())
        if (s.name == name) return s;
    throw Error("unknown scenario: " + name);
}

void write_truth(const GroundTruth& truth, const std::string& path) {
    nlohmann::json doc;
    doc["start_epoch"] = truth.start_epoch;
    doc["error_model"] = {{"bias", truth.err.bias},
                          {"gain", truth.err.gain},
                          {"nonlinearity", truth.err.nonlinearity},
                          {"noise_sd", truth.err.noise_sd},
                          {"lag", truth.err.lag},
                          {"outlier_rate", truth.err.outlier_rate},
                          {"outlier_magnitude", truth.err.outlier_magnitude},
                          {"velocity_gain", truth.err.velocity_gain}};
    doc["velocity"] = truth.velocity;
    doc["outlier_seconds"] = truth.outlier_seconds;

    std::ofstream out(path);
    if (!out) throw Error("cannot write to " + path);
    out << doc.dump() << "\n";
    if (!out) throw Error("write failed: " + path);
}

}  // namespace noisecal
