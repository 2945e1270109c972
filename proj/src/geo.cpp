#include "noisecal/geo.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace noisecal {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

struct Projection {
    double lat0, lon0, coslat0;

    [[nodiscard]] std::pair<double, double> forward(double lat, double lon) const {
        return {kEarthRadiusM * coslat0 * (lon - lon0) * kDegToRad,
                kEarthRadiusM * (lat - lat0) * kDegToRad};
    }
    [[nodiscard]] std::pair<double, double> inverse(double x, double y) const {
        return {lat0 + y / kEarthRadiusM / kDegToRad,
                lon0 + x / (kEarthRadiusM * coslat0) / kDegToRad};
    }
};

struct BinPoint {
    double lat, lon, level;
};

NoiseGrid bin_points(const std::vector<BinPoint>& pts, double cell_size_m) {
    if (pts.empty()) throw Error("build_noise_grid: empty input");
    if (cell_size_m <= 0.0) throw Error("build_noise_grid: cell_size must be positive");

    double lat0 = 0.0, lon0 = 0.0;
    for (const auto& p : pts) {
        lat0 += p.lat;
        lon0 += p.lon;
    }
    lat0 /= static_cast<double>(pts.size());
    lon0 /= static_cast<double>(pts.size());
    const Projection proj{lat0, lon0, std::cos(lat0 * kDegToRad)};

    NoiseGrid g;
    g.cell_size = cell_size_m;
    g.origin_lat = lat0;
    g.origin_lon = lon0;
    struct Acc {
        double sum = 0.0, max = 0.0, lat = 0.0, lon = 0.0;
        std::size_t n = 0;
    };
    std::map<GridCellKey, Acc> acc;
    for (const auto& p : pts) {
        const auto [x, y] = proj.forward(p.lat, p.lon);
        const GridCellKey key{static_cast<std::int64_t>(std::floor(y / cell_size_m)),
                              static_cast<std::int64_t>(std::floor(x / cell_size_m))};
        auto& a = acc[key];
        a.sum += p.level;
        a.max = a.n == 0 ? p.level : std::max(a.max, p.level);
        a.lat += p.lat;
        a.lon += p.lon;
        ++a.n;
    }
    for (const auto& [key, a] : acc) {
        const double n = static_cast<double>(a.n);
        g.cells[key] = GridCell{a.sum / n, a.max, a.n, a.lat / n, a.lon / n};
    }
    return g;
}

}  // namespace

double haversine_m(double lat1, double lon1, double lat2, double lon2) {
    const double phi1 = lat1 * kDegToRad, phi2 = lat2 * kDegToRad;
    const double dphi = (lat2 - lat1) * kDegToRad;
    const double dlmb = (lon2 - lon1) * kDegToRad;
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(phi1) * std::cos(phi2) * std::sin(dlmb / 2) * std::sin(dlmb / 2);
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(a)));
}

VelocityTrace velocity_trace(const Campaign& c, double cap_mps) {
    if (c.samples.size() < 2) throw Error("velocity_trace: need at least 2 samples");
    VelocityTrace out;
    for (std::size_t i = 1; i < c.samples.size(); ++i) {
        const auto& a = c.samples[i - 1];
        const auto& b = c.samples[i];
        const double dt = static_cast<double>(b.timestamp - a.timestamp);
        if (dt <= 0.0) {
            ++out.skipped_nonpositive_dt;
            continue;
        }
        VelocityPoint p;
        p.timestamp = b.timestamp;  // velocity assigned to the later sample
        p.dt = dt;
        p.segment_distance = haversine_m(a.latitude, a.longitude, b.latitude, b.longitude);
        p.speed = p.segment_distance / dt;
        p.plausible = p.speed <= cap_mps;
        out.points.push_back(p);
    }
    if (out.points.empty()) throw Error("velocity_trace: fewer than 2 usable pairs");
    return out;
}

std::vector<AlignedSeries> join_velocity(const std::vector<AlignedSeries>& series,
                                         const std::vector<VelocityPoint>& v) {
    if (series.empty() || v.empty()) throw Error("join_velocity: empty input");
    std::vector<AlignedSeries> out = series;
    // Window length recovered from the smallest gap between sorted starts
    // (windows carry only their start; defaults to 10 s for a lone window).
    std::int64_t width = 10;
    if (series.size() > 1) {
        width = series[1].window_start - series[0].window_start;
        for (std::size_t i = 2; i < series.size(); ++i)
            width = std::min(width, series[i].window_start - series[i - 1].window_start);
        if (width <= 0) width = 10;
    }
    std::size_t joined = 0;
    for (auto& w : out) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const auto& p : v) {
            if (!p.plausible) continue;
            if (p.timestamp >= w.window_start && p.timestamp < w.window_start + width) {
                sum += p.speed;
                ++n;
            }
        }
        if (n > 0) {
            w.features["velocity_mps"] = sum / static_cast<double>(n);
            ++joined;
        }
    }
    if (joined == 0) throw Error("join_velocity: zero joinable windows");
    return out;
}

NoiseGrid build_noise_grid(const Campaign& c, double cell_size_m) {
    std::vector<BinPoint> pts;
    pts.reserve(c.samples.size());
    for (const auto& s : c.samples) pts.push_back({s.latitude, s.longitude, s.node_level});
    return bin_points(pts, cell_size_m);
}

NoiseGrid build_noise_grid_levels(const Campaign& c, const std::vector<double>& levels,
                                  double cell_size_m) {
    if (levels.size() != c.samples.size())
        throw Error("build_noise_grid_levels: level count mismatch");
    std::vector<BinPoint> pts;
    pts.reserve(c.samples.size());
    for (std::size_t i = 0; i < c.samples.size(); ++i)
        pts.push_back({c.samples[i].latitude, c.samples[i].longitude, levels[i]});
    return bin_points(pts, cell_size_m);
}

NoiseGrid build_noise_grid(const std::vector<AlignedSeries>& windows, double cell_size_m) {
    std::vector<BinPoint> pts;
    pts.reserve(windows.size());
    for (const auto& w : windows) pts.push_back({w.latitude, w.longitude, w.node_mean});
    return bin_points(pts, cell_size_m);
}

namespace {

std::string format_cut(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

}  // namespace

std::string band_label(double value, const std::vector<double>& thresholds) {
    if (thresholds.empty()) return "all";
    if (value < thresholds.front()) return "lt" + format_cut(thresholds.front());
    for (std::size_t i = 1; i < thresholds.size(); ++i)
        if (value < thresholds[i])
            return format_cut(thresholds[i - 1]) + "to" + format_cut(thresholds[i]);
    return "gt" + format_cut(thresholds.back());
}

void export_geojson(const NoiseGrid& g, const std::string& path,
                    const std::vector<double>& thresholds) {
    if (g.cells.empty()) throw Error("export_geojson: empty grid");
    using nlohmann::json;
    const Projection proj{g.origin_lat, g.origin_lon, std::cos(g.origin_lat * kDegToRad)};

    json features = json::array();
    for (const auto& [key, cell] : g.cells) {
        const double x0 = static_cast<double>(key.col) * g.cell_size;
        const double y0 = static_cast<double>(key.row) * g.cell_size;
        // counter-clockwise closed ring
        json ring = json::array();
        for (const auto& [dx, dy] : std::vector<std::pair<double, double>>{
                 {0, 0}, {g.cell_size, 0}, {g.cell_size, g.cell_size}, {0, g.cell_size}, {0, 0}}) {
            const auto [lat, lon] = proj.inverse(x0 + dx, y0 + dy);
            ring.push_back({lon, lat});
        }
        json feature;
        feature["type"] = "Feature";
        feature["geometry"] = {{"type", "Polygon"}, {"coordinates", json::array({ring})}};
        feature["properties"] = {{"mean_dba", cell.mean_dba},
                                 {"max_dba", cell.max_dba},
                                 {"count", cell.count},
                                 {"band", band_label(cell.mean_dba, thresholds)},
                                 {"row", key.row},
                                 {"col", key.col}};
        features.push_back(std::move(feature));
    }
    json doc;
    doc["type"] = "FeatureCollection";
    doc["features"] = std::move(features);

    std::ofstream out(path);
    if (!out) throw Error("cannot write to " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw Error("write failed: " + path);
}

}  // namespace noisecal
