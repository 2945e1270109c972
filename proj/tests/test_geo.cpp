#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include <json.hpp>

#include "noisecal/analytics.hpp"
#include "noisecal/geo.hpp"

using namespace noisecal;
namespace fs = std::filesystem;

namespace {

Campaign cluster_campaign() {
    // two tight clusters ~500 m apart in latitude
    Campaign c;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> jitter(-1e-4, 1e-4);
    for (int i = 0; i < 40; ++i) {
        GeoSample s;
        s.timestamp = 1000 + i;
        const bool south = i < 20;
        s.latitude = (south ? 17.4400 : 17.4445) + jitter(rng);
        s.longitude = 78.3400 + jitter(rng);
        s.node_level = south ? 65.0 : 95.0;
        c.samples.push_back(s);
    }
    return c;
}

}  // namespace

TEST_CASE("haversine distance at a known scale") {
    // 0.001 degrees of latitude is ~111.19 m everywhere
    CHECK(haversine_m(0.0, 0.0, 0.001, 0.0) == doctest::Approx(111.19).epsilon(1e-3));
    CHECK(haversine_m(17.44, 78.34, 17.44, 78.34) == doctest::Approx(0.0));
}

TEST_CASE("haversine is symmetric and satisfies the triangle inequality") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> lat(-60.0, 60.0), lon(-180.0, 180.0);
    for (int rep = 0; rep < 100; ++rep) {
        const double a[2]{lat(rng), lon(rng)}, b[2]{lat(rng), lon(rng)}, c[2]{lat(rng), lon(rng)};
        const double ab = haversine_m(a[0], a[1], b[0], b[1]);
        const double ba = haversine_m(b[0], b[1], a[0], a[1]);
        const double bc = haversine_m(b[0], b[1], c[0], c[1]);
        const double ac = haversine_m(a[0], a[1], c[0], c[1]);
        CHECK(ab == doctest::Approx(ba));
        CHECK(ac <= ab + bc + 1e-6);
    }
}

TEST_CASE("constant motion recovers the planted speed") {
    Campaign c;
    const double step_deg = 5.0 / 111194.93;  // ~5 m per second of latitude
    for (int i = 0; i < 120; ++i) {
        GeoSample s;
        s.timestamp = 1000 + i;
        s.latitude = 17.44 + step_deg * i;
        s.longitude = 78.34;
        s.node_level = 70.0;
        c.samples.push_back(s);
    }
    const VelocityTrace tr = velocity_trace(c);
    REQUIRE(tr.points.size() == 119);
    for (const auto& p : tr.points) {
        CHECK(p.speed == doctest::Approx(5.0).epsilon(0.005));
        CHECK(p.plausible);
        CHECK(p.dt == doctest::Approx(1.0));
    }
}

TEST_CASE("implausible jumps are flagged, zero-dt pairs skipped") {
    Campaign c;
    for (int i = 0; i < 5; ++i) {
        GeoSample s;
        s.timestamp = 1000 + (i == 2 ? 1 : i);  // a duplicated second
        s.latitude = 17.44 + (i == 4 ? 0.1 : 0.0);  // ~11 km jump at the end
        s.longitude = 78.34;
        s.node_level = 70.0;
        c.samples.push_back(s);
    }
    const VelocityTrace tr = velocity_trace(c);
    CHECK(tr.skipped_nonpositive_dt == 1);
    REQUIRE_FALSE(tr.points.empty());
    CHECK_FALSE(tr.points.back().plausible);
}

TEST_CASE("velocity joins onto averaged windows") {
    std::vector<AlignedSeries> windows(2);
    windows[0].window_start = 1000;
    windows[1].window_start = 1010;
    std::vector<VelocityPoint> pts;
    for (int t = 1000; t < 1010; ++t) pts.push_back({t, 4.0, 4.0, 1.0, true});
    for (int t = 1010; t < 1020; ++t) pts.push_back({t, 8.0, 8.0, 1.0, true});
    const auto joined = join_velocity(windows, pts);
    REQUIRE(joined.size() == 2);
    CHECK(joined[0].features.at("velocity_mps") == doctest::Approx(4.0));
    CHECK(joined[1].features.at("velocity_mps") == doctest::Approx(8.0));
}

TEST_CASE("two separated clusters land in distinct cells, mass conserved") {
    const Campaign c = cluster_campaign();
    const NoiseGrid g = build_noise_grid(c, 100.0);
    CHECK(g.cells.size() >= 2);
    std::size_t total = 0;
    for (const auto& [key, cell] : g.cells) total += cell.count;
    CHECK(total == c.samples.size());
    // the louder cluster's cell mean must sit near 95
    double top = 0.0;
    for (const auto& [key, cell] : g.cells) top = std::max(top, cell.mean_dba);
    CHECK(top == doctest::Approx(95.0).epsilon(1e-9));
}

TEST_CASE("grid construction is invariant to sample order") {
    Campaign c = cluster_campaign();
    const NoiseGrid a = build_noise_grid(c, 100.0);
    std::mt19937_64 rng(47);
    std::shuffle(c.samples.begin(), c.samples.end(), rng);
    const NoiseGrid b = build_noise_grid(c, 100.0);
    REQUIRE(a.cells.size() == b.cells.size());
    for (const auto& [key, cell] : a.cells) {
        const auto it = b.cells.find(key);
        REQUIRE(it != b.cells.end());
        CHECK(cell.count == it->second.count);
        CHECK(cell.mean_dba == doctest::Approx(it->second.mean_dba).epsilon(1e-12));
    }
}

TEST_CASE("band labels follow the thresholds") {
    const std::vector<double> th{75.0, 90.0};
    CHECK(band_label(60.0, th) == "lt75");
    CHECK(band_label(75.0, th) == "75to90");
    CHECK(band_label(89.9, th) == "75to90");
    CHECK(band_label(90.0, th) == "gt90");
}

TEST_CASE("grid export is valid GeoJSON with closed counter-clockwise rings") {
    const Campaign c = cluster_campaign();
    const NoiseGrid g = build_noise_grid(c, 100.0);
    const fs::path p = fs::temp_directory_path() / "nc_grid.geojson";
    export_geojson(g, p.string());
    std::ifstream in(p);
    const nlohmann::json doc = nlohmann::json::parse(in);
    CHECK(doc.at("type") == "FeatureCollection");
    REQUIRE(doc.at("features").size() == g.cells.size());
    for (const auto& f : doc.at("features")) {
        CHECK(f.at("geometry").at("type") == "Polygon");
        const auto& ring = f.at("geometry").at("coordinates").at(0);
        REQUIRE(ring.size() == 5);
        CHECK(ring.front() == ring.back());
        // shoelace area must be positive (counter-clockwise)
        double area = 0.0;
        for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
            const double x0 = ring[i][0], y0 = ring[i][1];
            const double x1 = ring[i + 1][0], y1 = ring[i + 1][1];
            area += x0 * y1 - x1 * y0;
        }
        CHECK(area > 0.0);
        const auto& props = f.at("properties");
        CHECK(props.contains("mean_dba"));
        CHECK(props.contains("band"));
        CHECK(props.at("count").get<int>() > 0);
    }
}

TEST_CASE("hotspots are the cells at or above the threshold, loudest first") {
    const Campaign c = cluster_campaign();
    const NoiseGrid g = build_noise_grid(c, 100.0);
    const auto hs = hotspots(g, 90.0);
    REQUIRE_FALSE(hs.empty());
    for (std::size_t i = 0; i + 1 < hs.size(); ++i)
        CHECK(hs[i].cell.mean_dba >= hs[i + 1].cell.mean_dba);
    for (const auto& h : hs) CHECK(h.cell.mean_dba >= 90.0);
    CHECK(hotspots(g, 200.0).empty());
}
