#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "noisecal/ingest.hpp"

using namespace noisecal;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

}  // namespace

TEST_CASE("epoch conversion matches a known instant") {
    // 2024-05-01 09:00:00 at UTC+05:30
    CHECK(civil_to_epoch(2024, 5, 1, 9, 0, 0, kDefaultUtcOffset) == 1714534200);
    CHECK(format_local_datetime(1714534200, kDefaultUtcOffset) == "01-05-2024 09:00:00");
}

TEST_CASE("both timestamp separators parse to the same instant") {
    const std::string header = "datetime,latitude,longitude,node_dba\n";
    const auto colw = write_temp("nc_colon.csv", header + "01:05:2024 09:00:00,17.4,78.3,62.5\n");
    const auto dashw = write_temp("nc_dash.csv", header + "01-05-2024 09:00:00,17.4,78.3,62.5\n");
    const auto a = parse_log(colw.string(), LogFormat::NodeCsv);
    const auto b = parse_log(dashw.string(), LogFormat::NodeCsv);
    REQUIRE(a.campaign.samples.size() == 1);
    CHECK(a.campaign.samples[0].timestamp == 1714534200);
    CHECK(a.campaign.samples[0].timestamp == b.campaign.samples[0].timestamp);
    CHECK(a.campaign.samples[0].node_level == doctest::Approx(62.5));
    CHECK_FALSE(a.campaign.samples[0].ref_level.has_value());
}

TEST_CASE("UTC offset shifts the interpreted instant") {
    const std::string body =
        "datetime,latitude,longitude,node_dba\n01-05-2024 09:00:00,17.4,78.3,60.0\n";
    const auto p = write_temp("nc_tz.csv", body);
    const auto ist = parse_log(p.string(), LogFormat::NodeCsv, 19800);
    const auto utc = parse_log(p.string(), LogFormat::NodeCsv, 0);
    CHECK(utc.campaign.samples[0].timestamp - ist.campaign.samples[0].timestamp == 19800);
}

TEST_CASE("malformed rows become rejects with line numbers") {
    const auto p = write_temp("nc_bad.csv",
                              "datetime,latitude,longitude,node_dba\n"
                              "01-05-2024 09:00:00,17.4,78.3,62.5\n"
                              "32-05-2024 09:00:01,17.4,78.3,62.5\n"
                              "01-05-2024 09:00:02,17.4,78.3,not_a_number\n"
                              "01-05-2024 09:00:03,17.4,78.3,64.0\n");
    const auto r = parse_log(p.string(), LogFormat::NodeCsv);
    CHECK(r.total_rows == 4);
    CHECK(r.campaign.samples.size() == 2);
    REQUIRE(r.rejects.size() == 2);
    CHECK(r.rejects[0].line == 3);
    CHECK(r.rejects[1].line == 4);
    CHECK_FALSE(r.rejects[0].reason.empty());
}

TEST_CASE("a majority of bad rows aborts the parse") {
    const auto p = write_temp("nc_worse.csv",
                              "datetime,latitude,longitude,node_dba\n"
                              "01-05-2024 09:00:00,17.4,78.3,62.5\n"
                              "bad,row,here,x\n"
                              "another,bad,row,x\n");
    CHECK_THROWS_AS(parse_log(p.string(), LogFormat::NodeCsv), Error);
}

TEST_CASE("wrong header for the declared format aborts") {
    const auto p = write_temp("nc_hdr.csv",
                              "time,lat,lon,level\n01-05-2024 09:00:00,17.4,78.3,62.5\n");
    CHECK_THROWS_AS(parse_log(p.string(), LogFormat::NodeCsv), Error);
    CHECK_THROWS_AS(parse_log("/nonexistent/file.csv", LogFormat::NodeCsv), Error);
}

TEST_CASE("rows are sorted by timestamp after parsing") {
    const auto p = write_temp("nc_sort.csv",
                              "datetime,latitude,longitude,node_dba\n"
                              "01-05-2024 09:00:05,17.4,78.3,65.0\n"
                              "01-05-2024 09:00:01,17.4,78.3,61.0\n"
                              "01-05-2024 09:00:03,17.4,78.3,63.0\n");
    const auto r = parse_log(p.string(), LogFormat::NodeCsv);
    REQUIRE(r.campaign.samples.size() == 3);
    CHECK(r.campaign.samples[0].node_level == doctest::Approx(61.0));
    CHECK(r.campaign.samples[2].node_level == doctest::Approx(65.0));
}

TEST_CASE("merged round trip preserves every field") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> lat(17.0, 18.0), lon(78.0, 79.0), lvl(40.0, 110.0);
    Campaign c;
    c.id = "rt";
    std::int64_t t = 1714534200;
    for (int i = 0; i < 200; ++i) {
        GeoSample s;
        s.timestamp = t++;
        // quantize to the wire precision so the round trip is exact
        s.latitude = std::round(lat(rng) * 1e4) / 1e4;
        s.longitude = std::round(lon(rng) * 1e4) / 1e4;
        s.node_level = std::round(lvl(rng) * 10) / 10;
        s.ref_level = std::round(lvl(rng) * 10) / 10;
        c.samples.push_back(s);
    }
    const fs::path p = fs::temp_directory_path() / "nc_roundtrip.csv";
    write_campaign(c, p.string());
    const auto back = parse_log(p.string(), LogFormat::MergedCsv);
    REQUIRE(back.campaign.samples.size() == c.samples.size());
    CHECK(back.rejects.empty());
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        CHECK(back.campaign.samples[i] == c.samples[i]);
    }
}

TEST_CASE("merged format tolerates a missing reference field") {
    const auto p = write_temp("nc_gap.csv",
                              "datetime,latitude,longitude,node_dba,ref_dba\n"
                              "01-05-2024 09:00:00,17.4,78.3,62.5,64.0\n"
                              "01-05-2024 09:00:01,17.4,78.3,63.5,\n");
    const auto r = parse_log(p.string(), LogFormat::MergedCsv);
    REQUIRE(r.campaign.samples.size() == 2);
    CHECK(r.campaign.samples[0].ref_level.has_value());
    CHECK_FALSE(r.campaign.samples[1].ref_level.has_value());
    CHECK(r.campaign.paired_count() == 1);
}

TEST_CASE("stream merge pairs identical seconds and counts the rest") {
    Campaign node, ref;
    for (int i = 0; i < 10; ++i) {
        GeoSample s;
        s.timestamp = 1000 + i;
        s.node_level = 60.0 + i;
        node.samples.push_back(s);
    }
    for (int i = 5; i < 15; ++i) {
        GeoSample s;
        s.timestamp = 1000 + i;
        s.node_level = 70.0 + i;  // reference stream stores its level here
        s.ref_level = 70.0 + i;
        ref.samples.push_back(s);
    }
    const auto m = merge_streams(node, ref);
    CHECK(m.campaign.paired_count() == 5);
    CHECK(m.unmatched_node == 5);
    CHECK(m.unmatched_ref == 5);
    for (const auto& s : m.campaign.samples) {
        if (s.ref_level) CHECK(*s.ref_level == doctest::Approx(s.node_level + 10.0));
    }
}

TEST_CASE("merging disjoint time ranges fails") {
    Campaign node, ref;
    GeoSample a, b;
    a.timestamp = 1000;
    b.timestamp = 5000;
    node.samples.push_back(a);
    ref.samples.push_back(b);
    CHECK_THROWS_AS(merge_streams(node, ref), Error);
}

TEST_CASE("reference-only wire format round trips") {
    Campaign c;
    GeoSample s;
    s.timestamp = 1714534200;
    s.latitude = 17.44;
    s.longitude = 78.34;
    s.node_level = 72.5;
    s.ref_level = 72.5;
    c.samples.push_back(s);
    const fs::path p = fs::temp_directory_path() / "nc_refwire.csv";
    write_campaign(c, p.string(), LogFormat::RefCsv, kDefaultUtcOffset);
    const auto back = parse_log(p.string(), LogFormat::RefCsv);
    REQUIRE(back.campaign.samples.size() == 1);
    CHECK(back.campaign.samples[0].ref_level.has_value());
    CHECK(*back.campaign.samples[0].ref_level == doctest::Approx(72.5));
}
