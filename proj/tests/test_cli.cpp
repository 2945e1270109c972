#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const std::string kCli = NOISECAL_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& leaf) {
    const fs::path p = fs::temp_directory_path() / "nc_cli" / leaf;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generation writes the three campaign artifacts plus a manifest") {
    const fs::path out = scratch("gen");
    REQUIRE(run("gen --scenario lab --duration 300 --seed 1 --out " + out.string()) == 0);
    CHECK(fs::exists(out / "node.csv"));
    CHECK(fs::exists(out / "ref.csv"));
    CHECK(fs::exists(out / "truth.json"));
    CHECK(fs::exists(out / "manifest.json"));
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest.at("config").at("scenario") == "lab");
    CHECK(manifest.at("config").at("seed") == 1);
    CHECK(manifest.contains("tool_version"));
}

TEST_CASE("calibration produces a full report and a reloadable model") {
    const fs::path gen = scratch("cal_gen"), cal = scratch("cal_out");
    REQUIRE(run("gen --scenario lab --duration 900 --seed 2 --out " + gen.string()) == 0);
    REQUIRE(run("calibrate --node " + (gen / "node.csv").string() + " --ref " +
                (gen / "ref.csv").string() + " --folds 5 --out " + cal.string()) == 0);
    const std::string report = slurp(cal / "report.csv");
    // header plus at least one row per family variant
    std::size_t rows = 0;
    for (const char ch : report) rows += ch == '\n';
    CHECK(rows >= 8);
    CHECK(report.find("SLR") != std::string::npos);
    CHECK(report.find("RFR") != std::string::npos);
    CHECK(fs::exists(cal / "best_model.json"));
    const auto summary = nlohmann::json::parse(slurp(cal / "summary.json"));
    CHECK(summary.at("windows").get<int>() > 50);
}

TEST_CASE("repeated runs with the same seed emit identical reports") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const std::string common = "calibrate --scenario lab --duration 600 --seed 5 --folds 5 --out ";
    REQUIRE(run(common + a.string()) == 0);
    REQUIRE(run(common + b.string()) == 0);
    CHECK(slurp(a / "report.csv") == slurp(b / "report.csv"));
    CHECK(slurp(a / "best_model.json") == slurp(b / "best_model.json"));
}

TEST_CASE("mapping emits GeoJSON and a hotspot table") {
    const fs::path out = scratch("map");
    REQUIRE(run("map --scenario mobile --duration 600 --seed 3 --threshold 85 --out " +
                out.string()) == 0);
    const auto doc = nlohmann::json::parse(slurp(out / "noise_grid.geojson"));
    CHECK(doc.at("type") == "FeatureCollection");
    CHECK(doc.at("features").size() > 0);
    const std::string hs = slurp(out / "hotspots.csv");
    CHECK(hs.rfind("row,col,", 0) == 0);
}

TEST_CASE("analysis emits the four report tables") {
    const fs::path out = scratch("an");
    REQUIRE(run("analyze --scenario mobile --duration 600 --seed 4 --zone commercial "
                "--period day --out " +
                out.string()) == 0);
    CHECK(fs::exists(out / "temporal_profiles.csv"));
    CHECK(fs::exists(out / "distributions.csv"));
    CHECK(fs::exists(out / "standards.csv"));
    CHECK(fs::exists(out / "velocity_trend.csv"));
    const std::string std_report = slurp(out / "standards.csv");
    CHECK(std_report.find("commercial,day,65") != std::string::npos);
}

TEST_CASE("a config file supplies defaults that flags override") {
    const fs::path out = scratch("cfg");
    fs::create_directories(out);
    const fs::path cfg = out / "cfg.json";
    {
        std::ofstream f(cfg);
        f << R"({"scenario": "lab", "duration": 300, "seed": 9})";
    }
    REQUIRE(run("gen --config " + cfg.string() + " --out " + (out / "run").string()) == 0);
    const auto manifest = nlohmann::json::parse(slurp(out / "run" / "manifest.json"));
    CHECK(manifest.at("config").at("scenario") == "lab");
    CHECK(manifest.at("config").at("duration") == 300);
    // the flag wins over the file
    REQUIRE(run("gen --config " + cfg.string() + " --duration 240 --out " +
                (out / "run2").string()) == 0);
    const auto m2 = nlohmann::json::parse(slurp(out / "run2" / "manifest.json"));
    CHECK(m2.at("config").at("duration") == 240);
}

TEST_CASE("usage and configuration mistakes exit with code 2") {
    CHECK(run("calibrate --input /definitely/not/there.csv --out /tmp/nc_cli/x") == 2);
    CHECK(run("analyze --scenario lab --duration 300 --zone bogus --out /tmp/nc_cli/x") == 2);
    CHECK(run("gen --scenario nonexistent --out /tmp/nc_cli/x") == 2);
    CHECK(run("no-such-subcommand") == 2);
    CHECK(run("calibrate --badflag 3") == 2);
}

TEST_CASE("the end-to-end pipeline lays out all four stage directories") {
    const fs::path out = scratch("pipe");
    REQUIRE(run("pipeline --scenario lab --duration 600 --seed 6 --folds 5 --out " +
                out.string()) == 0);
    CHECK(fs::exists(out / "gen" / "node.csv"));
    CHECK(fs::exists(out / "calibrate" / "report.csv"));
    CHECK(fs::exists(out / "map" / "noise_grid.geojson"));
    CHECK(fs::exists(out / "analyze" / "standards.csv"));
}
