#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisecal/analytics.hpp"
#include "noisecal/calibrate.hpp"
#include "noisecal/geo.hpp"
#include "noisecal/ingest.hpp"
#include "noisecal/models.hpp"
#include "noisecal/preprocess.hpp"
#include "noisecal/simgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace noisecal;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string config_path;
    std::string out_dir = "run";

    std::vector<std::string> inputs;     // merged CSVs
    std::vector<std::string> day_classes;
    std::vector<std::string> sessions;
    std::string node_path;
    std::string ref_path;
    std::string scenario;

    int duration = 20000;
    std::uint64_t seed = 0;

    int window = 10;         // averaging window, s
    double fence = 1.5;      // IQR fence factor
    int max_lag = 120;       // lag search window, s
    int min_count = 5;
    std::string family = "all";
    int folds = 10;
    bool energetic = false;
    bool block_folds = false;

    double cell_size = 100.0;
    double hotspot_threshold = 90.0;
    std::string model_path;  // calibration model for map
    bool raw = false;

    std::string zone = "commercial";
    std::string period = "day";
    int bucket = 3600;
};

// ---- small filesystem helpers ----

void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw Error("cannot write to " + tmp.string());
        out << content;
        if (!out) throw Error("write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return fnv1a_hex(ss.str());
}

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", *v);
    return buf;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

json config_json(const Options& o, const std::string& subcommand) {
    return json{{"subcommand", subcommand},
                {"out_dir", o.out_dir},
                {"inputs", o.inputs},
                {"day_classes", o.day_classes},
                {"sessions", o.sessions},
                {"node", o.node_path},
                {"ref", o.ref_path},
                {"scenario", o.scenario},
                {"duration", o.duration},
                {"seed", o.seed},
                {"window", o.window},
                {"fence", o.fence},
                {"max_lag", o.max_lag},
                {"min_count", o.min_count},
                {"family", o.family},
                {"folds", o.folds},
                {"energetic", o.energetic},
                {"block_folds", o.block_folds},
                {"cell_size", o.cell_size},
                {"hotspot_threshold", o.hotspot_threshold},
                {"model", o.model_path},
                {"raw", o.raw},
                {"zone", o.zone},
                {"period", o.period},
                {"bucket", o.bucket}};
}

void write_manifest(const Options& o, const std::string& subcommand,
                    const std::vector<std::string>& input_files) {
    json m;
    m["tool_version"] = kToolVersion;
    m["config"] = config_json(o, subcommand);
    json digests = json::object();
    for (const auto& p : input_files) digests[p] = file_digest(p);
    m["input_digests"] = digests;
    atomic_write(fs::path(o.out_dir) / "manifest.json", m.dump(2) + "\n");
}

Scenario lookup_scenario(const std::string& name) {
    try {
        return scenario_by_name(name);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

void require_input(const std::string& path, const std::string& what) {
    if (path.empty()) throw ConfigError("missing required " + what + " path");
    if (!fs::exists(path)) throw ConfigError(what + " path does not exist: " + path);
}

// ---- pipeline stages ----

struct Prepared {
    Campaign merged;               // outlier-filtered, lag-corrected
    LagEstimate lag;
    std::vector<AlignedSeries> windows;        // plain
    std::vector<AlignedSeries> vel_windows;    // with velocity feature
    bool has_velocity = false;
    std::size_t outliers_removed = 0;
};

Campaign load_merged(const Options& o, std::vector<std::string>& used_files) {
    if (!o.scenario.empty()) {
        const Scenario sc = lookup_scenario(o.scenario);
        const SimResult sim = generate_campaign(sc.route, sc.err, o.duration, o.seed);
        return merge_streams(sim.node, sim.ref).campaign;
    }
    if (!o.inputs.empty()) {
        require_input(o.inputs.front(), "input");
        used_files.push_back(o.inputs.front());
        return parse_log(o.inputs.front(), LogFormat::MergedCsv).campaign;
    }
    require_input(o.node_path, "node log");
    require_input(o.ref_path, "reference log");
    used_files.push_back(o.node_path);
    used_files.push_back(o.ref_path);
    const auto node = parse_log(o.node_path, LogFormat::NodeCsv);
    const auto ref = parse_log(o.ref_path, LogFormat::RefCsv);
    return merge_streams(node.campaign, ref.campaign).campaign;
}

Prepared preprocess_campaign(const Campaign& merged, const Options& o) {
    Prepared p;
    const std::size_t before = merged.samples.size();
    Campaign clean = remove_outlier_samples(merged, o.fence);
    p.outliers_removed = before - clean.samples.size();
    p.lag = estimate_lag(clean, o.max_lag);
    p.merged = p.lag.lag != 0 ? apply_lag(clean, p.lag.lag) : std::move(clean);
    p.windows = time_average(p.merged, o.window, static_cast<std::size_t>(o.min_count),
                             o.energetic ? AverageMode::Energetic : AverageMode::Arithmetic);
    try {
        const auto trace = velocity_trace(p.merged);
        p.vel_windows = join_velocity(p.windows, trace.points);
        // a constant velocity column (stationary deployment) carries no signal
        // and would only make the multi-feature fits rank-deficient
        double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
        for (const auto& w : p.vel_windows) {
            const auto it = w.features.find("velocity_mps");
            if (it == w.features.end()) continue;
            vmin = std::min(vmin, it->second);
            vmax = std::max(vmax, it->second);
        }
        p.has_velocity = vmax - vmin > 1e-9;
    } catch (const Error&) {
        p.vel_windows = p.windows;
        p.has_velocity = false;
    }
    return p;
}

struct ModelRow {
    std::string label;
    FitSpec spec;
    bool with_velocity = false;
};

std::vector<ModelRow> model_rows(const Options& o, bool has_velocity) {
    std::vector<ModelRow> rows;
    auto add = [&](std::string label, Family f, Hyperparams hp, bool vel = false) {
        rows.push_back({std::move(label), {f, std::move(hp)}, vel});
    };
    const std::string fam = o.family;
    const bool all = fam == "all";
    if (all || fam == "SLR") add("SLR", Family::Slr, {});
    if ((all || fam == "MLR") && has_velocity)
        add("MLR (including velocity feature)", Family::Mlr, {}, true);
    if (all || fam == "PR") add("PR (order = 4)", Family::Pr, {{"degree", 4}});
    if (all || fam == "SR") add("SR", Family::Sr, {});
    if (all || fam == "SVR") add("SVR", Family::Svr, {});
    if (all || fam == "DT")
        for (const int depth : {3, 4, 5})
            add("DT (depth = " + std::to_string(depth) + ")", Family::Dt,
                {{"max_depth", static_cast<double>(depth)}});
    if (all || fam == "RFR") {
        for (const int depth : {3, 4, 5})
            add("RFR (depth = " + std::to_string(depth) + ")", Family::Rfr,
                {{"max_depth", static_cast<double>(depth)},
                 {"seed", static_cast<double>(o.seed)}});
        if (has_velocity)
            add("RFR (including velocity feature)", Family::Rfr,
                {{"max_depth", 5.0}, {"seed", static_cast<double>(o.seed)}}, true);
    }
    if (rows.empty()) throw ConfigError("unknown model family: " + fam);
    return rows;
}

int run_calibrate(const Options& o) {
    fs::create_directories(o.out_dir);
    std::vector<std::string> used_files;
    const Campaign merged = load_merged(o, used_files);
    const Prepared prep = preprocess_campaign(merged, o);

    const Dataset plain = make_dataset(prep.windows, false);
    std::optional<Dataset> augmented;
    if (prep.has_velocity) augmented = make_dataset(prep.vel_windows, true);

    std::ostringstream csv;
    csv << "model,r2,mae,rmse,pearson_r,p_value,n\n";
    std::string best_label;
    FitSpec best_spec;
    bool best_vel = false;
    double best_r2 = -std::numeric_limits<double>::infinity();
    for (const auto& row : model_rows(o, prep.has_velocity)) {
        const Dataset& d = row.with_velocity ? *augmented : plain;
        const EvalReport rep = cross_validate(d, row.spec, o.folds, o.seed, o.block_folds);
        csv << row.label << "," << fmt_opt(rep.r2) << "," << fmt(rep.mae) << "," << fmt(rep.rmse)
            << "," << fmt_opt(rep.pearson_r) << "," << fmt_opt(rep.p_value) << "," << rep.n
            << "\n";
        if (rep.r2 && *rep.r2 > best_r2) {
            best_r2 = *rep.r2;
            best_label = row.label;
            best_spec = row.spec;
            best_vel = row.with_velocity;
        }
        std::cout << row.label << ": r2=" << fmt_opt(rep.r2) << " mae=" << fmt(rep.mae)
                  << " rmse=" << fmt(rep.rmse) << "\n";
    }
    atomic_write(fs::path(o.out_dir) / "report.csv", csv.str());

    const Model best = fit_model(best_vel ? *augmented : plain, best_spec);
    atomic_write(fs::path(o.out_dir) / "best_model.json", serialize_model(best) + "\n");

    json summary;
    summary["lag"] = prep.lag.lag;
    summary["lag_peak_correlation"] = prep.lag.peak_correlation;
    summary["outliers_removed"] = prep.outliers_removed;
    summary["windows"] = prep.windows.size();
    summary["velocity_available"] = prep.has_velocity;
    summary["best_model"] = best_label;
    summary["best_cv_r2"] = best_r2;
    atomic_write(fs::path(o.out_dir) / "summary.json", summary.dump(2) + "\n");
    write_manifest(o, "calibrate", used_files);
    std::cout << "best: " << best_label << " (cv r2 " << fmt(best_r2) << ")\n";
    return 0;
}

int run_map(const Options& o) {
    fs::create_directories(o.out_dir);
    std::vector<std::string> used_files;
    Campaign c = load_merged(o, used_files);

    NoiseGrid grid;
    bool calibrated = false;
    if (!o.raw && !o.model_path.empty()) {
        require_input(o.model_path, "model");
        used_files.push_back(o.model_path);
        const Model m = load_model(o.model_path);
        if (m.n_features == 1) {
            Matrix x(c.samples.size(), 1);
            for (std::size_t i = 0; i < c.samples.size(); ++i) x(i, 0) = c.samples[i].node_level;
            grid = build_noise_grid_levels(c, m.predict(x), o.cell_size);
            calibrated = true;
        } else {
            std::cerr << "note: model needs " << m.n_features
                      << " features; mapping raw node levels instead\n";
        }
    }
    if (!calibrated) grid = build_noise_grid(c, o.cell_size);
    export_geojson(grid, (fs::path(o.out_dir) / "noise_grid.geojson").string());

    std::ostringstream csv;
    csv << "row,col,mean_dba,max_dba,count,centroid_lat,centroid_lon\n";
    for (const auto& h : hotspots(grid, o.hotspot_threshold))
        csv << h.key.row << "," << h.key.col << "," << fmt(h.cell.mean_dba) << ","
            << fmt(h.cell.max_dba) << "," << h.cell.count << "," << fmt(h.cell.centroid_lat) << ","
            << fmt(h.cell.centroid_lon) << "\n";
    atomic_write(fs::path(o.out_dir) / "hotspots.csv", csv.str());
    write_manifest(o, "map", used_files);
    std::cout << "cells: " << grid.cells.size() << "\n";
    return 0;
}

int run_analyze(const Options& o) {
    fs::create_directories(o.out_dir);
    // validate zone/period up front (usage errors exit 2)
    Zone zone;
    try {
        zone = zone_from_name(o.zone);
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    Period period;
    if (o.period == "day")
        period = Period::Day;
    else if (o.period == "night")
        period = Period::Night;
    else
        throw ConfigError("unknown period: " + o.period);

    std::vector<std::string> used_files;
    std::vector<Campaign> campaigns;
    if (!o.scenario.empty()) {
        Campaign c = load_merged(o, used_files);
        c.meta.day_class = o.day_classes.empty() ? "typical" : o.day_classes.front();
        c.meta.session = o.sessions.empty() ? "all" : o.sessions.front();
        campaigns.push_back(std::move(c));
    } else {
        if (o.inputs.empty()) throw ConfigError("missing required input path");
        for (std::size_t i = 0; i < o.inputs.size(); ++i) {
            require_input(o.inputs[i], "input");
            used_files.push_back(o.inputs[i]);
            Campaign c = parse_log(o.inputs[i], LogFormat::MergedCsv).campaign;
            if (i < o.day_classes.size()) c.meta.day_class = o.day_classes[i];
            if (i < o.sessions.size()) c.meta.session = o.sessions[i];
            campaigns.push_back(std::move(c));
        }
    }

    // temporal profiles
    {
        const auto profiles = temporal_profile(campaigns, o.bucket);
        std::ostringstream csv;
        csv << "group,bucket_start_s,mean_dba,variance,count\n";
        for (const auto& p : profiles)
            csv << p.group << "," << p.bucket << "," << fmt(p.mean_dba) << "," << fmt(p.variance)
                << "," << p.count << "\n";
        atomic_write(fs::path(o.out_dir) / "temporal_profiles.csv", csv.str());
    }

    // distribution comparison between the first two distinct day classes
    {
        std::map<std::string, std::vector<double>> by_class;
        for (const auto& c : campaigns)
            for (const auto& s : c.samples) by_class[c.meta.day_class].push_back(s.node_level);
        std::ostringstream csv;
        csv << "label,mean,variance,min,max,count,mean_diff,var_ratio\n";
        if (by_class.size() >= 2) {
            auto it = by_class.begin();
            const auto& [la, va] = *it;
            ++it;
            const auto& [lb, vb] = *it;
            const auto [sa, sb, delta] = compare_distributions(va, vb, la, lb);
            csv << sa.label << "," << fmt(sa.mean) << "," << fmt(sa.variance) << "," << fmt(sa.min)
                << "," << fmt(sa.max) << "," << sa.count << "," << fmt(delta.mean_diff) << ","
                << fmt(delta.var_ratio) << "\n";
            csv << sb.label << "," << fmt(sb.mean) << "," << fmt(sb.variance) << "," << fmt(sb.min)
                << "," << fmt(sb.max) << "," << sb.count << ",,\n";
        }
        atomic_write(fs::path(o.out_dir) / "distributions.csv", csv.str());
    }

    // standards check over all levels
    {
        std::vector<double> levels;
        for (const auto& c : campaigns)
            for (const auto& s : c.samples) levels.push_back(s.node_level);
        const auto rep = standards_check(levels, zone, period);
        std::ostringstream csv;
        csv << "zone,period,limit_dba,leq_dba,leq_exceeds,exceedance_fraction,n\n";
        csv << o.zone << "," << o.period << "," << fmt(rep.limit) << "," << fmt(rep.leq) << ","
            << (rep.leq_exceeds ? 1 : 0) << "," << fmt(rep.fraction) << "," << levels.size()
            << "\n";
        atomic_write(fs::path(o.out_dir) / "standards.csv", csv.str());
    }

    // velocity-noise trend (needs paired windows with motion)
    std::string trend_status = "ok";
    {
        std::ostringstream csv;
        csv << "velocity_lo_mps,mean_dba,count\n";
        try {
            const Prepared prep = preprocess_campaign(campaigns.front(), o);
            if (!prep.has_velocity) throw Error("no velocity");
            const auto trend = velocity_noise_trend(prep.vel_windows);
            for (const auto& b : trend.bins)
                csv << fmt(b.velocity_lo) << "," << fmt(b.mean_dba) << "," << b.count << "\n";
            csv << "slope_dba_per_mps," << fmt(trend.slope) << ",\n";
            csv << "p_value," << fmt(trend.p_value) << ",\n";
        } catch (const Error&) {
            trend_status = "skipped: no velocity";
            csv << trend_status << ",,\n";
        }
        atomic_write(fs::path(o.out_dir) / "velocity_trend.csv", csv.str());
    }

    write_manifest(o, "analyze", used_files);
    std::cout << "campaigns: " << campaigns.size() << ", velocity trend: " << trend_status << "\n";
    return 0;
}

int run_gen(const Options& o) {
    if (o.scenario.empty()) throw ConfigError("gen requires --scenario");
    fs::create_directories(o.out_dir);
    const Scenario sc = lookup_scenario(o.scenario);
    const SimResult sim = generate_campaign(sc.route, sc.err, o.duration, o.seed);
    write_campaign(sim.node, (fs::path(o.out_dir) / "node.csv").string(), LogFormat::NodeCsv,
                   kDefaultUtcOffset);
    write_campaign(sim.ref, (fs::path(o.out_dir) / "ref.csv").string(), LogFormat::RefCsv,
                   kDefaultUtcOffset);
    write_truth(sim.truth, (fs::path(o.out_dir) / "truth.json").string());
    write_manifest(o, "gen", {});
    std::cout << "generated " << sim.node.samples.size() << " samples (" << sc.name << ")\n";
    return 0;
}

int run_pipeline(Options o) {
    const fs::path base = o.out_dir;
    Options gen = o;
    gen.out_dir = (base / "gen").string();
    run_gen(gen);

    Options cal = o;
    cal.out_dir = (base / "calibrate").string();
    run_calibrate(cal);

    Options map = o;
    map.out_dir = (base / "map").string();
    map.model_path = (base / "calibrate" / "best_model.json").string();
    run_map(map);

    Options an = o;
    an.out_dir = (base / "analyze").string();
    run_analyze(an);
    return 0;
}

void apply_config_file(CLI::App& app, Options& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot open config file: " + o.config_path);
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    auto unset = [&](const std::string& flag) {
        const auto* opt = app.get_option_no_throw(flag);
        return opt != nullptr && opt->count() == 0;
    };
    auto num = [&](const std::string& key, auto& field, const std::string& flag) {
        if (cfg.contains(key) && unset(flag)) field = cfg.at(key);
    };
    num("window", o.window, "--window");
    num("fence", o.fence, "--fence");
    num("max_lag", o.max_lag, "--max-lag");
    num("min_count", o.min_count, "--min-count");
    num("folds", o.folds, "--folds");
    num("seed", o.seed, "--seed");
    num("duration", o.duration, "--duration");
    num("cell_size", o.cell_size, "--cell-size");
    num("hotspot_threshold", o.hotspot_threshold, "--threshold");
    num("bucket", o.bucket, "--bucket");
    if (cfg.contains("family") && unset("--family")) o.family = cfg.at("family");
    if (cfg.contains("scenario") && unset("--scenario")) o.scenario = cfg.at("scenario");
    if (cfg.contains("zone") && unset("--zone")) o.zone = cfg.at("zone");
    if (cfg.contains("period") && unset("--period")) o.period = cfg.at("period");
    if (cfg.contains("out_dir") && unset("--out")) o.out_dir = cfg.at("out_dir");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mobile noise-sensor calibration and analytics toolkit"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config_path, "JSON config file (flags take precedence)");
        sub->add_option("--out", o.out_dir, "output directory");
        sub->add_option("--seed", o.seed, "RNG seed");
        sub->add_option("--scenario", o.scenario, "built-in scenario: lab, mobile, festival");
        sub->add_option("--duration", o.duration, "generated campaign length, seconds");
    };
    auto add_preprocess = [&](CLI::App* sub) {
        sub->add_option("--input", o.inputs, "merged CSV input (repeatable for analyze)");
        sub->add_option("--node", o.node_path, "node CSV log");
        sub->add_option("--ref", o.ref_path, "reference CSV log");
        sub->add_option("--window", o.window, "averaging window, seconds");
        sub->add_option("--fence", o.fence, "IQR fence factor");
        sub->add_option("--max-lag", o.max_lag, "lag search half-window, seconds");
        sub->add_option("--min-count", o.min_count, "minimum samples per window");
        sub->add_flag("--energetic", o.energetic, "Leq (energetic) window averaging");
    };

    CLI::App* gen = app.add_subcommand("gen", "generate a synthetic campaign");
    add_common(gen);

    CLI::App* cal = app.add_subcommand("calibrate", "fit and cross-validate calibrators");
    add_common(cal);
    add_preprocess(cal);
    cal->add_option("--family", o.family, "SLR|MLR|PR|SR|SVR|DT|RFR|all");
    cal->add_option("--folds", o.folds, "cross-validation folds");
    cal->add_flag("--block-folds", o.block_folds, "contiguous temporal folds");

    CLI::App* map = app.add_subcommand("map", "spatial noise grid and hotspots");
    add_common(map);
    add_preprocess(map);
    map->add_option("--cell-size", o.cell_size, "grid cell size, meters");
    map->add_option("--threshold", o.hotspot_threshold, "hotspot threshold, dBA");
    map->add_option("--model", o.model_path, "calibration model JSON");
    map->add_flag("--raw", o.raw, "map uncalibrated node levels");

    CLI::App* an = app.add_subcommand("analyze", "temporal/distribution/standards analyses");
    add_common(an);
    add_preprocess(an);
    an->add_option("--day-class", o.day_classes, "day class per input");
    an->add_option("--session", o.sessions, "session label per input");
    an->add_option("--zone", o.zone, "industrial|commercial|residential|silence");
    an->add_option("--period", o.period, "day|night");
    an->add_option("--bucket", o.bucket, "time-of-day bucket, seconds");

    CLI::App* pipe = app.add_subcommand("pipeline", "gen + calibrate + map + analyze");
    add_common(pipe);
    add_preprocess(pipe);
    pipe->add_option("--family", o.family, "SLR|MLR|PR|SR|SVR|DT|RFR|all");
    pipe->add_option("--folds", o.folds, "cross-validation folds");
    pipe->add_option("--zone", o.zone, "zone for the standards check");
    pipe->add_option("--period", o.period, "day|night");
    pipe->add_option("--bucket", o.bucket, "time-of-day bucket, seconds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_config_file(*app.get_subcommands().front(), o);
        if (gen->parsed()) return run_gen(o);
        if (cal->parsed()) return run_calibrate(o);
        if (map->parsed()) return run_map(o);
        if (an->parsed()) return run_analyze(o);
        if (pipe->parsed()) return run_pipeline(o);
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
