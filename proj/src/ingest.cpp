#include "noisecal/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace noisecal {

namespace {

std::string trim(std::string_view sv) {
    std::size_t b = 0, e = sv.size();
    while (b < e && std::isspace(static_cast<unsigned char>(sv[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(sv[e - 1]))) --e;
    return std::string(sv.substr(b, e - b));
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(trim(std::string_view(line).substr(start)));
            break;
        }
        out.push_back(trim(std::string_view(line).substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
    y = static_cast<int>(yy + (m <= 2));
}

bool parse_int(std::string_view sv, int& out) {
    const auto res = std::from_chars(sv.data(), sv.data() + sv.size(), out);
    return res.ec == std::errc{} && res.ptr == sv.data() + sv.size();
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && std::isfinite(out);
}

// "dd:mm:yyyy hh:mm:ss" or "dd-mm-yyyy hh:mm:ss".
bool parse_datetime(const std::string& s, int utc_offset_seconds, std::int64_t& epoch) {
    if (s.size() != 19) return false;
    const char dsep = s[2];
    if ((dsep != ':' && dsep != '-') || s[5] != dsep) return false;
    if (s[10] != ' ' || s[13] != ':' || s[16] != ':') return false;
    std::string_view sv(s);
    int dd = 0, mo = 0, yy = 0, hh = 0, mi = 0, ss = 0;
    if (!parse_int(sv.substr(0, 2), dd) || !parse_int(sv.substr(3, 2), mo) ||
        !parse_int(sv.substr(6, 4), yy) || !parse_int(sv.substr(11, 2), hh) ||
        !parse_int(sv.substr(14, 2), mi) || !parse_int(sv.substr(17, 2), ss))
        return false;
    if (mo < 1 || mo > 12 || dd < 1 || dd > 31 || hh > 23 || mi > 59 || ss > 59) return false;
    static const int mdays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int dmax = mdays[mo - 1];
    if (mo == 2 && (yy % 4 == 0 && (yy % 100 != 0 || yy % 400 == 0))) dmax = 29;
    if (dd > dmax) return false;
    epoch = civil_to_epoch(yy, mo, dd, hh, mi, ss, utc_offset_seconds);
    return true;
}

struct ColumnLayout {
    bool has_node = false;
    bool has_ref = false;
};

ColumnLayout expected_layout(LogFormat f) {
    switch (f) {
        case LogFormat::NodeCsv: return {true, false};
        case LogFormat::RefCsv: return {false, true};
        case LogFormat::MergedCsv: return {true, true};
    }
    throw Error("unknown log format");
}

std::string expected_header(LogFormat f) {
    switch (f) {
        case LogFormat::NodeCsv: return "datetime,latitude,longitude,node_dba";
        case LogFormat::RefCsv: return "datetime,latitude,longitude,ref_dba";
        case LogFormat::MergedCsv: return "datetime,latitude,longitude,node_dba,ref_dba";
    }
    throw Error("unknown log format");
}

}  // namespace

std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second,
                            int utc_offset_seconds) {
    return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second -
           utc_offset_seconds;
}

std::string format_local_datetime(std::int64_t epoch, int utc_offset_seconds) {
    const std::int64_t local = epoch + utc_offset_seconds;
    std::int64_t days = local / 86400;
    std::int64_t sod = local % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    int y = 0, m = 0, d = 0;
    civil_from_days(days, y, m, d);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%02d-%02d-%04d %02d:%02d:%02d", d, m, y,
                  static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

ParseResult parse_log(const std::string& path, LogFormat format, int utc_offset_seconds) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open log file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error("empty log file: " + path);
    if (lower(trim(line)) != expected_header(format))
        throw Error("header does not match declared format in " + path + ": got '" + trim(line) +
                    "'");

    const ColumnLayout layout = expected_layout(format);
    const std::size_t ncols = 3 + layout.has_node + layout.has_ref;

    ParseResult result;
    result.campaign.id = std::filesystem::path(path).stem().string();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        ++result.total_rows;
        const auto fields = split_csv(line);
        auto reject = [&](const std::string& why) {
            result.rejects.push_back({lineno, why});
        };
        if (fields.size() != ncols) {
            reject("expected " + std::to_string(ncols) + " fields, got " +
                   std::to_string(fields.size()));
            continue;
        }
        GeoSample s;
        if (!parse_datetime(fields[0], utc_offset_seconds, s.timestamp)) {
            reject("unparseable timestamp '" + fields[0] + "'");
            continue;
        }
        double lat = 0, lon = 0;
        if (!parse_double(fields[1], lat) || !parse_double(fields[2], lon)) {
            reject("unparseable coordinate");
            continue;
        }
        if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0) {
            reject("coordinate out of range");
            continue;
        }
        s.latitude = lat;
        s.longitude = lon;
        std::size_t col = 3;
        bool level_ok = true;
        if (layout.has_node) {
            double v = 0;
            if (!parse_double(fields[col], v)) {
                reject("unparseable level '" + fields[col] + "'");
                level_ok = false;
            } else if (v < kLevelMin || v > kLevelMax) {
                reject("level out of sensor range");
                level_ok = false;
            } else {
                s.node_level = v;
            }
            ++col;
        }
        if (level_ok && layout.has_ref) {
            const std::string& f = fields[col];
            if (format == LogFormat::MergedCsv && f.empty()) {
                // absent reference reading in a merged file
            } else {
                double v = 0;
                if (!parse_double(f, v)) {
                    reject("unparseable level '" + f + "'");
                    level_ok = false;
                } else if (v < kLevelMin || v > kLevelMax) {
                    reject("level out of sensor range");
                    level_ok = false;
                } else {
                    s.ref_level = v;
                    if (format == LogFormat::RefCsv) s.node_level = v;
                }
            }
        }
        if (!level_ok) continue;
        result.campaign.samples.push_back(s);
    }

    if (result.total_rows == 0) throw Error("no data rows in " + path);
    if (result.rejects.size() * 2 > result.total_rows)
        throw Error("more than 50% of rows rejected in " + path + " (" +
                    std::to_string(result.rejects.size()) + "/" +
                    std::to_string(result.total_rows) + ")");
    if (result.campaign.samples.empty()) throw Error("no valid samples in " + path);

    std::stable_sort(result.campaign.samples.begin(), result.campaign.samples.end(),
                     [](const GeoSample& a, const GeoSample& b) { return a.timestamp < b.timestamp; });
    return result;
}

MergeResult merge_streams(const Campaign& node, const Campaign& ref) {
    if (node.samples.empty() || ref.samples.empty()) throw Error("merge_streams: empty campaign");

    std::unordered_map<std::int64_t, double> ref_by_time;
    ref_by_time.reserve(ref.samples.size());
    for (const auto& s : ref.samples) ref_by_time.emplace(s.timestamp, s.node_level);

    MergeResult out;
    out.campaign.id = node.id + "+" + ref.id;
    out.campaign.meta = node.meta;
    out.campaign.samples.reserve(node.samples.size());
    std::size_t matched = 0;
    for (const auto& s : node.samples) {
        GeoSample m = s;
        if (const auto it = ref_by_time.find(s.timestamp); it != ref_by_time.end()) {
            m.ref_level = it->second;
            ++matched;
        } else {
            m.ref_level.reset();
            ++out.unmatched_node;
        }
        out.campaign.samples.push_back(m);
    }
    if (matched == 0) throw Error("merge_streams: no temporal overlap");
    out.unmatched_ref = ref.samples.size() - matched;
    return out;
}

void write_campaign(const Campaign& c, const std::string& path, int utc_offset_seconds) {
    if (c.samples.empty()) throw Error("write_campaign: empty campaign");
    std::ofstream out(path);
    if (!out) throw Error("cannot write to " + path);

    bool any_ref = false;
    for (const auto& s : c.samples) any_ref |= s.ref_level.has_value();

    out << (any_ref ? "datetime,latitude,longitude,node_dba,ref_dba"
                    : "datetime,latitude,longitude,node_dba")
        << "\n";
    char buf[96];
    for (const auto& s : c.samples) {
        out << format_local_datetime(s.timestamp, utc_offset_seconds);
        std::snprintf(buf, sizeof(buf), ",%.4f,%.4f,%.1f", s.latitude, s.longitude, s.node_level);
        out << buf;
        if (any_ref) {
            out << ",";
            if (s.ref_level) {
                std::snprintf(buf, sizeof(buf), "%.1f", *s.ref_level);
                out << buf;
            }
        }
        out << "\n";
    }
    if (!out) throw Error("write failed: " + path);
}

void write_campaign(const Campaign& c, const std::string& path, LogFormat format,
                    int utc_offset_seconds) {
    if (format == LogFormat::MergedCsv) {
        write_campaign(c, path, utc_offset_seconds);
        return;
    }
    if (c.samples.empty()) throw Error("write_campaign: empty campaign");
    std::ofstream out(path);
    if (!out) throw Error("cannot write to " + path);
    out << (format == LogFormat::RefCsv ? "datetime,latitude,longitude,ref_dba"
                                        : "datetime,latitude,longitude,node_dba")
        << "\n";
    char buf[96];
    for (const auto& s : c.samples) {
        out << format_local_datetime(s.timestamp, utc_offset_seconds);
        std::snprintf(buf, sizeof(buf), ",%.4f,%.4f,%.1f", s.latitude, s.longitude, s.node_level);
        out << buf << "\n";
    }
    if (!out) throw Error("write failed: " + path);
}

}  // namespace noisecal
