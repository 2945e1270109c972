#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "noisecal/types.hpp"

namespace noisecal {

enum class LogFormat { NodeCsv, RefCsv, MergedCsv };

struct RejectRecord {
    std::size_t line = 0;  // 1-based, including header
    std::string reason;
};

struct ParseResult {
    Campaign campaign;
    std::vector<RejectRecord> rejects;
    std::size_t total_rows = 0;  // data rows, excluding header
};

// Parses a campaign log. Timestamps "dd:mm:yyyy hh:mm:ss" or
// "dd-mm-yyyy hh:mm:ss", interpreted as local time at the given UTC offset.
// Bad rows become rejects; throws when the file is unreadable, the header does
// not match the declared format, more than half the rows reject, or nothing
// parses.
ParseResult parse_log(const std::string& path, LogFormat format,
                      int utc_offset_seconds = kDefaultUtcOffset);

struct MergeResult {
    Campaign campaign;
    std::size_t unmatched_node = 0;  // node seconds without a reference sample
    std::size_t unmatched_ref = 0;   // reference seconds without a node sample
};

// Attaches reference levels to node samples at identical seconds. Throws when
// the timestamp ranges do not overlap at all.
MergeResult merge_streams(const Campaign& node, const Campaign& ref);

// Writes the merged CSV format (ref column present iff any sample carries a
// reference level). Coordinates at 4 decimals, levels at 1.
void write_campaign(const Campaign& c, const std::string& path,
                    int utc_offset_seconds = kDefaultUtcOffset);

// Same, but with the wire format fixed: NodeCsv drops any reference column,
// RefCsv writes the single-level 'ref_dba' header.
void write_campaign(const Campaign& c, const std::string& path, LogFormat format,
                    int utc_offset_seconds);

// Epoch conversion helpers shared with the generator.
std::int64_t civil_to_epoch(int year, int month, int day, int hour, int minute, int second,
                            int utc_offset_seconds);
std::string format_local_datetime(std::int64_t epoch, int utc_offset_seconds);

}  // namespace noisecal
