#pragma once

#include "boundstab/analysis.hpp"
#include "boundstab/scenario.hpp"
#include "boundstab/trace.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace boundstab
{
    /// JSON scenario. Unknown or missing fields throw ConfigError naming the
    /// field path (e.g. "families[0].maxinc"); malformed JSON throws ParseError.
    Scenario parse_scenario(const std::string& text);
    Scenario load_scenario(const std::filesystem::path& path);

    /// Trace files are JSON lines: one header, then one line per step.
    std::string header_line(const TraceHeader& header);
    std::string record_line(const TraceRecord& record);
    void write_trace(std::ostream& out, const Trace& trace);
    /// Throws ParseError on malformed lines or when fewer records than the
    /// header announces are present.
    Trace read_trace(std::istream& in);
    Trace load_trace(const std::filesystem::path& path);

    /// {"rs": 100, "delays": [...], "rates": [...], "multiplier": 1, "extra": 0}
    SweepGrid parse_grid(const std::string& text);
} // namespace boundstab
