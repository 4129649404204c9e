#pragma once

#include "boundstab/counters.hpp"
#include "boundstab/program.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace boundstab
{
    /// One counter at one step. Both fields empty means the cell is absent.
    struct CounterSnap
    {
        std::optional<std::int64_t> residue;
        std::optional<Value> lifted;
        /// Creation region of a dependent cell (0 for free counters).
        Region created = 0;

        friend bool operator==(const CounterSnap&, const CounterSnap&) = default;
    };

    /// Free counters first, then dependent slots, in layout order.
    struct ProcessSnap
    {
        Region region = 0;
        std::vector<CounterSnap> counters;
        std::vector<std::int64_t> vars;

        friend bool operator==(const ProcessSnap&, const ProcessSnap&) = default;
    };

    struct MessageSnap
    {
        std::uint64_t id = 0;
        ProcessId from = 0;
        ProcessId to = 0;
        int kind = 0;
        Region sent = 0;
        std::vector<std::int64_t> fields;
        std::vector<int> stamp_kinds;
        std::vector<CounterSnap> stamps;

        friend bool operator==(const MessageSnap&, const MessageSnap&) = default;
    };

    /// State after one kernel step. `actor` is -1 for a step without a
    /// process action; `action` is -1 for a self-loop.
    struct TraceRecord
    {
        std::uint64_t step = 0;
        Region global_region = 0;
        ProcessId actor = -1;
        int action = -1;
        std::vector<ProcessSnap> processes;
        std::vector<MessageSnap> messages;
        /// Kernel events ("send", "recv", "drop", "fault", "region") and protocol events.
        std::vector<Event> events;

        friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
    };

    struct TraceHeader
    {
        std::string protocol;
        std::uint64_t seed = 0;
        std::uint64_t steps = 0;
        std::vector<std::string> families;
        std::vector<CounterParams> family_params;
        bool bounded = true;

        friend bool operator==(const TraceHeader&, const TraceHeader&) = default;
    };

    struct Trace
    {
        TraceHeader header;
        std::vector<TraceRecord> records;
    };
} // namespace boundstab
