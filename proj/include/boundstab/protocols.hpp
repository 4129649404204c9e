#pragma once

#include "boundstab/program.hpp"
#include "boundstab/scenario.hpp"
#include "boundstab/transformer.hpp"

#include <optional>
#include <string>
#include <vector>

namespace boundstab
{
    /// Names accepted in Scenario::protocol.
    std::vector<std::string> protocol_names();

    /// Builds the named protocol for the scenario's topology and parameters,
    /// applies the scenario's family maxinc values and dependent overrides.
    /// Throws ConfigError for unknown protocols or parameters, a family with
    /// no maxinc, or a topology the protocol cannot run on.
    ProtocolDef make_protocol(const Scenario& scenario);

    /// make_protocol followed by wrap_program.
    Program build_program(const Scenario& scenario);

    /// Round comparison used by the reset protocol: x is the local round, y
    /// the incoming one.
    enum class RoundAction
    {
        Adopt,
        Normal,
        Ignore,
    };
    RoundAction round_rule(std::optional<Value> x, std::optional<Value> y);

    /// Componentwise maximum over present entries.
    std::vector<std::optional<Value>> vc_merge(const std::vector<std::optional<Value>>& a,
                                               const std::vector<std::optional<Value>>& b);

    /// Total order on (timestamp, process id) pairs; absent timestamps are
    /// never before anything.
    bool ordered_before(std::optional<Value> ts_a, int id_a, std::optional<Value> ts_b, int id_b);

    /// Lifted value of counter `index` (free counters first, then dependent
    /// slots) of process `p` in a record.
    std::optional<Value> recorded(const TraceRecord& rec, ProcessId p, int index);
} // namespace boundstab
