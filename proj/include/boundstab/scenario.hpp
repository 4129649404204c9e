#pragma once

#include "boundstab/region_time.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace boundstab
{
    /// A transient fault applied before the process action of step `step`.
    /// Faults never touch clocks.
    struct FaultSpec
    {
        enum class Kind
        {
            OverwriteCounter, // set a free counter or present dependent counter to `value` (mod maxbound)
            InsertDep,        // make dependent counter `target` present with `value`
            DeleteDep,        // make dependent counter `target` absent
            ScrambleVar,      // set variable `target` to `value` (mod its domain)
            OverwriteStamp,   // set stamp `stamp` of in-flight message number `message`
            DeleteStamp,      // loses the message carrying the stamp
            CorruptProcess,   // every counter and variable of `process`, drawn from the fault seed
            CorruptAll,       // every process and every in-flight stamp
        };

        Kind kind = Kind::OverwriteCounter;
        std::uint64_t step = 0;
        ProcessId process = 0;
        std::string target;
        std::int64_t value = 0;
        std::size_t message = 0;
        int stamp = 0;
    };

    struct TopologySpec
    {
        std::string kind = "complete"; // complete, line, ring, edges
        int n = 2;
        std::vector<std::pair<int, int>> edges;
    };

    struct FamilySetting
    {
        std::string name;
        std::int64_t maxinc = 0;
    };

    /// Overrides a dependent kind's default lookback and lifetime.
    struct DepSetting
    {
        std::string name;
        std::int64_t r_b = 0;
        std::int64_t r_f = 0;
    };

    /// Everything needed to reproduce a run. `seed` is the default; callers may override it.
    struct Scenario
    {
        std::string protocol;
        std::map<std::string, std::int64_t> params;
        TopologySpec topology;
        /// start_region 0 picks the smallest legal start, 2 + largest max_r.
        RegionParams regions{100, 0};
        DriftPolicy drift;
        std::vector<FamilySetting> families;
        std::vector<DepSetting> deps;
        /// Regions a message may stay in flight before it is dropped.
        std::int64_t channel_lifetime = 1;
        double loss_probability = 0.0;
        std::vector<FaultSpec> faults;
        std::int64_t run_regions = 100;
        std::uint64_t seed = 1;
        int steps_per_time_unit = 1;

        std::uint64_t total_steps() const
        {
            return static_cast<std::uint64_t>(run_regions * regions.rs * steps_per_time_unit);
        }
    };
} // namespace boundstab
