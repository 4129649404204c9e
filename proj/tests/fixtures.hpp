#pragma once

#include "boundstab/analysis.hpp"
#include "boundstab/protocols.hpp"
#include "boundstab/scenario_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace fixtures
{
    using namespace boundstab;

    inline const std::vector<std::string>& protocols()
    {
        static const std::vector<std::string> names{"logical_clocks",        "vector_clocks", "mutual_exclusion",
                                                    "diffusing_computation", "katz_perry",    "paxos_single_decree"};
        return names;
    }

    inline std::filesystem::path scenario_path(const std::string& name)
    {
        return std::filesystem::path(BOUNDSTAB_SCENARIO_DIR) / (name + ".json");
    }

    inline Scenario shipped(const std::string& name) { return load_scenario(scenario_path(name)); }

    inline std::uint64_t steps_per_region(const Scenario& s)
    {
        return static_cast<std::uint64_t>(s.regions.rs * s.steps_per_time_unit);
    }

    // Faults between regions 5 and 15 of the run, then enough regions for
    // the third interval boundary plus `tail` regions of suffix.
    inline Scenario campaign(const std::string& name, std::uint64_t seed, std::int64_t tail = 15)
    {
        Scenario s = shipped(name);
        s.seed = seed;
        const Program program = build_program(s);
        const Region start = resolved_config(s, program).regions.start_region;
        const std::uint64_t spr = steps_per_region(s);
        s.faults = make_campaign(program, seed, 5 * spr, 15 * spr);
        const Region boundary = interval_boundary(start + 16, program, 3);
        s.run_regions = boundary - start + tail;
        return s;
    }
} // namespace fixtures
