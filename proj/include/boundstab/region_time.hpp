#pragma once

#include "boundstab/counters.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace boundstab
{
    using ProcessId = int;
    using Time = std::int64_t;

    struct RegionParams
    {
        Time rs = 100;
        Region start_region = 2;

        /// rs > 0 and start_region >= 2 + max_r for the largest max_r in the run.
        void validate(std::int64_t largest_max_r) const;
    };

    /// Abstract global time. Not visible to processes.
    struct GlobalClock
    {
        Time t = 0;
    };

    /// Physical time of one process.
    struct LocalClock
    {
        ProcessId owner = 0;
        Time t = 0;
    };

    struct ClockState
    {
        GlobalClock global;
        std::vector<LocalClock> locals;
    };

    struct DriftPolicy
    {
        enum class Kind
        {
            None,
            BoundedJitter,
        };

        Kind kind = Kind::None;
        /// Largest deviation of one local advance from dt, in time units.
        Time max_step_skew = 0;
    };

    /// floor(t / rs). Throws ConfigError for negative t.
    Region region_of(Time t, const RegionParams& params);

    /// All clocks start at the first instant of params.start_region.
    ClockState initial_clocks(int process_count, const RegionParams& params);

    /// Advances global time by dt and every local clock by a drawn amount,
    /// then clamps local clocks so that every local region stays within one
    /// of the global region and at most one past the slowest local region
    /// before the advance. Local clocks never go backwards.
    ClockState advance_clocks(const ClockState& clocks, Time dt, const DriftPolicy& policy,
                              const RegionParams& params, std::mt19937_64& rng);

    /// Processes whose region increased between `before` and `after`, with the new region.
    std::vector<std::pair<ProcessId, Region>> region_change_events(const ClockState& before, const ClockState& after,
                                                                   const RegionParams& params);

    /// Largest |region(t_j) - region(t_k)| over all pairs.
    std::int64_t max_pairwise_gap(const ClockState& clocks, const RegionParams& params);

    /// Largest |region(t_j) - region(t)|.
    std::int64_t max_global_gap(const ClockState& clocks, const RegionParams& params);
} // namespace boundstab
