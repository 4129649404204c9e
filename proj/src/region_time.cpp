#include "boundstab/region_time.hpp"

#include <algorithm>
#include <string>

namespace boundstab
{
    void RegionParams::validate(std::int64_t largest_max_r) const
    {
        if (rs <= 0)
        {
            throw ConfigError("rs must be > 0");
        }
        if (start_region < 2 + largest_max_r)
        {
            throw ConfigError("start_region must be >= 2 + max_r = " + std::to_string(2 + largest_max_r) +
                              " (got " + std::to_string(start_region) + ")");
        }
    }

    Region region_of(Time t, const RegionParams& params)
    {
        if (t < 0)
        {
            throw ConfigError("negative time " + std::to_string(t));
        }
        return t / params.rs;
    }

    ClockState initial_clocks(int process_count, const RegionParams& params)
    {
        ClockState clocks;
        clocks.global.t = params.start_region * params.rs;
        for (ProcessId j = 0; j < process_count; ++j)
        {
            clocks.locals.push_back(LocalClock{j, clocks.global.t});
        }
        return clocks;
    }

    ClockState advance_clocks(const ClockState& clocks, Time dt, const DriftPolicy& policy,
                              const RegionParams& params, std::mt19937_64& rng)
    {
        ClockState next = clocks;
        next.global.t += dt;
        const Region g = region_of(next.global.t, params);

        for (LocalClock& c : next.locals)
        {
            Time step = dt;
            if (policy.kind == DriftPolicy::Kind::BoundedJitter && policy.max_step_skew > 0)
            {
                std::uniform_int_distribution<Time> jitter(-policy.max_step_skew, policy.max_step_skew);
                step = std::max<Time>(0, dt + jitter(rng));
            }
            c.t += step;
            // Within one region of the global clock.
            c.t = std::min(c.t, (g + 2) * params.rs - 1);
            c.t = std::max(c.t, (g - 1) * params.rs);
        }

        // Nobody enters r + 1 before everybody was in r: cap at one region
        // past the slowest clock as it was before this advance.
        Region lowest = region_of(clocks.locals.front().t, params);
        for (const LocalClock& c : clocks.locals)
        {
            lowest = std::min(lowest, region_of(c.t, params));
        }
        for (LocalClock& c : next.locals)
        {
            c.t = std::min(c.t, (lowest + 2) * params.rs - 1);
        }
        return next;
    }

    std::vector<std::pair<ProcessId, Region>> region_change_events(const ClockState& before, const ClockState& after,
                                                                   const RegionParams& params)
    {
        std::vector<std::pair<ProcessId, Region>> events;
        for (std::size_t j = 0; j < after.locals.size(); ++j)
        {
            const Region old_r = region_of(before.locals[j].t, params);
            const Region new_r = region_of(after.locals[j].t, params);
            if (new_r > old_r)
            {
                events.emplace_back(after.locals[j].owner, new_r);
            }
        }
        return events;
    }

    std::int64_t max_pairwise_gap(const ClockState& clocks, const RegionParams& params)
    {
        Region lo = region_of(clocks.locals.front().t, params);
        Region hi = lo;
        for (const LocalClock& c : clocks.locals)
        {
            lo = std::min(lo, region_of(c.t, params));
            hi = std::max(hi, region_of(c.t, params));
        }
        return hi - lo;
    }

    std::int64_t max_global_gap(const ClockState& clocks, const RegionParams& params)
    {
        const Region g = region_of(clocks.global.t, params);
        std::int64_t gap = 0;
        for (const LocalClock& c : clocks.locals)
        {
            const Region r = region_of(c.t, params);
            gap = std::max(gap, r > g ? r - g : g - r);
        }
        return gap;
    }
} // namespace boundstab
