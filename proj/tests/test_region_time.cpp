#include "doctest.h"

#include "boundstab/region_time.hpp"

#include <algorithm>

using namespace boundstab;

namespace
{
    Region region(const LocalClock& c, const RegionParams& p) { return region_of(c.t, p); }
}

TEST_CASE("region_of floors time by the region size")
{
    const RegionParams p{100, 2};
    CHECK(region_of(0, p) == 0);
    CHECK(region_of(250, p) == 2);
    CHECK(region_of(3600, p) == 36);
    CHECK_THROWS_AS(region_of(-1, p), ConfigError);
}

TEST_CASE("region_of is monotone and periodic")
{
    for (const Time rs : {1, 7, 100})
    {
        const RegionParams p{rs, 2};
        for (Time t = 0; t < 20 * rs; ++t)
        {
            CHECK(region_of(t + 1, p) >= region_of(t, p));
            CHECK(region_of(t + rs, p) == region_of(t, p) + 1);
        }
    }
}

TEST_CASE("zero drift advances every clock by one region per rs")
{
    const RegionParams p{100, 5};
    std::mt19937_64 rng(1);
    const ClockState before = initial_clocks(4, p);
    const ClockState after = advance_clocks(before, 100, DriftPolicy{}, p, rng);
    CHECK(region_of(after.global.t, p) == 6);
    for (const LocalClock& c : after.locals)
    {
        CHECK(region(c, p) == 6);
    }
    const auto events = region_change_events(before, after, p);
    REQUIRE(events.size() == 4);
    CHECK(events[2] == std::pair<ProcessId, Region>{2, 6});
}

TEST_CASE("a clock a region ahead of a peer is held in place")
{
    const RegionParams p{100, 2};
    const DriftPolicy jitter{DriftPolicy::Kind::BoundedJitter, 50};
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
    {
        std::mt19937_64 rng(seed);
        ClockState c;
        c.global.t = 500;
        c.locals = {{0, 599}, {1, 400}};
        const ClockState after = advance_clocks(c, 1, jitter, p, rng);
        CHECK(region(after.locals[0], p) == 5);
        CHECK(after.locals[0].t >= 599);
    }
}

TEST_CASE("region change events")
{
    const RegionParams p{10, 2};
    ClockState before;
    before.global.t = 75;
    before.locals = {{0, 79}, {1, 72}, {2, 79}};

    SUBCASE("nobody crosses")
    {
        ClockState after = before;
        after.locals[1].t = 77;
        CHECK(region_change_events(before, after, p).empty());
    }
    SUBCASE("one crossing")
    {
        ClockState after = before;
        after.locals[0].t = 80;
        const auto e = region_change_events(before, after, p);
        REQUIRE(e.size() == 1);
        CHECK(e[0] == std::pair<ProcessId, Region>{0, 8});
    }
    SUBCASE("two crossings in one advance")
    {
        ClockState after = before;
        after.locals[0].t = 81;
        after.locals[2].t = 80;
        const auto e = region_change_events(before, after, p);
        REQUIRE(e.size() == 2);
        CHECK(e[0].first == 0);
        CHECK(e[1].first == 2);
    }
}

TEST_CASE("jittered clocks stay within one region of each other and of global time")
{
    const RegionParams p{10, 2};
    const DriftPolicy jitter{DriftPolicy::Kind::BoundedJitter, 3};
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        std::mt19937_64 rng(seed);
        ClockState c = initial_clocks(3, p);
        std::int64_t widest = 0;
        bool synchronized_before_advance = true;
        for (int step = 0; step < 1000; ++step)
        {
            const ClockState next = advance_clocks(c, 1, jitter, p, rng);
            for (std::size_t j = 0; j < c.locals.size(); ++j)
            {
                CHECK(next.locals[j].t >= c.locals[j].t);
            }
            // Nobody reaches r + 1 before everybody has been in r.
            const Region lo = std::min_element(c.locals.begin(), c.locals.end(),
                                               [](auto& a, auto& b) { return a.t < b.t; })
                                  ->t / p.rs;
            for (const LocalClock& l : next.locals)
            {
                synchronized_before_advance = synchronized_before_advance && region(l, p) <= lo + 1;
            }
            c = next;
            CHECK(max_pairwise_gap(c, p) <= 1);
            CHECK(max_global_gap(c, p) <= 1);
            widest = std::max(widest, max_pairwise_gap(c, p));
        }
        CHECK(synchronized_before_advance);
        CHECK(widest == 1);
    }
}

TEST_CASE("region parameters are validated")
{
    CHECK_THROWS_AS((RegionParams{0, 5}.validate(0)), ConfigError);
    CHECK_THROWS_AS((RegionParams{100, 6}.validate(5)), ConfigError);
    CHECK_NOTHROW((RegionParams{100, 7}.validate(5)));
}
