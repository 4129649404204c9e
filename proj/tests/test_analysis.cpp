#include "doctest.h"

#include "fixtures.hpp"

#include <cmath>

using namespace boundstab;

namespace
{
    Scenario lamport(std::int64_t regions)
    {
        Scenario s;
        s.protocol = "logical_clocks";
        s.topology = {"ring", 4, {}};
        s.regions.rs = 20;
        s.drift = {DriftPolicy::Kind::BoundedJitter, 1};
        s.families = {{"cl", 10}};
        s.run_regions = regions;
        return s;
    }

    Region start_of(const Scenario& s) { return resolved_config(s, build_program(s)).regions.start_region; }

    std::uint64_t step_at_region(const Scenario& s, Region r)
    {
        return static_cast<std::uint64_t>(r - start_of(s)) * fixtures::steps_per_region(s);
    }
} // namespace

TEST_CASE("closure")
{
    SUBCASE("ten thousand fault-free steps")
    {
        const Scenario s = lamport(500);
        const Trace t = run(s, 11);
        REQUIRE(t.records.size() == 10000);
        CHECK(closure_check(t, s).pass);
    }
    SUBCASE("one perturbed residue fails at its step")
    {
        Scenario s = lamport(1);
        Trace t = run(s);
        t.records.resize(3);
        t.header.steps = 3;
        REQUIRE(closure_check(t, s).pass);
        auto& r = t.records[1].processes[2].counters[0].residue;
        *r = (*r + 1) % build_program(s).family(0).maxbound();
        const CheckResult c = closure_check(t, s);
        CHECK_FALSE(c.pass);
        CHECK(c.first_divergence == 1);
    }
    SUBCASE("empty trace")
    {
        const Scenario s = lamport(1);
        Trace t;
        t.header.seed = 1;
        CHECK(closure_check(t, s).pass);
    }
    SUBCASE("faulted scenarios are refused")
    {
        Scenario s = lamport(1);
        s.faults = {{FaultSpec::Kind::CorruptAll, 3, 0, {}}};
        CHECK_THROWS_AS(closure_check(run(s), s), ConfigError);
    }
}

TEST_CASE("convergence")
{
    SUBCASE("clocks corrupted at region 20 are back in window by region 23")
    {
        Scenario s = lamport(60);
        s.faults = {{FaultSpec::Kind::CorruptAll, step_at_region(s, 20) + 3, 0, {}}};
        const Trace t = run(s, 5);
        const ConvergenceResult c = convergence_check(t, s);
        CHECK(c.pass);
        CHECK(c.fault_stop_region == 20);
        CHECK(c.free_bound_region == 23);
        bool corrupted = false;
        for (const TraceRecord& r : t.records)
        {
            for (const ProcessSnap& p : r.processes)
            {
                corrupted = corrupted || !p.counters[0].lifted;
                if (r.global_region >= 23)
                {
                    CHECK(p.counters[0].lifted.has_value());
                }
            }
        }
        CHECK(corrupted);
    }
    SUBCASE("no faults means the whole trace is the suffix")
    {
        const Scenario s = lamport(30);
        const ConvergenceResult c = convergence_check(run(s), s);
        CHECK(c.pass);
        CHECK(c.suffix_start_step == 0);
    }
    SUBCASE("a spurious dependent cell disappears")
    {
        Scenario s = fixtures::shipped("mutual_exclusion");
        const Program p = build_program(s);
        const Region r0 = start_of(s) + 10;
        s.faults = {{FaultSpec::Kind::InsertDep, step_at_region(s, r0), 1, "queue.2", 4321}};
        s.run_regions = interval_boundary(r0 + 1, p, 3) - start_of(s) + 10;
        const Trace t = run(s, 6);
        const std::int64_t r_f = p.def.dep_kinds[p.layout(1).dep[2].kind].spec.r_f;
        for (const TraceRecord& r : t.records)
        {
            const CounterSnap& c = r.processes[1].counters[1 + 2];
            if (c.residue && c.created <= r0)
            {
                CHECK(r.global_region <= r0 + r_f);
            }
        }
        const ConvergenceResult c = convergence_check(t, s);
        CHECK_MESSAGE(c.pass, c.detail);
        CHECK(lifetime_scan(t, p, s.channel_lifetime).pass);
    }
    SUBCASE("a trace from another seed is rejected")
    {
        const Scenario s = fixtures::campaign("logical_clocks", 2);
        Trace t = run(s, 2);
        t.header.seed = 3;
        CHECK_FALSE(convergence_check(t, s).pass);
    }
    SUBCASE("slack stretches both bounds")
    {
        const Scenario s = fixtures::campaign("logical_clocks", 2, 60);
        const Trace t = run(s, 2);
        const ConvergenceResult one = convergence_check(t, s, 1);
        const ConvergenceResult two = convergence_check(t, s, 2);
        CHECK(two.pass);
        CHECK(two.free_bound_region == one.free_bound_region + 3);
        CHECK(two.suffix_region > one.suffix_region);
    }
}

TEST_CASE("interval boundaries")
{
    Scenario s = lamport(1);
    s.deps = {{"cl.m", 0, 5}};
    const Program p = build_program(s);
    REQUIRE(p.family(0).max_r == 5);
    // span 26 regions per modulus: stop 20 lies in interval 2, boundary of interval 5 is region 44.
    CHECK(interval_boundary(20, p, 3) == 44);
    CHECK(interval_boundary(20, p, 0) == 20);
    for (Region stop = 10; stop < 80; ++stop)
    {
        const Region b = interval_boundary(stop, p, 3);
        CHECK(b > stop);
        CHECK(b <= stop + 27);
        CHECK(interval_boundary(stop + 1, p, 3) >= b);
    }
}

TEST_CASE("scans")
{
    const Scenario s = lamport(20);
    const Program p = build_program(s);
    Trace t = run(s, 3);
    CHECK(lifetime_scan(t, p, s.channel_lifetime).pass);
    CHECK(skew_scan(t, true).pass);
    CHECK_FALSE(skew_scan(t, false).pass);

    Trace still = t;
    for (TraceRecord& r : still.records)
    {
        for (ProcessSnap& q : r.processes)
        {
            q.region = r.global_region;
        }
    }
    CHECK(skew_stats(still).max_pairwise == 0);
    CHECK(skew_scan(still, false).pass);
    still.records[5].processes[1].region += 2;
    CHECK_FALSE(skew_scan(still, true).pass);

    Trace old = t;
    for (TraceRecord& r : old.records)
    {
        if (!r.messages.empty())
        {
            r.messages[0].sent -= 5;
            break;
        }
    }
    CHECK_FALSE(lifetime_scan(old, p, s.channel_lifetime).pass);
}

TEST_CASE("residue view drops lifted values and event arguments")
{
    const Trace t = run(lamport(5), 2);
    for (const TraceRecord& r : t.records)
    {
        const TraceRecord v = residue_view(r);
        CHECK(v.step == r.step);
        for (const ProcessSnap& p : v.processes)
        {
            CHECK_FALSE(p.counters[0].lifted.has_value());
        }
        for (const Event& e : v.events)
        {
            CHECK(e.args.empty());
        }
    }
}

TEST_CASE("verify and its report")
{
    const Scenario s = lamport(10);
    const VerificationReport clean = verify(run(s), s);
    CHECK(clean.closure.has_value());
    CHECK_FALSE(clean.convergence.has_value());
    CHECK(clean.pass());
    const auto lines = clean.lines();
    REQUIRE(lines.size() == 5);
    CHECK(lines[0].rfind("report protocol=logical_clocks", 0) == 0);

    const Scenario f = fixtures::campaign("logical_clocks", 1);
    const VerificationReport faulted = verify(run(f, 1), f);
    CHECK(faulted.convergence.has_value());
    CHECK(faulted.pass());
}

TEST_CASE("campaigns")
{
    const Program p = build_program(fixtures::shipped("paxos_single_decree"));
    const auto a = make_campaign(p, 4, 100, 200);
    CHECK(a.size() >= 2);
    CHECK(a.front().kind == FaultSpec::Kind::CorruptAll);
    CHECK(a.front().step == 100);
    CHECK(a.back().step == 200);
    for (std::size_t i = 1; i < a.size(); ++i)
    {
        CHECK(a[i - 1].step <= a[i].step);
    }
    const auto b = make_campaign(p, 4, 100, 200);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].kind == b[i].kind);
        CHECK(a[i].target == b[i].target);
        CHECK(a[i].value == b[i].value);
    }
}

TEST_CASE("bit widths")
{
    CHECK(bits_required(10, 5) == 10);
    CHECK(bits_required(1, 0) == 6);
    const std::int64_t m = maxbound_of(1'000'000'000, 37);
    CHECK(bits_required(1'000'000'000, 37) == static_cast<int>(std::ceil(std::log2(static_cast<double>(m)))));
    CHECK(bits_required(1'000'000'000, 37) == 39);
    for (std::int64_t maxinc = 1; maxinc < 5000; maxinc = maxinc * 3 + 1)
    {
        for (std::int64_t max_r = 0; max_r < 200; max_r += 7)
        {
            CHECK(bits_required(maxinc, max_r + 7) >= bits_required(maxinc, max_r));
            CHECK(bits_required(maxinc * 3 + 1, max_r) >= bits_required(maxinc, max_r));
        }
    }
}

TEST_CASE("sweep")
{
    SweepGrid g;
    g.rs = 100;
    g.delays = {3600};
    g.rates = {100};
    const auto one = sweep(g);
    REQUIRE(one.size() == 1);
    CHECK(one[0].lifetime_regions == 36);
    CHECK(one[0].max_r == 36);
    CHECK(one[0].maxbound == maxbound_of(100, 36));

    g.multiplier = 2;
    g.extra = 3;
    CHECK(sweep(g)[0].max_r == 75);

    g = SweepGrid{};
    g.delays = {10, 100, 1000};
    g.rates = {1, 1000, 1'000'000};
    const auto rows = sweep(g);
    CHECK(rows.size() == 9);
    CHECK(sweep(g) == rows);
    const std::string csv = sweep_csv(rows);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);

    g.delays = {};
    for (std::int64_t d = 100; d <= 12800; d *= 2)
    {
        g.delays.push_back(d);
    }
    const auto doubling = sweep(g);
    for (std::size_t i = g.rates.size(); i < doubling.size(); ++i)
    {
        CHECK(doubling[i].bits - doubling[i - g.rates.size()].bits <= 2);
    }

    g.rates = {0};
    CHECK_THROWS_AS(sweep(g), ConfigError);
    g.rates = {1};
    g.delays = {-1};
    CHECK_THROWS_AS(sweep(g), ConfigError);
}
