#include "doctest.h"

#include "fixtures.hpp"

#include "boundstab/sim_kernel.hpp"

#include <map>
#include <sstream>

using namespace boundstab;

namespace
{
    Scenario lamport(int n, std::int64_t lifetime = 1)
    {
        Scenario s;
        s.protocol = "logical_clocks";
        s.topology = {"line", n, {}};
        s.regions.rs = 20;
        s.families = {{"cl", 10}};
        s.channel_lifetime = lifetime;
        s.run_regions = 30;
        return s;
    }

    struct Harness
    {
        Program program;
        Simulation<BoundedRep> sim;

        explicit Harness(const Scenario& s, std::uint64_t seed = 1)
            : program(build_program(s)), sim(program, resolved_config(s, program), seed)
        {
        }

        std::size_t in_flight() const
        {
            std::size_t n = 0;
            for (const auto& [ch, q] : sim.state().channels)
            {
                n += q.size();
            }
            return n;
        }
    };

    std::string text(const Trace& t)
    {
        std::ostringstream s;
        write_trace(s, t);
        return s.str();
    }
} // namespace

TEST_CASE("a lone process counts up")
{
    Scenario s = lamport(1);
    s.run_regions = 1;
    const Trace t = run(s);
    REQUIRE(t.records.size() == 20);
    Value last = *t.records.front().processes[0].counters[0].lifted - (t.records.front().action == 0 ? 1 : 0);
    CHECK(last == 90);
    int events = 0;
    for (const TraceRecord& r : t.records)
    {
        const Value cl = *r.processes[0].counters[0].lifted;
        CHECK(cl >= last);
        if (r.global_region == 3 && r.action == 0)
        {
            CHECK(cl == last + 1);
            ++events;
        }
        last = cl;
    }
    // Spontaneous actions may spend half the region's budget of maxinc - 1.
    CHECK(events == 4);
}

TEST_CASE("a receive clock exceeds the send stamp")
{
    const Trace t = run(lamport(2));
    int delivered = 0;
    for (const TraceRecord& r : t.records)
    {
        for (const Event& e : r.events)
        {
            if (e.name == "deliver")
            {
                CHECK(e.args[1] > e.args[0]);
                ++delivered;
            }
        }
    }
    CHECK(delivered > 0);
}

TEST_CASE("runs are deterministic per seed")
{
    for (const std::string& name : fixtures::protocols())
    {
        CAPTURE(name);
        Scenario s = fixtures::shipped(name);
        s.run_regions = 20;
        CHECK(text(run(s, 5)) == text(run(s, 5)));
        CHECK(text(run(s, 5)) != text(run(s, 6)));
    }
}

TEST_CASE("every process acts within each window of 2n - 1 steps")
{
    for (const std::string& name : fixtures::protocols())
    {
        CAPTURE(name);
        const Trace t = run(fixtures::shipped(name));
        const std::size_t n = t.records.front().processes.size();
        std::vector<std::uint64_t> last(n, 0);
        for (const TraceRecord& r : t.records)
        {
            REQUIRE(r.actor >= 0);
            last[r.actor] = r.step;
            for (std::size_t p = 0; p < n; ++p)
            {
                CHECK(r.step - last[p] < 2 * n - 1 + (r.step < 2 * n ? 2 * n : 0));
            }
        }
    }
}

TEST_CASE("spending actions stay within the per-region budget")
{
    for (const std::string name : {"logical_clocks", "vector_clocks", "mutual_exclusion", "paxos_single_decree"})
    {
        CAPTURE(name);
        const Scenario s = fixtures::shipped(name);
        const Program p = build_program(s);
        std::map<Region, std::int64_t> spent;
        for (const TraceRecord& r : run(s).records)
        {
            if (r.action >= 0 && p.def.actions[r.action].spends)
            {
                ++spent[r.global_region];
            }
        }
        for (const auto& [region, n] : spent)
        {
            CHECK(n <= p.family(0).maxinc - 1);
        }
    }
}

TEST_CASE("fault injection")
{
    SUBCASE("overwrite a free counter")
    {
        Scenario sc = lamport(2);
        sc.deps = {{"cl.m", 0, 5}};
        Harness h(sc);
        REQUIRE(h.program.family(0).maxbound() == 780);
        h.sim.inject({FaultSpec::Kind::OverwriteCounter, 0, 1, "cl", 779});
        CHECK(h.sim.state().processes[1].free[0] == Residue{779});
        h.sim.inject({FaultSpec::Kind::OverwriteCounter, 0, 1, "cl", 780 + 5});
        CHECK(h.sim.state().processes[1].free[0] == Residue{5});
    }
    SUBCASE("a spurious queue entry")
    {
        Harness h(fixtures::shipped("mutual_exclusion"));
        CHECK_FALSE(h.sim.state().processes[0].dep[1].has_value());
        h.sim.inject({FaultSpec::Kind::InsertDep, 0, 0, "queue.1", 12345});
        REQUIRE(h.sim.state().processes[0].dep[1].has_value());
        h.sim.inject({FaultSpec::Kind::DeleteDep, 0, 0, "queue.1", 0});
        CHECK_FALSE(h.sim.state().processes[0].dep[1].has_value());
    }
    SUBCASE("deleting a stamp loses its message")
    {
        Harness h(lamport(3));
        while (h.in_flight() == 0)
        {
            h.sim.step();
        }
        const std::size_t before = h.in_flight();
        FaultSpec f{FaultSpec::Kind::DeleteStamp, 0, 0, {}};
        h.sim.inject(f);
        CHECK(h.in_flight() == before - 1);
    }
    SUBCASE("missing targets are configuration errors")
    {
        Harness h(lamport(2));
        CHECK_THROWS_AS(h.sim.inject({FaultSpec::Kind::OverwriteCounter, 0, 0, "nope", 1}), ConfigError);
        CHECK_THROWS_AS(h.sim.inject({FaultSpec::Kind::InsertDep, 0, 0, "cl", 1}), ConfigError);
        CHECK_THROWS_AS(h.sim.inject({FaultSpec::Kind::ScrambleVar, 0, 7, "x", 1}), ConfigError);
        FaultSpec stamp{FaultSpec::Kind::OverwriteStamp, 0, 0, {}};
        stamp.message = 99;
        CHECK_THROWS_AS(h.sim.inject(stamp), ConfigError);
    }
    SUBCASE("corrupt_all leaves the shape intact")
    {
        Harness h(fixtures::shipped("paxos_single_decree"));
        const auto shape = h.sim.snapshot();
        h.sim.inject({FaultSpec::Kind::CorruptAll, 0, 0, {}});
        const auto after = h.sim.snapshot();
        REQUIRE(after.processes.size() == shape.processes.size());
        for (std::size_t p = 0; p < shape.processes.size(); ++p)
        {
            CHECK(after.processes[p].counters.size() == shape.processes[p].counters.size());
            CHECK(after.processes[p].vars.size() == shape.processes[p].vars.size());
        }
    }
}

TEST_CASE("messages never outlive the channel lifetime")
{
    for (const std::int64_t lifetime : {0, 1, 5})
    {
        CAPTURE(lifetime);
        Scenario s = lamport(4, lifetime);
        s.params["send_percent"] = 100;
        s.run_regions = 60;
        const Trace t = run(s, 9);
        std::size_t seen = 0;
        for (const TraceRecord& r : t.records)
        {
            for (const MessageSnap& m : r.messages)
            {
                CHECK(r.global_region <= m.sent + lifetime);
                ++seen;
            }
        }
        CHECK(seen >= 100);
        CHECK(lifetime_scan(t, build_program(s), lifetime).pass);
    }
}

TEST_CASE("fault-free bounded counters always have genuine lifts")
{
    for (const std::string& name : fixtures::protocols())
    {
        CAPTURE(name);
        const Trace t = run(fixtures::shipped(name), 4);
        for (const TraceRecord& r : t.records)
        {
            for (const ProcessSnap& p : r.processes)
            {
                for (const CounterSnap& c : p.counters)
                {
                    CHECK(c.residue.has_value() == c.lifted.has_value());
                }
            }
        }
    }
}

TEST_CASE("dependent cells keep their value while alive")
{
    for (const std::string& name : fixtures::protocols())
    {
        CAPTURE(name);
        const Trace t = run(fixtures::shipped(name), 2);
        for (std::size_t i = 1; i < t.records.size(); ++i)
        {
            const TraceRecord& a = t.records[i - 1];
            const TraceRecord& b = t.records[i];
            for (std::size_t p = 0; p < a.processes.size(); ++p)
            {
                // Tick actions run when a process changes region.
                if (static_cast<int>(p) == b.actor || a.processes[p].region != b.processes[p].region)
                {
                    continue;
                }
                const auto& ca = a.processes[p].counters;
                const auto& cb = b.processes[p].counters;
                for (std::size_t k = 0; k < ca.size(); ++k)
                {
                    if (ca[k].created != 0 && cb[k].residue)
                    {
                        CHECK(cb[k] == ca[k]);
                    }
                }
            }
        }
    }
}

TEST_CASE("vector clock entries never decrease without faults")
{
    const Trace t = run(fixtures::shipped("vector_clocks"), 3);
    for (std::size_t i = 1; i < t.records.size(); ++i)
    {
        for (std::size_t p = 0; p < t.records[i].processes.size(); ++p)
        {
            const auto& before = t.records[i - 1].processes[p].counters;
            const auto& after = t.records[i].processes[p].counters;
            for (std::size_t k = 0; k < before.size(); ++k)
            {
                if (before[k].lifted && after[k].lifted)
                {
                    CHECK(*after[k].lifted >= *before[k].lifted);
                }
            }
        }
    }
}

TEST_CASE("configuration errors")
{
    Scenario s = lamport(2);
    s.families = {{"cl", 1}};
    CHECK_THROWS_AS(run(s), ConfigError);
    s = lamport(2);
    s.families = {};
    CHECK_THROWS_WITH_AS(run(s), doctest::Contains("maxinc"), ConfigError);
    s = lamport(2);
    s.regions.rs = 0;
    CHECK_THROWS_AS(run(s), ConfigError);
    s = lamport(2);
    s.loss_probability = 1.5;
    CHECK_THROWS_AS(run(s), ConfigError);
}
