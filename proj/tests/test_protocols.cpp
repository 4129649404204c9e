#include "doctest.h"

#include "fixtures.hpp"

#include "boundstab/sim_kernel.hpp"

#include <algorithm>

using namespace boundstab;

namespace
{
    constexpr Region here = 60;

    // Runs single actions of a protocol on hand-built unbounded states.
    struct Bench
    {
        Program program;
        std::vector<std::vector<std::int64_t>> peers;
        std::mt19937_64 rng{1};

        explicit Bench(const Scenario& s) : program(build_program(s))
        {
            for (ProcessId p = 0; p < program.def.process_count(); ++p)
            {
                peers.push_back(blank(p).vars);
            }
        }

        int index(const std::string& name, ProcessId p) const
        {
            const auto& acts = program.def.actions;
            for (int a = 0; a < static_cast<int>(acts.size()); ++a)
            {
                const int role = acts[a].role;
                if (acts[a].name == name && (role == -1 || role == program.def.roles[p]))
                {
                    return a;
                }
            }
            throw std::runtime_error("no action " + name);
        }

        LiftedState blank(ProcessId p) const
        {
            const Layout& l = program.layout(p);
            LiftedState s;
            s.free.assign(l.free.size(), 3 * here * program.family(0).maxinc);
            s.dep.assign(l.dep.size(), std::nullopt);
            s.vars = program.def.initial_vars.empty() ? std::vector<std::int64_t>(l.vars.size(), 0)
                                                       : program.def.initial_vars[p];
            return s;
        }

        LiftedCell cell(int kind, Value v) const { return DepCell<Value>{v, kind, here, here}; }

        LiftedMessage message(ProcessId from, ProcessId to, int kind, std::vector<std::int64_t> fields,
                              std::vector<LiftedCell> stamps) const
        {
            return LiftedMessage{0, from, to, kind, here, std::move(fields), std::move(stamps)};
        }

        StepInputs inputs(ProcessId p, const std::vector<std::int64_t>& budget)
        {
            StepInputs in;
            in.self = p;
            in.local_region = here;
            in.global_region = here;
            in.budget_left = budget;
            in.peer_vars = [this](ProcessId q) -> const std::vector<std::int64_t>& { return peers[q]; };
            return in;
        }

        bool enabled(ProcessId p, const std::string& name, const LiftedState& s)
        {
            const std::vector<std::int64_t> budget(program.def.families.size(), 100);
            const StepInputs in = inputs(p, budget);
            const GuardView view(p, here, s, nullptr, program.def.topology, in.peer_vars);
            const std::vector<int> one{index(name, p)};
            return evaluate_guards(program.def.actions, one, view).has_value();
        }

        StatementResult exec(ProcessId p, const std::string& name, LiftedState& s, const LiftedMessage* m = nullptr)
        {
            const std::vector<std::int64_t> budget(program.def.families.size(), 100);
            const std::vector<int> one{index(name, p)};
            return execute_statement<UnboundedRep>(s, inputs(p, budget), program, one, m, rng);
        }
    };

    std::size_t count_events(const Trace& t, const std::string& name)
    {
        std::size_t n = 0;
        for (const TraceRecord& r : t.records)
        {
            n += std::count_if(r.events.begin(), r.events.end(), [&](const Event& e) { return e.name == name; });
        }
        return n;
    }

    Scenario base(std::string protocol, TopologySpec topo, std::string family, std::int64_t maxinc = 10)
    {
        Scenario s;
        s.protocol = std::move(protocol);
        s.topology = std::move(topo);
        s.regions.rs = 20;
        s.families = {{std::move(family), maxinc}};
        s.run_regions = 40;
        return s;
    }
} // namespace

TEST_CASE("protocol registry")
{
    std::vector<std::string> expected = fixtures::protocols();
    std::sort(expected.begin(), expected.end());
    std::vector<std::string> names = protocol_names();
    std::sort(names.begin(), names.end());
    CHECK(names == expected);
    Scenario s = base("no_such_protocol", {"line", 2, {}}, "cl");
    CHECK_THROWS_AS(build_program(s), ConfigError);
    s = base("logical_clocks", {"line", 2, {}}, "cl");
    s.params["typo"] = 1;
    CHECK_THROWS_WITH_AS(build_program(s), doctest::Contains("typo"), ConfigError);
    s = base("logical_clocks", {"line", 2, {}}, "clx");
    CHECK_THROWS_AS(build_program(s), ConfigError);
}

TEST_CASE("logical clocks")
{
    Bench b(base("logical_clocks", {"line", 2, {}}, "cl"));
    const Value origin = b.blank(0).free[0];
    auto receive = [&](Value cl, Value stamp) {
        LiftedState s = b.blank(0);
        s.free[0] = origin + cl;
        const LiftedMessage m = b.message(1, 0, 0, {}, {b.cell(0, origin + stamp)});
        b.exec(0, "receive", s, &m);
        return s.free[0] - origin;
    };
    CHECK(receive(5, 9) == 10);
    CHECK(receive(9, 5) == 10);
    LiftedState s = b.blank(0);
    b.exec(0, "local", s);
    CHECK(s.free[0] == origin + 1);
}

TEST_CASE("vector clock merge")
{
    using V = std::vector<std::optional<Value>>;
    V merged = vc_merge({3, 1}, {2, 4});
    CHECK(merged == V{3, 4});
    *merged[0] += 1;
    CHECK(merged == V{4, 4});
    CHECK(vc_merge({5, 5, 5}, {1, 2, 3}) == V{5, 5, 5});
    CHECK(vc_merge({std::nullopt, 2}, {1, std::nullopt}) == V{1, 2});
}

TEST_CASE("vector clocks")
{
    Scenario s = base("vector_clocks", {"edges", 3, {{0, 1}}}, "vc");
    CHECK_THROWS_AS(build_program(s), ConfigError);

    s = base("vector_clocks", {"line", 2, {}}, "vc");
    const Trace t = run(s, 3);
    CHECK(count_events(t, "recv") >= 4);
    for (std::size_t i = 1; i < t.records.size(); ++i)
    {
        for (std::size_t p = 0; p < 2; ++p)
        {
            const auto& a = t.records[i - 1].processes[p].counters;
            const auto& c = t.records[i].processes[p].counters;
            for (std::size_t k = 0; k < a.size(); ++k)
            {
                if (a[k].lifted && c[k].lifted)
                {
                    CHECK(*c[k].lifted >= *a[k].lifted);
                }
            }
        }
    }
    CHECK(safety_scan(t, build_program(s)).pass);
}

TEST_CASE("mutual exclusion")
{
    enum
    {
        requesting,
        in_cs,
        hold,
        replies,
    };
    Bench b(base("mutual_exclusion", {"complete", 2, {}}, "cl"));
    const int own = 2;
    const Value o = b.blank(0).free[0];

    SUBCASE("the older request enters first")
    {
        LiftedState j = b.blank(0);
        LiftedState k = b.blank(1);
        j.dep[own] = b.cell(3, o + 3);
        j.dep[1] = b.cell(2, o + 5);
        k.dep[own] = b.cell(3, o + 5);
        k.dep[0] = b.cell(2, o + 3);
        j.vars[requesting] = k.vars[requesting] = 1;
        j.vars[replies] = 0b10;
        k.vars[replies] = 0b01;
        b.peers = {j.vars, k.vars};
        CHECK(b.enabled(0, "enter", j));
        CHECK_FALSE(b.enabled(1, "enter", k));
        CHECK(ordered_before(o + 3, 0, o + 5, 1));
        CHECK(ordered_before(o + 5, 0, o + 5, 1));
        CHECK_FALSE(ordered_before(std::nullopt, 0, o + 5, 1));
    }
    SUBCASE("a phantom queue entry is pruned")
    {
        LiftedState j = b.blank(0);
        j.dep[1] = b.cell(2, o + 7);
        CHECK(b.enabled(0, "prune", j));
        b.exec(0, "prune", j);
        CHECK_FALSE(j.dep[1].has_value());
    }
    SUBCASE("a phantom entry is gone after the owner's first activation")
    {
        const Scenario s = fixtures::shipped("mutual_exclusion");
        const Program p = build_program(s);
        Simulation<BoundedRep> sim(p, resolved_config(s, p), 5);
        sim.inject({FaultSpec::Kind::InsertDep, 0, 0, "queue.2", 77});
        TraceRecord r;
        do
        {
            r = sim.step();
        } while (r.actor != 0);
        CHECK_FALSE(r.processes[0].counters[1 + 2].residue.has_value());
    }
    SUBCASE("a single process enters on its own")
    {
        Scenario s = base("mutual_exclusion", {"complete", 1, {}}, "cl");
        s.run_regions = 5;
        CHECK(count_events(run(s), "enter") > 0);
    }
    SUBCASE("requirements")
    {
        Scenario s = base("mutual_exclusion", {"line", 3, {}}, "cl");
        CHECK_THROWS_AS(build_program(s), ConfigError);
        s = base("mutual_exclusion", {"complete", 3, {}}, "cl");
        s.loss_probability = 0.1;
        CHECK_THROWS_AS(build_program(s), ConfigError);
    }
}

TEST_CASE("diffusing computation")
{
    SUBCASE("a three-node line completes")
    {
        const Scenario s = base("diffusing_computation", {"line", 3, {}}, "seq", 4);
        const Trace t = run(s, 2);
        CHECK(count_events(t, "complete") > 0);
        CHECK(safety_scan(t, build_program(s)).pass);
    }
    SUBCASE("a repeated diffusion is acknowledged, not forwarded")
    {
        Bench b(base("diffusing_computation", {"line", 3, {}}, "seq", 4));
        const Value o = b.blank(0).free[0];
        LiftedState mid = b.blank(1);
        mid.dep[0] = b.cell(1, o + 2);
        const LiftedMessage m = b.message(0, 1, 0, {}, {b.cell(2, o + 2)});
        const StatementResult r = b.exec(1, "diffuse", mid, &m);
        REQUIRE(r.outbox.size() == 1);
        CHECK(r.outbox[0].to == 0);
        CHECK(r.outbox[0].kind == 1);

        LiftedState fresh = b.blank(1);
        const StatementResult f = b.exec(1, "diffuse", fresh, &m);
        REQUIRE(f.outbox.size() == 1);
        CHECK(f.outbox[0].to == 2);
        CHECK(f.outbox[0].kind == 0);
        CHECK(value_of(fresh.dep[0]) == o + 2);
    }
    SUBCASE("a lone initiator completes at once")
    {
        Scenario s = base("diffusing_computation", {"line", 1, {}}, "seq", 4);
        s.run_regions = 3;
        const Trace t = run(s);
        CHECK(count_events(t, "complete") == count_events(t, "start"));
        CHECK(count_events(t, "start") > 0);
    }
}

TEST_CASE("round comparison")
{
    CHECK(round_rule(5, 7) == RoundAction::Adopt);
    CHECK(round_rule(7, 7) == RoundAction::Normal);
    CHECK(round_rule(7, 5) == RoundAction::Ignore);
    CHECK(round_rule(std::nullopt, 5) == RoundAction::Adopt);
    CHECK(round_rule(5, std::nullopt) == RoundAction::Ignore);
}

TEST_CASE("katz perry snapshots")
{
    Scenario s = base("katz_perry", {"line", 3, {}}, "round", 4);
    CHECK_THROWS_AS(build_program(s), ConfigError);
    s = base("katz_perry", {"complete", 4, {}}, "round", 4);
    const Trace t = run(s, 8);
    CHECK(count_events(t, "snapshot") > 0);
    CHECK(safety_scan(t, build_program(s)).pass);
}

TEST_CASE("paxos")
{
    enum
    {
        promised_id,
        accepted_val,
        accepted_id,
    };
    enum
    {
        prepare,
        promise,
        accept,
        accepted,
        nack,
    };
    Scenario s = base("paxos_single_decree", {"complete", 4, {}}, "seq");
    s.params = {{"proposers", 1}, {"acceptors", 3}, {"quorum", 2}};
    Bench b(s);
    const Value o = b.blank(0).free[0];
    const ProcessId acceptor = 1;

    SUBCASE("a higher prepare is promised")
    {
        LiftedState a = b.blank(acceptor);
        a.dep[0] = b.cell(2, o + 5);
        const LiftedMessage m = b.message(0, acceptor, prepare, {}, {b.cell(1, o + 7)});
        const StatementResult r = b.exec(acceptor, "on_prepare", a, &m);
        REQUIRE(r.outbox.size() == 1);
        CHECK(r.outbox[0].kind == promise);
        CHECK(value_of(a.dep[0]) == o + 7);
    }
    SUBCASE("a lower prepare is refused with the promised number")
    {
        LiftedState a = b.blank(acceptor);
        a.dep[0] = b.cell(2, o + 7);
        const LiftedMessage m = b.message(0, acceptor, prepare, {}, {b.cell(1, o + 5)});
        const StatementResult r = b.exec(acceptor, "on_prepare", a, &m);
        REQUIRE(r.outbox.size() == 1);
        CHECK(r.outbox[0].kind == nack);
        CHECK(value_of(r.outbox[0].stamps[1]) == o + 7);
        CHECK(value_of(a.dep[0]) == o + 7);
    }
    SUBCASE("one proposer gets a value chosen")
    {
        const Trace t = run(s, 4);
        CHECK(count_events(t, "chosen") > 0);
        CHECK(safety_scan(t, build_program(s)).pass);
    }
    SUBCASE("configuration errors")
    {
        Scenario bad = s;
        bad.params["quorum"] = 4;
        CHECK_THROWS_AS(build_program(bad), ConfigError);
        bad = s;
        bad.topology = {"complete", 5, {}};
        CHECK_THROWS_AS(build_program(bad), ConfigError);
        bad = s;
        bad.topology = {"line", 4, {}};
        CHECK_THROWS_AS(build_program(bad), ConfigError);
    }
}

TEST_CASE("shipped scenarios are safe without faults")
{
    for (const std::string& name : fixtures::protocols())
    {
        CAPTURE(name);
        const Scenario s = fixtures::shipped(name);
        for (std::uint64_t seed = 1; seed <= 3; ++seed)
        {
            const ScanResult r = safety_scan(run(s, seed), build_program(s));
            CHECK_MESSAGE(r.pass, r.detail);
        }
    }
}
