#include "boundstab/sim_kernel.hpp"

#include "boundstab/protocols.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace boundstab
{
    namespace
    {
        constexpr std::uint64_t fault_stream = 0x9e3779b97f4a7c15ULL;

        CounterSnap snap_free(Residue x, Region r, const CounterParams& p)
        {
            return {BoundedRep::residue(x, p), BoundedRep::lift_free_snapshot(x, r, p), 0};
        }
        CounterSnap snap_free(Value x, Region, const CounterParams& p)
        {
            return {UnboundedRep::residue(x, p), x, 0};
        }
        template <class S>
        CounterSnap snap_dep(const Cell<S>& c, Region r, const CounterParams& p)
        {
            if (!c)
            {
                return {};
            }
            if constexpr (std::is_same_v<S, Residue>)
            {
                return {BoundedRep::residue(c->value, p), BoundedRep::lift_dep_snapshot(c->value, r, p), c->created};
            }
            else
            {
                return {UnboundedRep::residue(c->value, p), c->value, c->created};
            }
        }
    } // namespace

    void KernelConfig::validate(const Program& program) const
    {
        regions.validate(program.largest_max_r());
        for (const FamilyDecl& f : program.def.families)
        {
            if (f.params.maxinc < 2)
            {
                throw ConfigError("family " + f.name + ": maxinc must be >= 2 to simulate (got " +
                                  std::to_string(f.params.maxinc) + ")");
            }
        }
        if (channel_lifetime < 0)
        {
            throw ConfigError("channel_lifetime must be >= 0");
        }
        if (loss_probability < 0.0 || loss_probability >= 1.0)
        {
            throw ConfigError("loss_probability must be in [0, 1)");
        }
        if (steps_per_time_unit < 1)
        {
            throw ConfigError("steps_per_time_unit must be >= 1");
        }
        if (drift.max_step_skew < 0)
        {
            throw ConfigError("max_step_skew must be >= 0");
        }
        for (const FaultSpec& f : faults)
        {
            if (f.process < 0 || f.process >= program.def.process_count())
            {
                throw ConfigError("fault targets unknown process " + std::to_string(f.process));
            }
        }
    }

    KernelConfig kernel_config(const Scenario& scenario)
    {
        KernelConfig c;
        c.regions = scenario.regions;
        c.drift = scenario.drift;
        c.channel_lifetime = scenario.channel_lifetime;
        c.loss_probability = scenario.loss_probability;
        c.steps_per_time_unit = scenario.steps_per_time_unit;
        c.steps = scenario.total_steps();
        c.faults = scenario.faults;
        return c;
    }

    KernelConfig resolved_config(const Scenario& scenario, const Program& program)
    {
        KernelConfig c = kernel_config(scenario);
        if (c.regions.start_region == 0)
        {
            c.regions.start_region = 2 + program.largest_max_r();
        }
        return c;
    }

    template <class Rep>
    Simulation<Rep>::Simulation(const Program& program, KernelConfig config, std::uint64_t seed)
        : program_(&program), config_(std::move(config))
    {
        config_.validate(program);
        s_.seed = seed;
        s_.rng.seed(seed);
        s_.fault_rng.seed(seed ^ fault_stream);
        s_.clocks = initial_clocks(program.def.process_count(), config_.regions);
        const Region r0 = config_.regions.start_region;
        for (ProcessId p = 0; p < program.def.process_count(); ++p)
        {
            const Layout& layout = program.layout(p);
            ProcessState<Scalar> proc;
            for (const FreeSlot& slot : layout.free)
            {
                const CounterParams& params = program.family(slot.family);
                proc.free.push_back(Rep::initial_free(legit_free_bounds(r0, params).min, params));
            }
            proc.dep.resize(layout.dep.size());
            proc.vars = program.def.initial_vars[p];
            s_.processes.push_back(std::move(proc));
        }
        reset_budgets();
    }

    template <class Rep>
    Simulation<Rep>::Simulation(const Program& program, KernelConfig config, State state)
        : program_(&program), config_(std::move(config)), s_(std::move(state))
    {
        config_.validate(program);
    }

    template <class Rep>
    void Simulation<Rep>::reset_budgets()
    {
        s_.budget.clear();
        s_.spontaneous_budget.clear();
        for (const FamilyDecl& f : program_->def.families)
        {
            const std::int64_t b = f.params.maxinc - 1;
            s_.budget.push_back(b);
            s_.spontaneous_budget.push_back(std::max<std::int64_t>(1, b / 2));
        }
    }

    template <class Rep>
    void Simulation<Rep>::expire(std::vector<Event>& events)
    {
        const Region g = global_region();
        auto expire_cell = [&](Cell<Scalar>& c) {
            if (c && g > c->created + program_->def.dep_kinds[c->kind].spec.r_f)
            {
                c.reset();
            }
        };
        for (ProcessState<Scalar>& proc : s_.processes)
        {
            std::for_each(proc.dep.begin(), proc.dep.end(), expire_cell);
        }
        for (auto& [ch, queue] : s_.channels)
        {
            for (auto it = queue.begin(); it != queue.end();)
            {
                if (g > it->sent + config_.channel_lifetime)
                {
                    events.push_back({"drop", {static_cast<std::int64_t>(it->id), it->from, it->to, it->kind}});
                    it = queue.erase(it);
                    continue;
                }
                std::for_each(it->stamps.begin(), it->stamps.end(), expire_cell);
                ++it;
            }
        }
    }

    template <class Rep>
    std::vector<int> Simulation<Rep>::actions_for(ProcessId p, Trigger trigger, int message_kind) const
    {
        std::vector<int> out;
        const int role = program_->def.roles[p];
        const auto& actions = program_->def.actions;
        for (int a = 0; a < static_cast<int>(actions.size()); ++a)
        {
            const ActionSpec& act = actions[a];
            if (act.trigger == trigger && (act.role == -1 || act.role == role) &&
                (trigger != Trigger::Receive || act.message_kind == message_kind))
            {
                out.push_back(a);
            }
        }
        return out;
    }

    template <class Rep>
    void Simulation<Rep>::run_action(ProcessId p, std::span<const int> candidates, const LiftedMessage* msg,
                                     bool spontaneous, std::vector<Event>& events, int& action)
    {
        std::vector<std::int64_t> allowance = s_.budget;
        if (spontaneous)
        {
            for (std::size_t f = 0; f < allowance.size(); ++f)
            {
                allowance[f] = std::min(allowance[f], s_.spontaneous_budget[f]);
            }
        }
        StepInputs in;
        in.self = p;
        in.local_region = local_region(p);
        in.global_region = global_region();
        in.step = s_.step;
        in.increment = 1;
        in.budget_left = allowance;
        in.peer_vars = [this](ProcessId q) -> const std::vector<std::int64_t>& { return s_.processes.at(q).vars; };

        StatementResult r = execute_statement<Rep>(s_.processes[p], in, *program_, candidates, msg, s_.rng);
        action = r.action;
        if (r.spent)
        {
            const int f = program_->def.actions[r.action].family;
            s_.budget[f] -= in.increment;
            if (spontaneous)
            {
                s_.spontaneous_budget[f] -= in.increment;
            }
        }
        for (LiftedMessage& out : r.outbox)
        {
            if (!program_->def.topology.has_edge(p, out.to))
            {
                throw InvariantViolation(s_.step, "process " + std::to_string(p) + " sent to non-neighbour " +
                                                      std::to_string(out.to));
            }
            out.id = s_.next_message_id++;
            events.push_back({"send", {static_cast<std::int64_t>(out.id), out.from, out.to, out.kind}});
            s_.channels[{p, out.to}].push_back(Rep::reduce_msg(out, in.local_region, *program_));
        }
        for (Event& e : r.events)
        {
            events.push_back(std::move(e));
        }
    }
} // namespace boundstab

namespace boundstab
{
    template <class Rep>
    TraceRecord Simulation<Rep>::step()
    {
        std::vector<Event> events;
        const Region g_before = global_region();
        const bool tick = (s_.step + 1) % static_cast<std::uint64_t>(config_.steps_per_time_unit) == 0;
        if (tick)
        {
            const ClockState before = s_.clocks;
            s_.clocks = advance_clocks(before, 1, config_.drift, config_.regions, s_.rng);
            if (max_pairwise_gap(s_.clocks, config_.regions) > 1 || max_global_gap(s_.clocks, config_.regions) > 1)
            {
                throw InvariantViolation(s_.step, "clock skew exceeds one region");
            }
            if (global_region() != g_before)
            {
                reset_budgets();
                events.push_back({"region", {global_region()}});
            }
            expire(events);
            for (auto [p, r] : region_change_events(before, s_.clocks, config_.regions))
            {
                Rep::region_change(s_.processes[p], p, r, *program_);
                const std::vector<int> ticks = actions_for(p, Trigger::Tick, -1);
                if (!ticks.empty())
                {
                    int ignored = -1;
                    run_action(p, ticks, nullptr, true, events, ignored);
                }
            }
        }

        for (std::size_t i = 0; i < config_.faults.size(); ++i)
        {
            if (config_.faults[i].step == s_.step)
            {
                inject(config_.faults[i]);
                events.push_back({"fault", {static_cast<std::int64_t>(i)}});
            }
        }

        const int n = program_->def.process_count();
        if (s_.order_pos >= s_.order.size())
        {
            s_.order.resize(n);
            std::iota(s_.order.begin(), s_.order.end(), 0);
            std::shuffle(s_.order.begin(), s_.order.end(), s_.rng);
            s_.order_pos = 0;
        }
        const ProcessId p = s_.order[s_.order_pos++];

        std::vector<Channel> incoming;
        for (const auto& [ch, queue] : s_.channels)
        {
            if (ch.second == p && !queue.empty())
            {
                incoming.push_back(ch);
            }
        }
        int action = -1;
        const bool receive = !incoming.empty() && (s_.rng() & 1U) != 0;
        if (receive)
        {
            std::uniform_int_distribution<std::size_t> pick(0, incoming.size() - 1);
            auto& queue = s_.channels[incoming[pick(s_.rng)]];
            Message<Scalar> m = std::move(queue.front());
            queue.pop_front();
            const std::vector<std::int64_t> tag{static_cast<std::int64_t>(m.id), m.from, m.to, m.kind};
            bool lost = false;
            if (config_.loss_probability > 0.0)
            {
                std::uniform_real_distribution<double> u(0.0, 1.0);
                lost = u(s_.rng) < config_.loss_probability;
            }
            if (lost)
            {
                events.push_back({"drop", tag});
            }
            else
            {
                const LiftedMessage lifted = Rep::lift_msg(m, local_region(p), *program_);
                const std::vector<int> handlers = actions_for(p, Trigger::Receive, m.kind);
                std::vector<Event> handled{{"recv", tag}};
                run_action(p, handlers, &lifted, false, handled, action);
                if (action >= 0)
                {
                    events.insert(events.end(), handled.begin(), handled.end());
                }
                else
                {
                    // No enabled handler (for instance, budget exhausted): the message stays queued.
                    queue.push_front(std::move(m));
                }
            }
        }
        else
        {
            const std::vector<int> candidates = actions_for(p, Trigger::Spontaneous, -1);
            run_action(p, candidates, nullptr, true, events, action);
        }

        TraceRecord rec = snapshot(p, action, std::move(events));
        ++s_.step;
        return rec;
    }

    template <class Rep>
    void Simulation<Rep>::run(const std::function<void(const TraceRecord&)>& sink)
    {
        while (!done())
        {
            sink(step());
        }
    }

    template <class Rep>
    Trace Simulation<Rep>::run()
    {
        Trace t;
        run([&](const TraceRecord& r) { t.records.push_back(r); });
        t.header = header();
        return t;
    }

    template <class Rep>
    TraceHeader Simulation<Rep>::header() const
    {
        TraceHeader h;
        h.protocol = program_->def.name;
        h.seed = s_.seed;
        h.steps = config_.steps;
        for (const FamilyDecl& f : program_->def.families)
        {
            h.families.push_back(f.name);
            h.family_params.push_back(f.params);
        }
        h.bounded = Rep::bounded;
        return h;
    }

    template <class Rep>
    TraceRecord Simulation<Rep>::snapshot(int actor, int action, std::vector<Event> events) const
    {
        TraceRecord rec;
        rec.step = s_.step;
        rec.global_region = global_region();
        rec.actor = actor;
        rec.action = action;
        rec.events = std::move(events);
        for (ProcessId p = 0; p < static_cast<ProcessId>(s_.processes.size()); ++p)
        {
            const ProcessState<Scalar>& proc = s_.processes[p];
            const Layout& layout = program_->layout(p);
            ProcessSnap ps;
            ps.region = local_region(p);
            for (std::size_t i = 0; i < proc.free.size(); ++i)
            {
                ps.counters.push_back(snap_free(proc.free[i], ps.region, program_->family(layout.free[i].family)));
            }
            for (std::size_t i = 0; i < proc.dep.size(); ++i)
            {
                ps.counters.push_back(snap_dep(proc.dep[i], ps.region, program_->kind_params(layout.dep[i].kind)));
            }
            ps.vars = proc.vars;
            rec.processes.push_back(std::move(ps));
        }
        for (const auto& [ch, queue] : s_.channels)
        {
            for (const Message<Scalar>& m : queue)
            {
                MessageSnap ms{m.id, m.from, m.to, m.kind, m.sent, m.fields, {}, {}};
                for (const Cell<Scalar>& c : m.stamps)
                {
                    ms.stamp_kinds.push_back(c ? c->kind : -1);
                    ms.stamps.push_back(c ? snap_dep(c, rec.global_region, program_->kind_params(c->kind))
                                          : CounterSnap{});
                }
                rec.messages.push_back(std::move(ms));
            }
        }
        return rec;
    }
} // namespace boundstab

namespace boundstab
{
    template <class Rep>
    typename Rep::Scalar Simulation<Rep>::fault_value(std::int64_t v, const CounterParams& p) const
    {
        return Rep::from_lifted(v, p);
    }

    template <class Rep>
    void Simulation<Rep>::corrupt_process(ProcessId p)
    {
        ProcessState<Scalar>& proc = s_.processes[p];
        const Layout& layout = program_->layout(p);
        const Region g = global_region();
        auto residue = [&](const CounterParams& params) {
            std::uniform_int_distribution<std::int64_t> d(0, params.maxbound() - 1);
            return fault_value(d(s_.fault_rng), params);
        };
        for (std::size_t i = 0; i < proc.free.size(); ++i)
        {
            proc.free[i] = residue(program_->family(layout.free[i].family));
        }
        for (std::size_t i = 0; i < proc.dep.size(); ++i)
        {
            const int kind = layout.dep[i].kind;
            if ((s_.fault_rng() & 1U) != 0)
            {
                proc.dep[i] = DepCell<Scalar>{residue(program_->kind_params(kind)), kind, g, g};
            }
            else
            {
                proc.dep[i].reset();
            }
        }
        for (std::size_t i = 0; i < proc.vars.size(); ++i)
        {
            std::uniform_int_distribution<std::int64_t> d(0, std::max<std::int64_t>(1, layout.vars[i].domain) - 1);
            proc.vars[i] = d(s_.fault_rng);
        }
    }

    template <class Rep>
    void Simulation<Rep>::inject(const FaultSpec& fault)
    {
        using Kind = FaultSpec::Kind;
        const Region g = global_region();
        if (fault.kind == Kind::CorruptAll)
        {
            for (ProcessId p = 0; p < static_cast<ProcessId>(s_.processes.size()); ++p)
            {
                corrupt_process(p);
            }
            for (auto& [ch, queue] : s_.channels)
            {
                for (Message<Scalar>& m : queue)
                {
                    for (Cell<Scalar>& c : m.stamps)
                    {
                        if (c)
                        {
                            const CounterParams& params = program_->kind_params(c->kind);
                            std::uniform_int_distribution<std::int64_t> d(0, params.maxbound() - 1);
                            c->value = fault_value(d(s_.fault_rng), params);
                        }
                    }
                }
            }
            return;
        }

        if (fault.kind == Kind::OverwriteStamp || fault.kind == Kind::DeleteStamp)
        {
            std::size_t index = 0;
            for (auto& [ch, queue] : s_.channels)
            {
                for (auto it = queue.begin(); it != queue.end(); ++it, ++index)
                {
                    if (index != fault.message)
                    {
                        continue;
                    }
                    if (fault.stamp < 0 || fault.stamp >= static_cast<int>(it->stamps.size()) || !it->stamps[fault.stamp])
                    {
                        throw ConfigError("fault: message " + std::to_string(fault.message) + " has no stamp " +
                                          std::to_string(fault.stamp));
                    }
                    if (fault.kind == Kind::DeleteStamp)
                    {
                        queue.erase(it);
                    }
                    else
                    {
                        Cell<Scalar>& c = it->stamps[fault.stamp];
                        c->value = fault_value(fault.value, program_->kind_params(c->kind));
                    }
                    return;
                }
            }
            throw ConfigError("fault: no in-flight message " + std::to_string(fault.message));
        }

        if (fault.process < 0 || fault.process >= static_cast<ProcessId>(s_.processes.size()))
        {
            throw ConfigError("fault: no process " + std::to_string(fault.process));
        }
        ProcessState<Scalar>& proc = s_.processes[fault.process];
        const Layout& layout = program_->layout(fault.process);
        auto find = [&](const auto& slots) -> int {
            for (std::size_t i = 0; i < slots.size(); ++i)
            {
                if (slots[i].name == fault.target)
                {
                    return static_cast<int>(i);
                }
            }
            return -1;
        };
        auto missing = [&](const std::string& what) {
            return ConfigError("fault: process " + std::to_string(fault.process) + " has no " + what + " '" +
                               fault.target + "'");
        };

        switch (fault.kind)
        {
        case Kind::OverwriteCounter: {
            if (const int i = find(layout.free); i >= 0)
            {
                proc.free[i] = fault_value(fault.value, program_->family(layout.free[i].family));
                return;
            }
            const int i = find(layout.dep);
            if (i < 0 || !proc.dep[i])
            {
                throw missing("present counter");
            }
            proc.dep[i]->value = fault_value(fault.value, program_->kind_params(layout.dep[i].kind));
            return;
        }
        case Kind::InsertDep: {
            const int i = find(layout.dep);
            if (i < 0)
            {
                throw missing("dependent counter");
            }
            const int kind = layout.dep[i].kind;
            proc.dep[i] = DepCell<Scalar>{fault_value(fault.value, program_->kind_params(kind)), kind, g, g};
            return;
        }
        case Kind::DeleteDep: {
            const int i = find(layout.dep);
            if (i < 0)
            {
                throw missing("dependent counter");
            }
            proc.dep[i].reset();
            return;
        }
        case Kind::ScrambleVar: {
            const int i = find(layout.vars);
            if (i < 0)
            {
                throw missing("variable");
            }
            proc.vars[i] = euclid_mod(fault.value, std::max<std::int64_t>(1, layout.vars[i].domain));
            return;
        }
        case Kind::CorruptProcess:
            corrupt_process(fault.process);
            return;
        default:
            return;
        }
    }

    Simulation<UnboundedRep> lift_to_oracle(const Simulation<BoundedRep>& bounded)
    {
        const auto& b = bounded.state();
        const Program& program = bounded.program();
        const Region g = bounded.global_region();
        SimState<Value> s;
        s.clocks = b.clocks;
        for (ProcessId p = 0; p < static_cast<ProcessId>(b.processes.size()); ++p)
        {
            s.processes.push_back(lift_state(b.processes[p], p, bounded.local_region(p), program));
        }
        for (const auto& [ch, queue] : b.channels)
        {
            auto& out = s.channels[ch];
            for (const BoundedMessage& m : queue)
            {
                out.push_back(lift_message(m, g, program));
            }
        }
        s.rng = b.rng;
        s.fault_rng = b.fault_rng;
        s.order = b.order;
        s.order_pos = b.order_pos;
        s.budget = b.budget;
        s.spontaneous_budget = b.spontaneous_budget;
        s.step = b.step;
        s.next_message_id = b.next_message_id;
        s.seed = b.seed;
        KernelConfig config = bounded.config();
        config.faults.clear();
        return Simulation<UnboundedRep>(program, std::move(config), std::move(s));
    }

    Trace run(const Scenario& scenario, std::uint64_t seed)
    {
        const Program program = build_program(scenario);
        Simulation<BoundedRep> sim(program, resolved_config(scenario, program), seed);
        return sim.run();
    }

    Trace run(const Scenario& scenario)
    {
        return run(scenario, scenario.seed);
    }

    template class Simulation<BoundedRep>;
    template class Simulation<UnboundedRep>;
} // namespace boundstab
