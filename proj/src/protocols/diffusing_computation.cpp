#include "common.hpp"

namespace boundstab::proto
{
    namespace
    {
        enum InitiatorVar
        {
            active,
            timer,
            i_waiting,
        };
        enum NodeVar
        {
            parent,
            n_waiting,
        };
        enum Msg
        {
            diffuse_msg,
            ack_msg,
        };
        enum Kind
        {
            current,
            node_seq,
            stamp_seq,
        };
    } // namespace

    // Dijkstra-Scholten style diffusion from process 0. The initiator's
    // sequence number is free; everyone else holds a dependent copy.
    ProtocolDef diffusing_computation(const Scenario& sc, Topology topo)
    {
        const std::int64_t v = sc.channel_lifetime;
        ParamReader params("diffusing_computation", sc.params);
        const std::int64_t life = params.get("lifetime", 2 * v + 6, 4);
        const std::int64_t patience = params.get("timeout", life - 3, 1);
        params.finish();
        if (patience > life - 3)
        {
            throw ConfigError("diffusing_computation: timeout must be <= lifetime - 3");
        }
        if (!topo.strongly_connected())
        {
            throw ConfigError("diffusing_computation: topology must be connected");
        }
        const int n = topo.size();

        ProtocolDef def;
        def.name = "diffusing_computation";
        def.topology = std::move(topo);
        def.families = {{"seq", {}}};
        def.dep_kinds = {{"cur", "seq", 0, {0, life}},
                         {"node.seq", "seq", 0, {life, life}},
                         {"seq.m", "seq", 0, {2 * life, v}}};
        def.message_kinds = {"diffuse", "ack"};
        def.roles.assign(n, 1);
        def.roles[0] = 0;
        def.role_layouts = {Layout{{{"seq", 0}}, {{"cur", current}}, {{"active", 2}, {"timer", patience + 1}, {"waiting", bit(n)}}},
                            Layout{{}, {{"seq", node_seq}}, {{"parent", n + 1}, {"waiting", bit(n)}}}};
        for (ProcessId p = 0; p < n; ++p)
        {
            def.initial_vars.push_back(p == 0 ? std::vector<std::int64_t>{0, 0, 0} : std::vector<std::int64_t>{n, 0});
        }

        std::vector<std::int64_t> mask(n, 0);
        for (ProcessId p = 0; p < n; ++p)
        {
            for (ProcessId k : def.topology.neighbors[p])
            {
                mask[p] |= bit(k);
            }
        }
        auto ack = [](StepContext& ctx, ProcessId to, const LiftedCell& seq) {
            ctx.send(to, ack_msg, {}, {ctx.stamp_copy(stamp_seq, seq)});
        };

        // Initiator.
        def.actions.push_back(ActionSpec{
            "start", Trigger::Tick, -1, 0, true, 0,
            [](const GuardView& g) { return g.var(active) == 0 || g.var(timer) == 0; },
            [mask, patience](StepContext& ctx) {
                ctx.fc(0) += ctx.d();
                ctx.set_dep_from_free(0, 0);
                ctx.var(active) = 1;
                ctx.var(timer) = patience;
                ctx.var(i_waiting) = mask[0];
                ctx.emit("start", {ctx.fc(0)});
                if (mask[0] == 0)
                {
                    ctx.var(active) = 0;
                    ctx.emit("complete", {ctx.fc(0)});
                    return;
                }
                for (ProcessId k : ctx.topology().neighbors[0])
                {
                    ctx.send(k, diffuse_msg, {}, {ctx.stamp_free(stamp_seq, 0)});
                }
            }});
        def.actions.push_back(ActionSpec{
            "countdown", Trigger::Tick, -1, 0, false, 0,
            [](const GuardView& g) { return g.var(active) == 1 && g.var(timer) > 0; },
            [](StepContext& ctx) { ctx.var(timer) -= 1; }});
        def.actions.push_back(ActionSpec{
            "echo", Trigger::Receive, diffuse_msg, 0, false, 0, nullptr,
            [ack](StepContext& ctx) { ack(ctx, ctx.msg().from, ctx.msg().stamps[0]); }});
        def.actions.push_back(ActionSpec{
            "collect", Trigger::Receive, ack_msg, 0, false, 0, nullptr, [](StepContext& ctx) {
                if (ctx.var(active) == 1 && eq(ctx.stamp(0), ctx.dc(0)))
                {
                    ctx.var(i_waiting) &= ~bit(ctx.msg().from);
                    if (ctx.var(i_waiting) == 0)
                    {
                        ctx.var(active) = 0;
                        ctx.emit("complete", {*ctx.dc(0)});
                    }
                }
            }});

        // Everyone else.
        def.actions.push_back(ActionSpec{
            "diffuse", Trigger::Receive, diffuse_msg, 1, false, 0, nullptr, [mask, ack](StepContext& ctx) {
                const ProcessId k = ctx.msg().from;
                const std::optional<Value> s = ctx.stamp(0);
                const std::optional<Value> mine = ctx.dc(0);
                if (!s)
                {
                    return;
                }
                if (mine && !lt(mine, s))
                {
                    ack(ctx, k, ctx.msg().stamps[0]);
                    return;
                }
                ctx.set_dep_copy(0, ctx.msg().stamps[0]);
                if (!ctx.dc(0))
                {
                    return;
                }
                ctx.var(parent) = k;
                ctx.var(n_waiting) = mask[ctx.self()] & ~bit(k);
                if (ctx.var(n_waiting) == 0)
                {
                    ack(ctx, k, ctx.dep_cell(0));
                    return;
                }
                for (ProcessId q : ctx.topology().neighbors[ctx.self()])
                {
                    if (q != k)
                    {
                        ctx.send(q, diffuse_msg, {}, {ctx.stamp_copy(stamp_seq, ctx.dep_cell(0))});
                    }
                }
            }});
        def.actions.push_back(ActionSpec{
            "ack", Trigger::Receive, ack_msg, 1, false, 0, nullptr, [n, ack](StepContext& ctx) {
                const ProcessId k = ctx.msg().from;
                if (!eq(ctx.stamp(0), ctx.dc(0)) || (ctx.var(n_waiting) & bit(k)) == 0)
                {
                    return;
                }
                ctx.var(n_waiting) &= ~bit(k);
                const std::int64_t up = ctx.var(parent);
                if (ctx.var(n_waiting) == 0 && up >= 0 && up < n && ctx.topology().has_edge(ctx.self(), up))
                {
                    ack(ctx, static_cast<ProcessId>(up), ctx.dep_cell(0));
                }
            }});

        def.safety = [n](std::span<const TraceRecord> records) -> std::optional<std::string> {
            for (const TraceRecord& rec : records)
            {
                for (const Event& e : rec.events)
                {
                    if (e.name != "complete")
                    {
                        continue;
                    }
                    for (ProcessId p = 0; p < n; ++p)
                    {
                        const std::optional<Value> seq = recorded(rec, p, p == 0 ? 1 : 0);
                        if (!eq(seq, e.args[0]))
                        {
                            return "step " + std::to_string(rec.step) + ": diffusion completed but process " +
                                   std::to_string(p) + " has not matched it";
                        }
                    }
                }
            }
            return std::nullopt;
        };
        return def;
    }
} // namespace boundstab::proto
