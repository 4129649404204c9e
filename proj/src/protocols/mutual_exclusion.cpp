#include "common.hpp"

namespace boundstab::proto
{
    namespace
    {
        enum Var
        {
            requesting,
            in_cs,
            hold,
            replies,
            nonce,
        };
        enum Msg
        {
            request_msg,
            reply_msg,
            release_msg,
        };
        enum Kind
        {
            request_ts,
            reply_ts,
            queued,
            own_request,
        };
        constexpr std::int64_t nonce_domain = 1024;
    } // namespace

    // Lamport's queue-based mutual exclusion over FIFO channels. Dependent
    // slots 0..n-1 hold queued requests (slot j unused at process j); slot n
    // is the process's own request.
    ProtocolDef mutual_exclusion(const Scenario& sc, Topology topo)
    {
        const std::int64_t v = sc.channel_lifetime;
        const int n = topo.size();
        ParamReader params("mutual_exclusion", sc.params);
        const std::int64_t hold_steps = params.get("hold", 3);
        const std::int64_t queue_life = params.get("queue_lifetime", 4 * v + 2 * n + 4, 1);
        params.finish();

        for (int j = 0; j < n; ++j)
        {
            for (int k = 0; k < n; ++k)
            {
                if (j != k && !topo.has_edge(j, k))
                {
                    throw ConfigError("mutual_exclusion: topology must be complete");
                }
            }
        }
        if (sc.loss_probability != 0.0)
        {
            throw ConfigError("mutual_exclusion: channels must not lose messages");
        }

        ProtocolDef def;
        def.name = "mutual_exclusion";
        def.topology = std::move(topo);
        def.families = {{"cl", {}}};
        def.dep_kinds = {{"request.ts", "cl", 0, {0, v}},
                         {"reply.ts", "cl", 0, {0, v}},
                         {"queue", "cl", 0, {v, queue_life + 1}},
                         {"own", "cl", 0, {0, queue_life}}};
        def.message_kinds = {"request", "reply", "release"};
        def.roles.assign(n, 0);
        Layout l;
        l.free = {{"cl", 0}};
        for (int k = 0; k < n; ++k)
        {
            l.dep.push_back({"queue." + std::to_string(k), queued});
        }
        l.dep.push_back({"own", own_request});
        l.vars = {{"requesting", 2}, {"in_cs", 2}, {"hold", hold_steps + 1}, {"replies", bit(n)}, {"nonce", nonce_domain}};
        def.role_layouts = {l};

        const int own = n;
        auto others = [n](ProcessId j) { return (bit(n) - 1) & ~bit(j); };
        auto leave = [n, own](StepContext& ctx) {
            ctx.var(in_cs) = 0;
            ctx.var(requesting) = 0;
            ctx.var(hold) = 0;
            ctx.var(replies) = 0;
            ctx.clear_dep(own);
            for (int k = 0; k < n; ++k)
            {
                if (k != ctx.self())
                {
                    ctx.send(k, release_msg, {}, {});
                }
            }
        };
        auto broken = [own](const GuardView& g) {
            return (g.var(requesting) == 1 && !g.dc(own)) || (g.var(in_cs) == 1 && g.var(requesting) == 0);
        };
        auto sanity = [broken, leave](StepContext& ctx) {
            if (broken(ctx))
            {
                leave(ctx);
            }
        };
        auto stale = [](const GuardView& g, int k) {
            return k != g.self() && g.dc(k) && g.peer_vars(k)[requesting] == 0;
        };

        def.actions.push_back(ActionSpec{"abort", Trigger::Spontaneous, -1, -1, false, 0, broken, leave});
        def.actions.push_back(ActionSpec{
            "prune", Trigger::Spontaneous, -1, -1, false, 0,
            [n, stale](const GuardView& g) {
                for (int k = 0; k < n; ++k)
                {
                    if (stale(g, k))
                    {
                        return true;
                    }
                }
                return false;
            },
            [n, stale](StepContext& ctx) {
                for (int k = 0; k < n; ++k)
                {
                    if (stale(ctx, k))
                    {
                        ctx.clear_dep(k);
                    }
                }
            }});
        def.actions.push_back(ActionSpec{
            "enter", Trigger::Spontaneous, -1, -1, false, 0,
            [n, own, others](const GuardView& g) {
                if (g.var(requesting) != 1 || g.var(in_cs) != 0 || g.var(replies) != others(g.self()) || !g.dc(own))
                {
                    return false;
                }
                for (int k = 0; k < n; ++k)
                {
                    if (k != g.self() && g.dc(k) && !ordered_before(g.dc(own), g.self(), g.dc(k), k))
                    {
                        return false;
                    }
                }
                return true;
            },
            [hold_steps](StepContext& ctx) {
                ctx.var(in_cs) = 1;
                ctx.var(hold) = hold_steps;
                ctx.emit("enter", {ctx.self()});
            }});
        def.actions.push_back(ActionSpec{
            "work", Trigger::Spontaneous, -1, -1, false, 0,
            [](const GuardView& g) { return g.var(in_cs) == 1 && g.var(hold) > 0; },
            [](StepContext& ctx) { ctx.var(hold) -= 1; }});
        def.actions.push_back(ActionSpec{
            "release", Trigger::Spontaneous, -1, -1, false, 0,
            [](const GuardView& g) { return g.var(in_cs) == 1 && g.var(hold) == 0; },
            [leave](StepContext& ctx) {
                ctx.emit("exit", {ctx.self()});
                leave(ctx);
            }});
        def.actions.push_back(ActionSpec{
            "request", Trigger::Spontaneous, -1, -1, true, 0,
            [](const GuardView& g) { return g.var(requesting) == 0 && g.var(in_cs) == 0; },
            [n, own](StepContext& ctx) {
                ctx.fc(0) += ctx.d();
                ctx.set_dep_from_free(own, 0);
                ctx.var(requesting) = 1;
                ctx.var(replies) = 0;
                ctx.var(nonce) = (ctx.var(nonce) + 1) % nonce_domain;
                for (int k = 0; k < n; ++k)
                {
                    if (k != ctx.self())
                    {
                        ctx.send(k, request_msg, {ctx.var(nonce)}, {ctx.stamp_free(request_ts, 0)});
                    }
                }
            }});
        def.actions.push_back(ActionSpec{
            "on_request", Trigger::Receive, request_msg, -1, false, 0, nullptr, [sanity](StepContext& ctx) {
                sanity(ctx);
                const ProcessId k = ctx.msg().from;
                if (const std::optional<Value> ts = ctx.stamp(0))
                {
                    ctx.fc(0) = std::max(ctx.fc(0), *ts);
                    ctx.set_dep_copy(k, ctx.msg().stamps[0]);
                }
                ctx.send(k, reply_msg, {ctx.msg().fields[0]}, {ctx.stamp_free(reply_ts, 0)});
            }});
        def.actions.push_back(ActionSpec{
            "on_reply", Trigger::Receive, reply_msg, -1, false, 0, nullptr, [sanity](StepContext& ctx) {
                sanity(ctx);
                if (const std::optional<Value> ts = ctx.stamp(0))
                {
                    ctx.fc(0) = std::max(ctx.fc(0), *ts);
                }
                if (ctx.var(requesting) == 1 && ctx.msg().fields[0] == ctx.var(nonce))
                {
                    ctx.var(replies) |= bit(ctx.msg().from);
                }
            }});
        def.actions.push_back(ActionSpec{
            "on_release", Trigger::Receive, release_msg, -1, false, 0, nullptr, [sanity](StepContext& ctx) {
                sanity(ctx);
                ctx.clear_dep(ctx.msg().from);
            }});

        const int in_cs_var = in_cs;
        def.safety = [n, in_cs_var](std::span<const TraceRecord> records) -> std::optional<std::string> {
            for (const TraceRecord& rec : records)
            {
                int inside = 0;
                for (int j = 0; j < n; ++j)
                {
                    inside += rec.processes[j].vars[in_cs_var] == 1 ? 1 : 0;
                }
                if (inside > 1)
                {
                    return "step " + std::to_string(rec.step) + ": " + std::to_string(inside) +
                           " processes in the critical section";
                }
            }
            return std::nullopt;
        };
        return def;
    }
} // namespace boundstab::proto
