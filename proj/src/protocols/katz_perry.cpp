#include "common.hpp"

namespace boundstab::proto
{
    namespace
    {
        enum Var
        {
            color,
            reset_flag,
            timer,
        };
        enum Msg
        {
            reset_msg,
            app_msg,
        };
        enum Kind
        {
            round_kind,
            last_reset_kind,
            stamp_kind,
        };
        // Dependent slots, same at every process.
        constexpr int cr = 0;
        constexpr int lr = 1;
    } // namespace

    // Snapshot-and-reset superposed on a colour-gossip application. Process 0
    // periodically checks whether all colours agree and broadcasts a new
    // round; a round with the reset flag set returns every colour to 0.
    ProtocolDef katz_perry(const Scenario& sc, Topology topo)
    {
        const std::int64_t v = sc.channel_lifetime;
        ParamReader params("katz_perry", sc.params);
        const std::int64_t colors = params.get("colors", 4, 2);
        const std::int64_t period = params.get("period", 1, 1);
        const std::int64_t paint = params.get("paint_percent", 10);
        const std::int64_t life = params.get("lifetime", 2 * v + 2 * period + 4, 1);
        params.finish();

        const int n = topo.size();
        for (ProcessId k = 1; k < n; ++k)
        {
            if (!topo.has_edge(0, k))
            {
                throw ConfigError("katz_perry: process 0 must neighbour every process");
            }
        }
        const std::int64_t lookback = 2 * v + life;

        ProtocolDef def;
        def.name = "katz_perry";
        def.topology = std::move(topo);
        def.families = {{"round", {}}};
        def.dep_kinds = {{"cr", "round", 0, {lookback, life}},
                         {"lr", "round", 0, {lookback, life}},
                         {"round.m", "round", 0, {lookback, v}}};
        def.message_kinds = {"reset", "app"};
        def.roles.assign(n, 1);
        def.roles[0] = 0;
        const std::vector<DepSlot> deps{{"cr", round_kind}, {"lr", last_reset_kind}};
        def.role_layouts = {Layout{{{"nr", 0}}, deps, {{"color", colors}, {"b", 2}, {"timer", period}}},
                            Layout{{}, deps, {{"color", colors}, {"b", 2}}}};

        def.actions.push_back(ActionSpec{
            "snapshot", Trigger::Tick, -1, 0, true, 0, [](const GuardView& g) { return g.var(timer) == 0; },
            [n, period](StepContext& ctx) {
                bool legit = true;
                for (ProcessId k = 1; k < n; ++k)
                {
                    legit = legit && ctx.peer_vars(k)[color] == ctx.var(color);
                }
                ctx.var(reset_flag) = legit ? 0 : 1;
                ctx.fc(0) += ctx.d();
                ctx.set_dep_from_free(cr, 0);
                if (!legit)
                {
                    ctx.set_dep_from_free(lr, 0);
                    ctx.var(color) = 0;
                }
                ctx.emit("snapshot", {ctx.fc(0), ctx.var(reset_flag)});
                for (ProcessId k : ctx.topology().neighbors[0])
                {
                    ctx.send(k, reset_msg, {ctx.var(reset_flag), ctx.var(color)}, {ctx.stamp_free(stamp_kind, 0)});
                }
                ctx.var(timer) = period - 1;
            }});
        def.actions.push_back(ActionSpec{
            "countdown", Trigger::Tick, -1, 0, false, 0, [](const GuardView& g) { return g.var(timer) > 0; },
            [](StepContext& ctx) { ctx.var(timer) -= 1; }});

        def.actions.push_back(ActionSpec{
            "gossip", Trigger::Spontaneous, -1, -1, false, 0, nullptr, [colors, paint](StepContext& ctx) {
                if (ctx.draw(0, 99) < paint)
                {
                    ctx.var(color) = std::min(colors - 1, ctx.var(color) + 1);
                }
                const auto& ns = ctx.topology().neighbors[ctx.self()];
                if (ns.empty())
                {
                    return;
                }
                const ProcessId to = ns[ctx.draw(0, static_cast<std::int64_t>(ns.size()) - 1)];
                ctx.send(to, app_msg, {ctx.var(color), ctx.var(reset_flag)}, {ctx.stamp_copy(stamp_kind, ctx.dep_cell(cr))});
            }});

        // Shared by both message kinds: fields are {color, reset flag} for
        // app messages and {reset flag, color} for resets.
        auto adopt = [](StepContext& ctx, bool reset, std::int64_t c) {
            ctx.set_dep_copy(cr, ctx.msg().stamps[0]);
            ctx.var(reset_flag) = reset ? 1 : 0;
            if (reset)
            {
                ctx.set_dep_copy(lr, ctx.msg().stamps[0]);
                ctx.var(color) = c;
            }
        };
        def.actions.push_back(ActionSpec{
            "on_reset", Trigger::Receive, reset_msg, -1, false, 0, nullptr, [adopt](StepContext& ctx) {
                if (round_rule(ctx.dc(cr), ctx.stamp(0)) == RoundAction::Adopt)
                {
                    adopt(ctx, ctx.msg().fields[0] != 0, ctx.msg().fields[1]);
                }
            }});
        def.actions.push_back(ActionSpec{
            "on_app", Trigger::Receive, app_msg, -1, false, 0, nullptr, [adopt, colors](StepContext& ctx) {
                const std::int64_t c = std::clamp<std::int64_t>(ctx.msg().fields[0], 0, colors - 1);
                switch (round_rule(ctx.dc(cr), ctx.stamp(0)))
                {
                case RoundAction::Adopt:
                    adopt(ctx, ctx.msg().fields[1] != 0, c);
                    ctx.var(color) = std::max(ctx.var(color), c);
                    break;
                case RoundAction::Normal:
                    ctx.var(color) = std::max(ctx.var(color), c);
                    break;
                case RoundAction::Ignore:
                    // Older than the current round but not older than the last reset.
                    if (le(ctx.dc(lr), ctx.stamp(0)))
                    {
                        ctx.var(color) = std::max(ctx.var(color), c);
                    }
                    break;
                }
            }});

        def.safety = [n](std::span<const TraceRecord> records) -> std::optional<std::string> {
            for (const TraceRecord& rec : records)
            {
                const std::optional<Value> nr = recorded(rec, 0, 0);
                for (ProcessId p = 0; p < n; ++p)
                {
                    const int at = p == 0 ? 1 + cr : cr;
                    if (rec.processes[p].counters[at].residue && !le(recorded(rec, p, at), nr))
                    {
                        return "step " + std::to_string(rec.step) + ": round of process " + std::to_string(p) +
                               " ahead of the initiator";
                    }
                }
            }
            return std::nullopt;
        };
        return def;
    }
} // namespace boundstab::proto
