#include "common.hpp"

namespace boundstab::proto
{
    // Lamport clocks. One free counter per process; a message carries a
    // stamp of the sender's clock.
    ProtocolDef logical_clocks(const Scenario& sc, Topology topo)
    {
        ParamReader params("logical_clocks", sc.params);
        const std::int64_t send_percent = params.get("send_percent", 50);
        params.finish();

        const std::int64_t v = sc.channel_lifetime;
        ProtocolDef def;
        def.name = "logical_clocks";
        def.topology = std::move(topo);
        def.families = {{"cl", {}}};
        def.dep_kinds = {{"cl.m", "cl", 0, {0, v}}};
        def.message_kinds = {"clock"};
        def.roles.assign(def.process_count(), 0);
        def.role_layouts = {Layout{{{"cl", 0}}, {}, {}}};

        def.actions.push_back(ActionSpec{
            "local", Trigger::Spontaneous, -1, -1, true, 0, nullptr, [send_percent](StepContext& ctx) {
                ctx.fc(0) += ctx.d();
                const auto& ns = ctx.topology().neighbors[ctx.self()];
                if (!ns.empty() && ctx.draw(0, 99) < send_percent)
                {
                    const ProcessId to = ns[ctx.draw(0, static_cast<std::int64_t>(ns.size()) - 1)];
                    ctx.send(to, 0, {}, {ctx.stamp_free(0, 0)});
                }
            }});
        def.actions.push_back(ActionSpec{
            "receive", Trigger::Receive, 0, -1, true, 0, nullptr, [](StepContext& ctx) {
                const std::optional<Value> ts = ctx.stamp(0);
                ctx.fc(0) = std::max(ctx.fc(0), ts.value_or(ctx.fc(0))) + ctx.d();
                if (ts)
                {
                    ctx.emit("deliver", {*ts, ctx.fc(0)});
                }
            }});

        def.safety = [](std::span<const TraceRecord> records) -> std::optional<std::string> {
            for (const TraceRecord& rec : records)
            {
                for (const Event& e : rec.events)
                {
                    if (e.name == "deliver" && e.args[1] <= e.args[0])
                    {
                        return "step " + std::to_string(rec.step) + ": receive clock not after send stamp";
                    }
                }
                for (const MessageSnap& m : rec.messages)
                {
                    const std::optional<Value> sender = recorded(rec, m.from, 0);
                    if (m.stamps[0].lifted && !le(m.stamps[0].lifted, sender))
                    {
                        return "step " + std::to_string(rec.step) + ": in-flight stamp ahead of sender clock";
                    }
                }
            }
            return std::nullopt;
        };
        return def;
    }
} // namespace boundstab::proto
