#include "common.hpp"

namespace boundstab::proto
{
    // Process j owns vc.j.j as a free counter and keeps vc.j.k (k != j) as
    // dependent copies. Messages carry the whole vector.
    ProtocolDef vector_clocks(const Scenario& sc, Topology topo)
    {
        const std::int64_t v = sc.channel_lifetime;
        ParamReader params("vector_clocks", sc.params);
        const std::int64_t lookback = params.get("lookback", 2 * v + 2);
        const std::int64_t lifetime = params.get("lifetime", 2 * v + 2);
        params.finish();

        if (!topo.strongly_connected())
        {
            throw ConfigError("vector_clocks: topology must be strongly connected");
        }
        const int n = topo.size();

        ProtocolDef def;
        def.name = "vector_clocks";
        def.topology = std::move(topo);
        def.families = {{"vc", {}}};
        def.dep_kinds = {{"vc.entry", "vc", 0, {lookback, lifetime}},
                         {"vc.m", "vc", 0, {lookback + lifetime, v}}};
        def.message_kinds = {"vector"};

        // Slot of entry k in process j's dependent vector.
        auto slot = [](ProcessId j, int k) { return k < j ? k : k - 1; };

        for (ProcessId j = 0; j < n; ++j)
        {
            Layout l;
            l.free.push_back({"vc." + std::to_string(j) + "." + std::to_string(j), 0});
            for (int k = 0; k < n; ++k)
            {
                if (k != j)
                {
                    l.dep.push_back({"vc." + std::to_string(j) + "." + std::to_string(k), 0});
                }
            }
            def.roles.push_back(j);
            def.role_layouts.push_back(std::move(l));
        }

        def.actions.push_back(ActionSpec{
            "send", Trigger::Spontaneous, -1, -1, true, 0, nullptr, [n, slot](StepContext& ctx) {
                const ProcessId j = ctx.self();
                ctx.fc(0) += ctx.d();
                const auto& ns = ctx.topology().neighbors[j];
                if (ns.empty())
                {
                    return;
                }
                std::vector<LiftedCell> stamps;
                for (int k = 0; k < n; ++k)
                {
                    stamps.push_back(k == j ? ctx.stamp_free(1, 0) : ctx.stamp_copy(1, ctx.dep_cell(slot(j, k))));
                }
                const ProcessId to = ns[ctx.draw(0, static_cast<std::int64_t>(ns.size()) - 1)];
                ctx.send(to, 0, {}, std::move(stamps));
            }});
        def.actions.push_back(ActionSpec{
            "receive", Trigger::Receive, 0, -1, true, 0, nullptr, [n, slot](StepContext& ctx) {
                const ProcessId j = ctx.self();
                for (int k = 0; k < n; ++k)
                {
                    if (k == j)
                    {
                        continue;
                    }
                    const std::optional<Value> m = ctx.stamp(k);
                    const std::optional<Value> mine = ctx.dc(slot(j, k));
                    if (m && (!mine || *m > *mine))
                    {
                        ctx.set_dep_copy(slot(j, k), ctx.msg().stamps[k]);
                    }
                }
                ctx.fc(0) = std::max(ctx.fc(0), ctx.stamp(j).value_or(ctx.fc(0))) + ctx.d();
            }});

        def.safety = [n](std::span<const TraceRecord> records) -> std::optional<std::string> {
            for (const TraceRecord& rec : records)
            {
                for (ProcessId j = 0; j < n; ++j)
                {
                    for (int k = 0; k < n; ++k)
                    {
                        if (k == j || !rec.processes[j].counters[1 + (k < j ? k : k - 1)].residue)
                        {
                            continue;
                        }
                        const std::optional<Value> copy = recorded(rec, j, 1 + (k < j ? k : k - 1));
                        if (!le(copy, recorded(rec, k, 0)))
                        {
                            return "step " + std::to_string(rec.step) + ": vc." + std::to_string(j) + "." +
                                   std::to_string(k) + " ahead of its owner";
                        }
                    }
                }
            }
            return std::nullopt;
        };
        return def;
    }
} // namespace boundstab::proto
