#include "common.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace boundstab
{
    namespace
    {
        using Builder = std::function<ProtocolDef(const Scenario&, Topology)>;

        const std::map<std::string, Builder>& registry()
        {
            static const std::map<std::string, Builder> r{
                {"logical_clocks", proto::logical_clocks},
                {"vector_clocks", proto::vector_clocks},
                {"mutual_exclusion", proto::mutual_exclusion},
                {"diffusing_computation", proto::diffusing_computation},
                {"katz_perry", proto::katz_perry},
                {"paxos_single_decree", proto::paxos_single_decree},
            };
            return r;
        }

        Topology make_topology(const TopologySpec& t)
        {
            if (t.n < 1)
            {
                throw ConfigError("topology needs n >= 1");
            }
            if (t.kind == "complete")
            {
                return Topology::complete(t.n);
            }
            if (t.kind == "line")
            {
                return Topology::line(t.n);
            }
            if (t.kind == "ring")
            {
                return Topology::ring(t.n);
            }
            if (t.kind == "edges")
            {
                return Topology::from_edges(t.n, t.edges);
            }
            throw ConfigError("unknown topology kind '" + t.kind + "'");
        }
    } // namespace

    std::vector<std::string> protocol_names()
    {
        std::vector<std::string> out;
        for (const auto& [name, b] : registry())
        {
            out.push_back(name);
        }
        return out;
    }

    ProtocolDef make_protocol(const Scenario& scenario)
    {
        const auto it = registry().find(scenario.protocol);
        if (it == registry().end())
        {
            throw ConfigError("unknown protocol '" + scenario.protocol + "'");
        }
        ProtocolDef def = it->second(scenario, make_topology(scenario.topology));

        for (const FamilySetting& s : scenario.families)
        {
            const bool declared = std::any_of(def.families.begin(), def.families.end(),
                                              [&](const FamilyDecl& f) { return f.name == s.name; });
            if (!declared)
            {
                throw ConfigError(def.name + " has no counter family '" + s.name + "'");
            }
        }
        for (FamilyDecl& f : def.families)
        {
            const auto s = std::find_if(scenario.families.begin(), scenario.families.end(),
                                        [&](const FamilySetting& x) { return x.name == f.name; });
            if (s == scenario.families.end())
            {
                throw ConfigError("family '" + f.name + "': missing maxinc");
            }
            f.params.maxinc = s->maxinc;
            f.params.max_r = 0;
        }
        for (const DepSetting& d : scenario.deps)
        {
            const auto k = std::find_if(def.dep_kinds.begin(), def.dep_kinds.end(),
                                        [&](const DepKind& x) { return x.name == d.name; });
            if (k == def.dep_kinds.end())
            {
                throw ConfigError(def.name + " has no dependent counter kind '" + d.name + "'");
            }
            k->spec = DepSpec{d.r_b, d.r_f};
        }
        return def;
    }

    Program build_program(const Scenario& scenario)
    {
        return wrap_program(make_protocol(scenario));
    }

    RoundAction round_rule(std::optional<Value> x, std::optional<Value> y)
    {
        if (!y)
        {
            return RoundAction::Ignore;
        }
        if (!x || *x < *y)
        {
            return RoundAction::Adopt;
        }
        return *x == *y ? RoundAction::Normal : RoundAction::Ignore;
    }

    std::vector<std::optional<Value>> vc_merge(const std::vector<std::optional<Value>>& a,
                                               const std::vector<std::optional<Value>>& b)
    {
        std::vector<std::optional<Value>> out(std::max(a.size(), b.size()));
        for (std::size_t i = 0; i < out.size(); ++i)
        {
            const std::optional<Value> x = i < a.size() ? a[i] : std::nullopt;
            const std::optional<Value> y = i < b.size() ? b[i] : std::nullopt;
            if (x && y)
            {
                out[i] = std::max(*x, *y);
            }
            else
            {
                out[i] = x ? x : y;
            }
        }
        return out;
    }

    bool ordered_before(std::optional<Value> ts_a, int id_a, std::optional<Value> ts_b, int id_b)
    {
        if (!ts_a || !ts_b)
        {
            return false;
        }
        return *ts_a < *ts_b || (*ts_a == *ts_b && id_a < id_b);
    }

    std::optional<Value> recorded(const TraceRecord& rec, ProcessId p, int index)
    {
        return rec.processes.at(p).counters.at(index).lifted;
    }
} // namespace boundstab
