#pragma once

#include "boundstab/protocols.hpp"
#include "boundstab/trace.hpp"

#include <bit>
#include <map>
#include <set>
#include <string>

namespace boundstab::proto
{
    /// Reads protocol parameters, rejecting names the protocol does not use.
    class ParamReader
    {
    public:
        ParamReader(std::string protocol, const std::map<std::string, std::int64_t>& given)
            : protocol_(std::move(protocol)), given_(given)
        {
        }

        std::int64_t get(const std::string& name, std::int64_t fallback, std::int64_t min = 0)
        {
            known_.insert(name);
            const auto it = given_.find(name);
            const std::int64_t v = it == given_.end() ? fallback : it->second;
            if (v < min)
            {
                throw ConfigError(protocol_ + ": parameter " + name + " must be >= " + std::to_string(min));
            }
            return v;
        }

        void finish() const
        {
            for (const auto& [name, v] : given_)
            {
                if (!known_.contains(name))
                {
                    throw ConfigError(protocol_ + ": unknown parameter '" + name + "'");
                }
            }
        }

    private:
        std::string protocol_;
        const std::map<std::string, std::int64_t>& given_;
        std::set<std::string> known_;
    };

    inline std::int64_t bit(int i) { return std::int64_t{1} << i; }
    inline int popcount(std::int64_t v) { return std::popcount(static_cast<std::uint64_t>(v)); }

    inline int find_var(const Layout& l, const std::string& name)
    {
        for (std::size_t i = 0; i < l.vars.size(); ++i)
        {
            if (l.vars[i].name == name)
            {
                return static_cast<int>(i);
            }
        }
        throw ConfigError("no variable " + name);
    }

    inline bool has_event(const TraceRecord& rec, const std::string& name)
    {
        for (const Event& e : rec.events)
        {
            if (e.name == name)
            {
                return true;
            }
        }
        return false;
    }

    ProtocolDef logical_clocks(const Scenario& sc, Topology topo);
    ProtocolDef vector_clocks(const Scenario& sc, Topology topo);
    ProtocolDef mutual_exclusion(const Scenario& sc, Topology topo);
    ProtocolDef diffusing_computation(const Scenario& sc, Topology topo);
    ProtocolDef katz_perry(const Scenario& sc, Topology topo);
    ProtocolDef paxos_single_decree(const Scenario& sc, Topology topo);
} // namespace boundstab::proto
