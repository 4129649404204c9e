#include "boundstab/program.hpp"

#include <algorithm>
#include <deque>

namespace boundstab
{
    bool Topology::has_edge(ProcessId from, ProcessId to) const
    {
        const auto& ns = neighbors[from];
        return std::find(ns.begin(), ns.end(), to) != ns.end();
    }

    bool Topology::strongly_connected() const
    {
        const int n = size();
        if (n <= 1)
        {
            return true;
        }
        auto reaches_all = [&](bool reversed) {
            std::vector<bool> seen(n, false);
            std::deque<int> frontier{0};
            seen[0] = true;
            while (!frontier.empty())
            {
                const int u = frontier.front();
                frontier.pop_front();
                for (int v = 0; v < n; ++v)
                {
                    const bool edge = reversed ? has_edge(v, u) : has_edge(u, v);
                    if (edge && !seen[v])
                    {
                        seen[v] = true;
                        frontier.push_back(v);
                    }
                }
            }
            return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
        };
        return reaches_all(false) && reaches_all(true);
    }

    Topology Topology::complete(int n)
    {
        Topology t;
        t.neighbors.resize(n);
        for (int j = 0; j < n; ++j)
        {
            for (int k = 0; k < n; ++k)
            {
                if (j != k)
                {
                    t.neighbors[j].push_back(k);
                }
            }
        }
        return t;
    }

    Topology Topology::line(int n)
    {
        std::vector<std::pair<int, int>> edges;
        for (int j = 0; j + 1 < n; ++j)
        {
            edges.emplace_back(j, j + 1);
        }
        return from_edges(n, edges);
    }

    Topology Topology::ring(int n)
    {
        std::vector<std::pair<int, int>> edges;
        for (int j = 0; j < n && n > 1; ++j)
        {
            if (n == 2 && j == 1)
            {
                break;
            }
            edges.emplace_back(j, (j + 1) % n);
        }
        return from_edges(n, edges);
    }

    Topology Topology::from_edges(int n, const std::vector<std::pair<int, int>>& edges)
    {
        Topology t;
        t.neighbors.resize(n);
        for (auto [a, b] : edges)
        {
            if (a < 0 || b < 0 || a >= n || b >= n || a == b)
            {
                throw ConfigError("bad topology edge " + std::to_string(a) + "-" + std::to_string(b));
            }
            if (!t.has_edge(a, b))
            {
                t.neighbors[a].push_back(b);
                t.neighbors[b].push_back(a);
            }
        }
        for (auto& ns : t.neighbors)
        {
            std::sort(ns.begin(), ns.end());
        }
        return t;
    }

    LiftedCell StepContext::make_cell(int kind, Value v, Region origin) const
    {
        if (global_region_ - origin > kinds_[kind].spec.r_b)
        {
            return std::nullopt;
        }
        return DepCell<Value>{v, kind, global_region_, origin};
    }

    void StepContext::set_dep_from_free(int dep_slot, int free_slot)
    {
        set_dep_value(dep_slot, mut_->free[free_slot], global_region_);
    }

    void StepContext::set_dep_value(int dep_slot, Value v, Region origin)
    {
        mut_->dep[dep_slot] = make_cell(layout_->dep[dep_slot].kind, v, origin);
    }

    void StepContext::set_dep_copy(int dep_slot, const LiftedCell& src)
    {
        if (!src)
        {
            mut_->dep[dep_slot].reset();
            return;
        }
        set_dep_value(dep_slot, src->value, src->origin);
    }

    LiftedCell StepContext::stamp_free(int kind, int free_slot) const
    {
        return make_cell(kind, mut_->free[free_slot], global_region_);
    }

    LiftedCell StepContext::stamp_copy(int kind, const LiftedCell& src) const
    {
        if (!src)
        {
            return std::nullopt;
        }
        return make_cell(kind, src->value, src->origin);
    }

    void StepContext::send(ProcessId to, int kind, std::vector<std::int64_t> fields, std::vector<LiftedCell> stamps)
    {
        LiftedMessage m;
        m.from = self_;
        m.to = to;
        m.kind = kind;
        m.sent = global_region_;
        m.fields = std::move(fields);
        m.stamps = std::move(stamps);
        outbox_.push_back(std::move(m));
    }

    void StepContext::emit(std::string name, std::vector<std::int64_t> args)
    {
        events_.push_back(Event{std::move(name), std::move(args)});
    }

    std::int64_t StepContext::draw(std::int64_t lo, std::int64_t hi)
    {
        std::uniform_int_distribution<std::int64_t> dist(lo, hi);
        return dist(*rng_);
    }
} // namespace boundstab
