#include "boundstab/transformer.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace boundstab
{
    namespace
    {
        void require(bool ok, const std::string& what)
        {
            if (!ok)
            {
                throw ConfigError(what);
            }
        }
    } // namespace

    int Program::free_counter_count() const
    {
        std::set<std::string> names;
        for (const Layout& l : def.role_layouts)
        {
            for (const FreeSlot& s : l.free)
            {
                names.insert(s.name);
            }
        }
        return static_cast<int>(names.size());
    }

    int Program::dep_family_count() const
    {
        std::set<std::string> groups;
        for (const DepKind& k : def.dep_kinds)
        {
            groups.insert(k.group);
        }
        return static_cast<int>(groups.size());
    }

    std::int64_t Program::largest_max_r() const
    {
        std::int64_t r = 0;
        for (const FamilyDecl& f : def.families)
        {
            r = std::max(r, f.params.max_r);
        }
        return r;
    }

    Program wrap_program(ProtocolDef def)
    {
        const int n = def.topology.size();
        const int families = static_cast<int>(def.families.size());
        const int kinds = static_cast<int>(def.dep_kinds.size());
        const int layouts = static_cast<int>(def.role_layouts.size());

        require(n >= 1, def.name + ": topology has no processes");
        require(families >= 1, def.name + ": no counter families declared");
        for (const DepKind& k : def.dep_kinds)
        {
            require(k.family >= 0 && k.family < families, "dependent kind " + k.name + " uses undeclared family");
            CounterParams& p = def.families[k.family].params;
            p.max_r = std::max(p.max_r, k.spec.r_b + k.spec.r_f);
        }
        for (const FamilyDecl& f : def.families)
        {
            f.params.validate();
        }
        for (const DepKind& k : def.dep_kinds)
        {
            k.spec.validate_against(def.families[k.family].params);
        }

        require(static_cast<int>(def.roles.size()) == n, def.name + ": one role per process required");
        for (int role : def.roles)
        {
            require(role >= 0 && role < layouts, def.name + ": undeclared role " + std::to_string(role));
        }
        for (const Layout& l : def.role_layouts)
        {
            for (const FreeSlot& s : l.free)
            {
                require(s.family >= 0 && s.family < families, "free counter " + s.name + " uses undeclared family");
            }
            for (const DepSlot& s : l.dep)
            {
                require(s.kind >= 0 && s.kind < kinds, "dependent counter " + s.name + " uses undeclared kind");
            }
        }

        if (def.initial_vars.empty())
        {
            for (ProcessId p = 0; p < n; ++p)
            {
                def.initial_vars.emplace_back(def.layout_of(p).vars.size(), 0);
            }
        }
        require(static_cast<int>(def.initial_vars.size()) == n, def.name + ": initial variables for every process");
        for (ProcessId p = 0; p < n; ++p)
        {
            require(def.initial_vars[p].size() == def.layout_of(p).vars.size(),
                    def.name + ": initial variables do not match layout of process " + std::to_string(p));
        }

        const int msg_kinds = static_cast<int>(def.message_kinds.size());
        for (const ActionSpec& a : def.actions)
        {
            require(a.family >= 0 && a.family < families, "action " + a.name + " uses undeclared family");
            require(a.role >= -1 && a.role < layouts, "action " + a.name + " uses undeclared role");
            require(a.trigger != Trigger::Receive || (a.message_kind >= 0 && a.message_kind < msg_kinds),
                    "action " + a.name + " receives undeclared message kind");
            require(static_cast<bool>(a.statement), "action " + a.name + " has no statement");
        }
        return Program{std::move(def)};
    }

    void on_region_change(BoundedState& proc, ProcessId self, Region new_r, const Program& program)
    {
        const Layout& layout = program.layout(self);
        for (std::size_t i = 0; i < proc.free.size(); ++i)
        {
            const CounterParams& p = program.family(layout.free[i].family);
            proc.free[i] = to_residue(checkfc(convertfc(proc.free[i], new_r, p), new_r, p), p);
        }
        for (Cell<Residue>& c : proc.dep)
        {
            if (c)
            {
                const CounterParams& p = program.kind_params(c->kind);
                c->value = to_residue(checkdc(convertdc(c->value, new_r, p), new_r, p), p);
            }
        }
    }

    void UnboundedRep::region_change(ProcessState<Value>& s, ProcessId self, Region r, const Program& prog)
    {
        const Layout& layout = prog.layout(self);
        for (std::size_t i = 0; i < s.free.size(); ++i)
        {
            s.free[i] = std::max(s.free[i], legit_free_bounds(r, prog.family(layout.free[i].family)).min);
        }
    }

    namespace
    {
        LiftedCell lift_cell(const Cell<Residue>& c, Region r, const Program& program)
        {
            if (!c)
            {
                return std::nullopt;
            }
            return DepCell<Value>{convertdc(c->value, r, program.kind_params(c->kind)), c->kind, c->created,
                                  c->origin};
        }

        Cell<Residue> reduce_cell(const LiftedCell& c, Region r, const Program& program)
        {
            if (!c)
            {
                return std::nullopt;
            }
            const CounterParams& p = program.kind_params(c->kind);
            return DepCell<Residue>{to_residue(checkdc(c->value, r, p), p), c->kind, c->created, c->origin};
        }
    } // namespace

    LiftedState lift_state(const BoundedState& proc, ProcessId self, Region r, const Program& program)
    {
        const Layout& layout = program.layout(self);
        LiftedState out;
        out.vars = proc.vars;
        for (std::size_t i = 0; i < proc.free.size(); ++i)
        {
            out.free.push_back(convertfc(proc.free[i], r, program.family(layout.free[i].family)));
        }
        for (const Cell<Residue>& c : proc.dep)
        {
            out.dep.push_back(lift_cell(c, r, program));
        }
        return out;
    }

    BoundedState reduce_state(const LiftedState& lifted, ProcessId self, Region r, const Program& program)
    {
        const Layout& layout = program.layout(self);
        BoundedState out;
        out.vars = lifted.vars;
        for (std::size_t i = 0; i < lifted.free.size(); ++i)
        {
            const CounterParams& p = program.family(layout.free[i].family);
            out.free.push_back(to_residue(checkfc(lifted.free[i], r, p), p));
        }
        for (const LiftedCell& c : lifted.dep)
        {
            out.dep.push_back(reduce_cell(c, r, program));
        }
        return out;
    }

    LiftedMessage lift_message(const BoundedMessage& msg, Region r, const Program& program)
    {
        LiftedMessage out{msg.id, msg.from, msg.to, msg.kind, msg.sent, msg.fields, {}};
        for (const Cell<Residue>& c : msg.stamps)
        {
            out.stamps.push_back(lift_cell(c, r, program));
        }
        return out;
    }

    BoundedMessage reduce_message(const LiftedMessage& msg, Region r, const Program& program)
    {
        BoundedMessage out{msg.id, msg.from, msg.to, msg.kind, msg.sent, msg.fields, {}};
        for (const LiftedCell& c : msg.stamps)
        {
            out.stamps.push_back(reduce_cell(c, r, program));
        }
        return out;
    }

    std::optional<int> evaluate_guards(std::span<const ActionSpec> actions, std::span<const int> candidates,
                                       const GuardView& view)
    {
        std::vector<int> order(candidates.begin(), candidates.end());
        std::sort(order.begin(), order.end());
        for (int a : order)
        {
            const ActionSpec& act = actions[a];
            if (!act.guard || act.guard(view))
            {
                return a;
            }
        }
        return std::nullopt;
    }

    namespace detail
    {
        void check_free_contract(const LiftedState& before, const LiftedState& after, const LiftedMessage* msg,
                                 std::int64_t charged, const StepInputs& in, const Program& program,
                                 const std::string& action)
        {
            const Layout& layout = program.layout(in.self);
            const int families = static_cast<int>(program.def.families.size());
            std::vector<std::optional<Value>> seen(families);
            auto observe = [&](int family, Value v) {
                seen[family] = seen[family] ? std::max(*seen[family], v) : v;
            };
            for (std::size_t i = 0; i < before.free.size(); ++i)
            {
                observe(layout.free[i].family, before.free[i]);
            }
            for (const LiftedCell& c : before.dep)
            {
                if (c)
                {
                    observe(program.def.dep_kinds[c->kind].family, c->value);
                }
            }
            if (msg)
            {
                for (const LiftedCell& c : msg->stamps)
                {
                    if (c)
                    {
                        observe(program.def.dep_kinds[c->kind].family, c->value);
                    }
                }
            }

            for (std::size_t i = 0; i < after.free.size(); ++i)
            {
                const Value was = before.free[i];
                const Value now = after.free[i];
                const std::string where = action + " at process " + std::to_string(in.self) + ", free counter " +
                                          layout.free[i].name;
                if (now < was)
                {
                    throw InvariantViolation(in.step, where + " decreased from " + std::to_string(was) + " to " +
                                                          std::to_string(now));
                }
                const Value cap = *seen[layout.free[i].family] + charged;
                if (now > cap)
                {
                    throw InvariantViolation(in.step, where + " grew to " + std::to_string(now) +
                                                          " beyond observed maximum plus charged increment " +
                                                          std::to_string(cap));
                }
            }
        }
    } // namespace detail
} // namespace boundstab
