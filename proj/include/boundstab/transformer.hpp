#pragma once

#include "boundstab/counters.hpp"
#include "boundstab/program.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace boundstab
{
    /// A protocol with validated counter declarations and final family
    /// parameters. Run with BoundedRep it is the bounded program; run with
    /// UnboundedRep it is the original program used as the oracle.
    struct Program
    {
        ProtocolDef def;

        const CounterParams& family(int f) const { return def.families[f].params; }
        const CounterParams& free_params(ProcessId p, int slot) const
        {
            return family(def.layout_of(p).free[slot].family);
        }
        const CounterParams& kind_params(int kind) const { return family(def.dep_kinds[kind].family); }
        const Layout& layout(ProcessId p) const { return def.layout_of(p); }

        /// Distinct free counter names across all layouts.
        int free_counter_count() const;
        /// Distinct dependent groups.
        int dep_family_count() const;
        std::int64_t largest_max_r() const;
    };

    /// Validates `def` and fixes each family's max_r to the largest r_b + r_f
    /// of its dependent kinds (or the declared value, if larger). Throws
    /// ConfigError on a slot or action referring to an undeclared family,
    /// dependent kind, or message kind.
    Program wrap_program(ProtocolDef def);

    /// Runs the region-change checks: every free cell becomes
    /// checkfc(convertfc(.)) and every present dependent cell
    /// checkdc(convertdc(.)), at the new region.
    void on_region_change(BoundedState& proc, ProcessId self, Region new_r, const Program& program);

    LiftedState lift_state(const BoundedState& proc, ProcessId self, Region r, const Program& program);
    /// Check-and-reduce of every counter at region r.
    BoundedState reduce_state(const LiftedState& lifted, ProcessId self, Region r, const Program& program);
    LiftedMessage lift_message(const BoundedMessage& msg, Region r, const Program& program);
    BoundedMessage reduce_message(const LiftedMessage& msg, Region r, const Program& program);

    /// Lowest-index candidate whose guard holds; empty means a self-loop.
    std::optional<int> evaluate_guards(std::span<const ActionSpec> actions, std::span<const int> candidates,
                                       const GuardView& view);

    /// Stored form of counters in the bounded program.
    struct BoundedRep
    {
        using Scalar = Residue;
        static constexpr bool bounded = true;

        static Scalar initial_free(Value v, const CounterParams& p) { return to_residue(v, p); }
        static LiftedState lift(const BoundedState& s, ProcessId self, Region r, const Program& prog)
        {
            return lift_state(s, self, r, prog);
        }
        static BoundedState reduce(const LiftedState& s, ProcessId self, Region r, const Program& prog)
        {
            return reduce_state(s, self, r, prog);
        }
        static LiftedMessage lift_msg(const BoundedMessage& m, Region r, const Program& prog)
        {
            return lift_message(m, r, prog);
        }
        static BoundedMessage reduce_msg(const LiftedMessage& m, Region r, const Program& prog)
        {
            return reduce_message(m, r, prog);
        }
        static void region_change(BoundedState& s, ProcessId self, Region r, const Program& prog)
        {
            on_region_change(s, self, r, prog);
        }
        static std::int64_t residue(Scalar s, const CounterParams&) { return static_cast<std::int64_t>(s.value); }
        /// Genuine lifts only: empty when the residue has no value in the window.
        static std::optional<Value> lift_free_snapshot(Scalar s, Region r, const CounterParams& p)
        {
            return lift_into(s, legit_free_bounds(r, p), p.maxbound());
        }
        static std::optional<Value> lift_dep_snapshot(Scalar s, Region r, const CounterParams& p)
        {
            return lift_into(s, legit_dep_bounds(r, p), p.maxbound());
        }
        static Scalar from_lifted(Value v, const CounterParams& p) { return to_residue(v, p); }
    };

    /// Unbounded integers: the original program. Its only region-change
    /// behaviour is raising each free counter to the window minimum, which
    /// is an ordinary free-counter increase.
    struct UnboundedRep
    {
        using Scalar = Value;
        static constexpr bool bounded = false;

        static Scalar initial_free(Value v, const CounterParams&) { return v; }
        static LiftedState lift(const ProcessState<Value>& s, ProcessId, Region, const Program&) { return s; }
        static ProcessState<Value> reduce(const LiftedState& s, ProcessId, Region, const Program&) { return s; }
        static LiftedMessage lift_msg(const LiftedMessage& m, Region, const Program&) { return m; }
        static LiftedMessage reduce_msg(const LiftedMessage& m, Region, const Program&) { return m; }
        static void region_change(ProcessState<Value>& s, ProcessId self, Region r, const Program& prog);
        static std::int64_t residue(Scalar s, const CounterParams& p) { return euclid_mod(s, p.maxbound()); }
        static std::optional<Value> lift_free_snapshot(Scalar s, Region, const CounterParams&) { return s; }
        static std::optional<Value> lift_dep_snapshot(Scalar s, Region, const CounterParams&) { return s; }
        static Scalar from_lifted(Value v, const CounterParams&) { return v; }
    };

    struct StatementResult
    {
        int action = -1;
        std::vector<Message<Value>> outbox;
        std::vector<Event> events;
        bool spent = false;
    };

    /// Everything a step needs besides the process state.
    struct StepInputs
    {
        ProcessId self = 0;
        Region local_region = 0;
        Region global_region = 0;
        std::uint64_t step = 0;
        std::int64_t increment = 1;
        /// Remaining increment budget per family for this global region.
        std::span<const std::int64_t> budget_left;
        std::function<const std::vector<std::int64_t>&(ProcessId)> peer_vars;
    };

    /// Lifts the process (and message), evaluates the candidate guards,
    /// runs the selected statement on lifted integers, asserts the free
    /// counter contract (no decrease; growth only up to an observed value plus
    /// the charged increment), then check-and-reduces every write. Outgoing
    /// messages are returned lifted; the caller stores them.
    template <class Rep>
    StatementResult execute_statement(ProcessState<typename Rep::Scalar>& proc, const StepInputs& in,
                                      const Program& program, std::span<const int> candidates,
                                      const LiftedMessage* lifted_msg, std::mt19937_64& rng);
} // namespace boundstab

#include "boundstab/transformer_impl.hpp"
