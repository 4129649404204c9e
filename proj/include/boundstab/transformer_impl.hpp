#pragma once

// Template bodies for transformer.hpp.

#include <string>
#include <utility>

namespace boundstab
{
    namespace detail
    {
        /// Throws InvariantViolation if a free counter decreased or grew past
        /// max(before, largest observed same-family value) + charged.
        void check_free_contract(const LiftedState& before, const LiftedState& after, const LiftedMessage* msg,
                                 std::int64_t charged, const StepInputs& in, const Program& program,
                                 const std::string& action);
    } // namespace detail

    template <class Rep>
    StatementResult execute_statement(ProcessState<typename Rep::Scalar>& proc, const StepInputs& in,
                                      const Program& program, std::span<const int> candidates,
                                      const LiftedMessage* lifted_msg, std::mt19937_64& rng)
    {
        StatementResult result;
        LiftedState lifted = Rep::lift(proc, in.self, in.local_region, program);

        std::vector<int> affordable;
        for (int a : candidates)
        {
            const ActionSpec& act = program.def.actions[a];
            if (act.spends && in.budget_left[act.family] < in.increment)
            {
                continue;
            }
            affordable.push_back(a);
        }
        const GuardView view(in.self, in.local_region, lifted, lifted_msg, program.def.topology, in.peer_vars);
        const std::optional<int> chosen = evaluate_guards(program.def.actions, affordable, view);
        if (!chosen)
        {
            return result;
        }

        const ActionSpec& act = program.def.actions[*chosen];
        const LiftedState before = lifted;
        StepContext ctx(in.self, in.local_region, in.global_region, lifted, lifted_msg, program.def.topology,
                        program.layout(in.self), program.def.dep_kinds, in.increment, rng, in.peer_vars);
        act.statement(ctx);
        detail::check_free_contract(before, lifted, lifted_msg, act.spends ? in.increment : 0, in, program,
                                    act.name);

        result.action = *chosen;
        result.spent = act.spends;
        result.outbox = std::move(ctx.outbox());
        result.events = std::move(ctx.events());
        proc = Rep::reduce(lifted, in.self, in.local_region, program);
        return result;
    }
} // namespace boundstab
