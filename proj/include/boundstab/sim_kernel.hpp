#pragma once

#include "boundstab/region_time.hpp"
#include "boundstab/scenario.hpp"
#include "boundstab/trace.hpp"
#include "boundstab/transformer.hpp"

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <utility>
#include <vector>

namespace boundstab
{
    struct KernelConfig
    {
        RegionParams regions;
        DriftPolicy drift;
        std::int64_t channel_lifetime = 1;
        double loss_probability = 0.0;
        int steps_per_time_unit = 1;
        std::uint64_t steps = 0;
        std::vector<FaultSpec> faults;

        /// Throws ConfigError for unusable settings, including families with
        /// maxinc < 2 (the per-region increment budget is maxinc - 1).
        void validate(const Program& program) const;
    };

    KernelConfig kernel_config(const Scenario& scenario);
    /// kernel_config with an automatic start region filled in.
    KernelConfig resolved_config(const Scenario& scenario, const Program& program);

    using Channel = std::pair<ProcessId, ProcessId>;

    /// Complete mutable state of a simulation, including its random streams.
    template <class S>
    struct SimState
    {
        ClockState clocks;
        std::vector<ProcessState<S>> processes;
        std::map<Channel, std::deque<Message<S>>> channels;
        std::mt19937_64 rng;
        std::mt19937_64 fault_rng;
        std::vector<ProcessId> order;
        std::size_t order_pos = 0;
        /// Increments left this global region, per family; and the smaller
        /// allowance for spontaneous and tick actions.
        std::vector<std::int64_t> budget;
        std::vector<std::int64_t> spontaneous_budget;
        std::uint64_t step = 0;
        std::uint64_t next_message_id = 0;
        std::uint64_t seed = 0;
    };

    /// The execution kernel. With BoundedRep counters are stored as residues
    /// and every action runs through lift, execute, check-and-reduce; with
    /// UnboundedRep the same schedule runs on plain integers.
    ///
    /// One step: advance clocks; expire dependent cells and drop messages
    /// past their lifetime; region-change handling and tick actions for every
    /// process whose region grew (in process order); scheduled faults; one
    /// process action chosen by a seeded shuffled round robin; record.
    template <class Rep>
    class Simulation
    {
    public:
        using Scalar = typename Rep::Scalar;
        using State = SimState<Scalar>;

        Simulation(const Program& program, KernelConfig config, std::uint64_t seed);
        Simulation(const Program& program, KernelConfig config, State state);

        TraceRecord step();
        /// Runs until config.steps have been taken, passing every record to `sink`.
        void run(const std::function<void(const TraceRecord&)>& sink);
        Trace run();

        void inject(const FaultSpec& fault);

        TraceRecord snapshot(int actor = -1, int action = -1, std::vector<Event> events = {}) const;
        TraceHeader header() const;

        const State& state() const { return s_; }
        State& state() { return s_; }
        const Program& program() const { return *program_; }
        const KernelConfig& config() const { return config_; }
        Region global_region() const { return region_of(s_.clocks.global.t, config_.regions); }
        Region local_region(ProcessId p) const { return region_of(s_.clocks.locals[p].t, config_.regions); }
        bool done() const { return s_.step >= config_.steps; }

    private:
        void reset_budgets();
        void expire(std::vector<Event>& events);
        void run_action(ProcessId p, std::span<const int> candidates, const LiftedMessage* msg, bool spontaneous,
                        std::vector<Event>& events, int& action);
        std::vector<int> actions_for(ProcessId p, Trigger trigger, int message_kind) const;
        Scalar fault_value(std::int64_t v, const CounterParams& p) const;
        void corrupt_process(ProcessId p);

        const Program* program_;
        KernelConfig config_;
        State s_;
    };

    /// Reinterprets a bounded simulation as an oracle simulation: process
    /// counters are lifted at their process's region, message stamps at the
    /// global region. Clocks, schedule and random streams carry over.
    Simulation<UnboundedRep> lift_to_oracle(const Simulation<BoundedRep>& bounded);

    /// Builds the protocol named in the scenario, then runs the bounded
    /// program for scenario.total_steps() steps.
    Trace run(const Scenario& scenario, std::uint64_t seed);
    Trace run(const Scenario& scenario);

    extern template class Simulation<BoundedRep>;
    extern template class Simulation<UnboundedRep>;
} // namespace boundstab
