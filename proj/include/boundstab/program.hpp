#pragma once

#include "boundstab/counters.hpp"
#include "boundstab/region_time.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace boundstab
{
    struct TraceRecord;

    struct FamilyDecl
    {
        std::string name;
        CounterParams params;
    };

    /// One kind of dependent counter. `group` names the logical counter it
    /// belongs to (e.g. every copy of a Paxos acceptor's sequence number is in
    /// group "a.seq"), which is how dependent families are counted.
    struct DepKind
    {
        std::string name;
        std::string group;
        int family = 0;
        DepSpec spec;
    };

    struct FreeSlot
    {
        std::string name;
        int family = 0;
    };

    struct DepSlot
    {
        std::string name;
        int kind = 0;
    };

    struct VarSlot
    {
        std::string name;
        std::int64_t domain = 2;
    };

    /// Fixed shape of one process's variables.
    struct Layout
    {
        std::vector<FreeSlot> free;
        std::vector<DepSlot> dep;
        std::vector<VarSlot> vars;
    };

    /// A present dependent counter. `created` and `origin` are simulator
    /// bookkeeping (global regions), not program state: `created` drives
    /// lifetime enforcement and `origin` is when the value was read from a
    /// free counter.
    template <class S>
    struct DepCell
    {
        S value{};
        int kind = 0;
        Region created = 0;
        Region origin = 0;

        friend bool operator==(const DepCell&, const DepCell&) = default;
    };

    /// Absent (bottom) when empty.
    template <class S>
    using Cell = std::optional<DepCell<S>>;

    template <class S>
    struct ProcessState
    {
        std::vector<S> free;
        std::vector<Cell<S>> dep;
        std::vector<std::int64_t> vars;

        friend bool operator==(const ProcessState&, const ProcessState&) = default;
    };

    template <class S>
    struct Message
    {
        std::uint64_t id = 0;
        ProcessId from = 0;
        ProcessId to = 0;
        int kind = 0;
        Region sent = 0;
        std::vector<std::int64_t> fields;
        std::vector<Cell<S>> stamps;

        friend bool operator==(const Message&, const Message&) = default;
    };

    using LiftedState = ProcessState<Value>;
    using LiftedCell = Cell<Value>;
    using LiftedMessage = Message<Value>;
    using BoundedState = ProcessState<Residue>;
    using BoundedMessage = Message<Residue>;

    inline std::optional<Value> value_of(const LiftedCell& c)
    {
        if (c)
        {
            return c->value;
        }
        return std::nullopt;
    }

    // Comparisons involving an absent value are false.
    inline bool lt(std::optional<Value> a, std::optional<Value> b) { return a && b && *a < *b; }
    inline bool le(std::optional<Value> a, std::optional<Value> b) { return a && b && *a <= *b; }
    inline bool eq(std::optional<Value> a, std::optional<Value> b) { return a && b && *a == *b; }

    struct Topology
    {
        std::vector<std::vector<ProcessId>> neighbors;

        int size() const { return static_cast<int>(neighbors.size()); }
        bool strongly_connected() const;
        bool has_edge(ProcessId from, ProcessId to) const;

        static Topology complete(int n);
        static Topology line(int n);
        static Topology ring(int n);
        /// Undirected edges.
        static Topology from_edges(int n, const std::vector<std::pair<int, int>>& edges);
    };

    struct Event
    {
        std::string name;
        std::vector<std::int64_t> args;

        friend bool operator==(const Event&, const Event&) = default;
    };

    class StepContext;

    /// Read-only view used by guards: the acting process's lifted state, its
    /// local region, and the message being considered (receive actions).
    class GuardView
    {
    public:
        using PeerVars = std::function<const std::vector<std::int64_t>&(ProcessId)>;

        GuardView(ProcessId self, Region local_region, const LiftedState& state, const LiftedMessage* msg,
                  const Topology& topology, PeerVars peer_vars = {})
            : self_(self), local_region_(local_region), state_(&state), msg_(msg), topology_(&topology),
              peer_vars_(std::move(peer_vars))
        {
        }

        ProcessId self() const { return self_; }
        Region local_region() const { return local_region_; }
        Value fc(int slot) const { return state_->free[slot]; }
        std::optional<Value> dc(int slot) const { return value_of(state_->dep[slot]); }
        const LiftedCell& dep_cell(int slot) const { return state_->dep[slot]; }
        std::int64_t var(int slot) const { return state_->vars[slot]; }
        const LiftedMessage& msg() const { return *msg_; }
        bool has_msg() const { return msg_ != nullptr; }
        std::optional<Value> stamp(int i) const { return value_of(msg_->stamps[i]); }
        const Topology& topology() const { return *topology_; }
        int process_count() const { return topology_->size(); }

        /// Snapshot oracle: simple variables of any process.
        const std::vector<std::int64_t>& peer_vars(ProcessId p) const { return peer_vars_(p); }

    protected:
        ProcessId self_;
        Region local_region_;
        const LiftedState* state_;
        const LiftedMessage* msg_;
        const Topology* topology_;
        PeerVars peer_vars_;
    };

    /// Mutable context handed to statements. All counter values are lifted
    /// integers; the kernel reduces them afterwards.
    class StepContext : public GuardView
    {
    public:
        StepContext(ProcessId self, Region local_region, Region global_region, LiftedState& state,
                    const LiftedMessage* msg, const Topology& topology, const Layout& layout,
                    std::span<const DepKind> kinds,
                    std::int64_t increment, std::mt19937_64& rng, PeerVars peer_vars)
            : GuardView(self, local_region, state, msg, topology, std::move(peer_vars)), mut_(&state),
              global_region_(global_region), layout_(&layout), kinds_(kinds), increment_(increment), rng_(&rng)
        {
        }

        Value& fc(int slot) { return mut_->free[slot]; }
        using GuardView::fc;
        std::int64_t& var(int slot) { return mut_->vars[slot]; }
        using GuardView::var;

        /// The step's increment d >= 1, already charged to the family budget
        /// when the action declares `spends`.
        std::int64_t d() const { return increment_; }

        /// Creates a dependent cell holding the current value of a free counter.
        void set_dep_from_free(int dep_slot, int free_slot);
        /// Replaces a dependent cell by a fresh copy of `src` (remove then
        /// create). Becomes absent when `src` is absent or its value is older
        /// than the kind's lookback allows.
        void set_dep_copy(int dep_slot, const LiftedCell& src);
        void set_dep_value(int dep_slot, Value v, Region origin);
        void clear_dep(int dep_slot) { mut_->dep[dep_slot].reset(); }

        LiftedCell stamp_free(int kind, int free_slot) const;
        LiftedCell stamp_copy(int kind, const LiftedCell& src) const;

        void send(ProcessId to, int kind, std::vector<std::int64_t> fields, std::vector<LiftedCell> stamps);
        void emit(std::string name, std::vector<std::int64_t> args = {});

        /// Seeded draw in [lo, hi].
        std::int64_t draw(std::int64_t lo, std::int64_t hi);

        std::vector<LiftedMessage>& outbox() { return outbox_; }
        std::vector<Event>& events() { return events_; }

    private:
        LiftedCell make_cell(int kind, Value v, Region origin) const;

        LiftedState* mut_;
        Region global_region_;
        const Layout* layout_;
        std::span<const DepKind> kinds_;
        std::int64_t increment_;
        std::mt19937_64* rng_;
        std::vector<LiftedMessage> outbox_;
        std::vector<Event> events_;
    };

    enum class Trigger
    {
        Spontaneous,
        Receive,
        Tick,
    };

    /// guard -> statement over lifted values.
    struct ActionSpec
    {
        std::string name;
        Trigger trigger = Trigger::Spontaneous;
        /// Message kind handled, for Receive actions.
        int message_kind = -1;
        /// Process role the action belongs to; -1 for every role.
        int role = -1;
        /// Whether the statement consumes the step increment d from the family budget.
        bool spends = false;
        int family = 0;
        std::function<bool(const GuardView&)> guard;
        std::function<void(StepContext&)> statement;
    };

    using SafetyCheck = std::function<std::optional<std::string>(std::span<const TraceRecord>)>;

    /// A protocol written against unbounded counters.
    struct ProtocolDef
    {
        std::string name;
        Topology topology;
        std::vector<FamilyDecl> families;
        std::vector<DepKind> dep_kinds;
        std::vector<std::string> message_kinds;
        std::vector<int> roles;
        std::vector<Layout> role_layouts;
        /// Initial simple variables per process.
        std::vector<std::vector<std::int64_t>> initial_vars;
        std::vector<ActionSpec> actions;
        /// Reports the first violation in a run segment, if any.
        SafetyCheck safety;

        const Layout& layout_of(ProcessId p) const { return role_layouts[roles[p]]; }
        int process_count() const { return topology.size(); }
    };
} // namespace boundstab
