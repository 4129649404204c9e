#include "common.hpp"

namespace boundstab::proto
{
    namespace
    {
        enum ProposerVar
        {
            phase,
            promises,
            accepts,
            best_val,
            best_id,
            decided,
            timer,
            proposal,
        };
        enum AcceptorVar
        {
            promised_id,
            accepted_val,
            accepted_id,
        };
        enum Msg
        {
            prepare_msg,
            promise_msg,
            accept_msg,
            accepted_msg,
            nack_msg,
        };
        enum Kind
        {
            pending_kind,
            ballot_kind,
            promised_kind,
            accepted_kind,
            acceptor_stamp_kind,
            best_kind,
        };
        // Dependent slots. Proposer: pending ballot, best accepted ballot
        // reported so far. Acceptor: promised ballot, accepted ballot.
        constexpr int pending = 0;
        constexpr int best = 1;
        constexpr int promised = 0;
        constexpr int accepted = 1;

        constexpr int idle = 0;
        constexpr int preparing = 1;
        constexpr int accepting = 2;

        // (b, p) >= (q, qid) with an absent q below everything.
        bool at_least(std::optional<Value> b, int p, std::optional<Value> q, int qid)
        {
            return b && (!q || !ordered_before(b, p, q, qid));
        }
    } // namespace

    // Single-decree Paxos. Processes 0..P-1 propose, P..P+A-1 accept.
    // Ballots are (sequence number, proposer id).
    ProtocolDef paxos_single_decree(const Scenario& sc, Topology topo)
    {
        const std::int64_t v = sc.channel_lifetime;
        ParamReader params("paxos_single_decree", sc.params);
        const int proposers = static_cast<int>(params.get("proposers", 2, 1));
        const int acceptors = static_cast<int>(params.get("acceptors", 3, 1));
        const std::int64_t quorum = params.get("quorum", acceptors / 2 + 1, 1);
        const std::int64_t timeout = params.get("timeout", 2 * v + 1, 1);
        const std::int64_t reply_percent = params.get("reply_percent", 100);
        const std::int64_t accept_life = params.get("accepted_lifetime", 8 * v + 12, 1);
        params.finish();

        if (quorum > acceptors)
        {
            throw ConfigError("paxos_single_decree: quorum " + std::to_string(quorum) + " exceeds " +
                              std::to_string(acceptors) + " acceptors");
        }
        if (topo.size() != proposers + acceptors)
        {
            throw ConfigError("paxos_single_decree: topology needs proposers + acceptors = " +
                              std::to_string(proposers + acceptors) + " processes");
        }
        for (int p = 0; p < proposers; ++p)
        {
            for (int a = proposers; a < proposers + acceptors; ++a)
            {
                if (!topo.has_edge(p, a))
                {
                    throw ConfigError("paxos_single_decree: every proposer must neighbour every acceptor");
                }
            }
        }

        const std::int64_t pending_life = timeout + 2;
        const std::int64_t ballot_back = pending_life + 2 * v;
        const std::int64_t acc_back = pending_life + 2 * v;
        const std::int64_t stamp_back = acc_back + accept_life;

        ProtocolDef def;
        def.name = "paxos_single_decree";
        def.topology = std::move(topo);
        def.families = {{"seq", {}}};
        def.dep_kinds = {{"PendingSeq", "PendingSeq", 0, {0, pending_life}},
                         {"ballot.m", "PendingSeq", 0, {ballot_back, v}},
                         {"a.seq", "a.seq", 0, {acc_back, accept_life}},
                         {"a.accepted", "a.seq", 0, {acc_back, accept_life}},
                         {"a.seq.m", "a.seq", 0, {stamp_back, v}},
                         {"best_acc_seq", "a.seq", 0, {stamp_back + v, pending_life}}};
        def.message_kinds = {"prepare", "promise", "accept", "accepted", "nack"};
        const int n = proposers + acceptors;
        for (int p = 0; p < n; ++p)
        {
            def.roles.push_back(p < proposers ? 0 : 1);
        }
        def.role_layouts = {
            Layout{{{"NextSeq", 0}},
                   {{"PendingSeq", pending_kind}, {"best_acc_seq", best_kind}},
                   {{"phase", 3},
                    {"promises", bit(acceptors)},
                    {"accepts", bit(acceptors)},
                    {"best_val", proposers + 1},
                    {"best_id", proposers},
                    {"decided", 2},
                    {"timer", timeout + 1},
                    {"proposal", proposers + 1}}},
            Layout{{}, {{"a.seq", promised_kind}, {"a.accepted", accepted_kind}},
                   {{"promised_id", proposers}, {"accepted_val", proposers + 1}, {"accepted_id", proposers}}}};
        for (int p = 0; p < n; ++p)
        {
            def.initial_vars.push_back(p < proposers ? std::vector<std::int64_t>{idle, 0, 0, 0, 0, 0, 0, p + 1}
                                                     : std::vector<std::int64_t>{0, 0, 0});
        }

        auto to_acceptors = [proposers, acceptors](StepContext& ctx, int kind, std::vector<std::int64_t> fields) {
            for (int a = proposers; a < proposers + acceptors; ++a)
            {
                ctx.send(a, kind, fields, {ctx.stamp_copy(ballot_kind, ctx.dep_cell(pending))});
            }
        };

        // Proposer.
        def.actions.push_back(ActionSpec{
            "give_up", Trigger::Spontaneous, -1, 0, false, 0,
            [](const GuardView& g) { return g.var(phase) != idle && !g.dc(pending); },
            [](StepContext& ctx) { ctx.var(phase) = idle; }});
        def.actions.push_back(ActionSpec{
            "propose", Trigger::Spontaneous, -1, 0, true, 0, [](const GuardView& g) { return g.var(phase) == idle; },
            [timeout, to_acceptors](StepContext& ctx) {
                ctx.fc(0) += ctx.d();
                ctx.set_dep_from_free(pending, 0);
                ctx.clear_dep(best);
                ctx.var(phase) = preparing;
                ctx.var(promises) = 0;
                ctx.var(accepts) = 0;
                ctx.var(best_val) = 0;
                ctx.var(best_id) = 0;
                ctx.var(timer) = timeout;
                to_acceptors(ctx, prepare_msg, {});
            }});
        def.actions.push_back(ActionSpec{
            "timeout", Trigger::Tick, -1, 0, false, 0, [](const GuardView& g) { return g.var(phase) != idle; },
            [](StepContext& ctx) {
                ctx.var(timer) = std::max<std::int64_t>(0, ctx.var(timer) - 1);
                if (ctx.var(timer) == 0)
                {
                    ctx.var(phase) = idle;
                }
            }});
        def.actions.push_back(ActionSpec{
            "on_promise", Trigger::Receive, promise_msg, 0, false, 0, nullptr,
            [proposers, quorum, to_acceptors](StepContext& ctx) {
                if (ctx.var(phase) != preparing || !eq(ctx.stamp(0), ctx.dc(pending)))
                {
                    return;
                }
                const auto& f = ctx.msg().fields;
                ctx.var(promises) |= bit(ctx.msg().from - proposers);
                if (f[0] != 0 && ctx.stamp(1) &&
                    (!ctx.dc(best) || ordered_before(ctx.dc(best), static_cast<int>(ctx.var(best_id)), ctx.stamp(1),
                                                     static_cast<int>(f[2]))))
                {
                    ctx.set_dep_copy(best, ctx.msg().stamps[1]);
                    ctx.var(best_val) = f[1];
                    ctx.var(best_id) = f[2];
                }
                if (popcount(ctx.var(promises)) >= quorum)
                {
                    if (!ctx.dc(best))
                    {
                        ctx.var(best_val) = ctx.var(proposal);
                    }
                    ctx.var(phase) = accepting;
                    to_acceptors(ctx, accept_msg, {ctx.var(best_val)});
                }
            }});
        def.actions.push_back(ActionSpec{
            "on_accepted", Trigger::Receive, accepted_msg, 0, false, 0, nullptr,
            [proposers, quorum](StepContext& ctx) {
                if (ctx.var(phase) != accepting || !eq(ctx.stamp(0), ctx.dc(pending)))
                {
                    return;
                }
                ctx.var(accepts) |= bit(ctx.msg().from - proposers);
                if (popcount(ctx.var(accepts)) >= quorum)
                {
                    ctx.var(decided) = 1;
                    ctx.var(phase) = idle;
                    ctx.emit("chosen", {ctx.var(best_val), *ctx.dc(pending), ctx.self()});
                }
            }});
        def.actions.push_back(ActionSpec{
            "on_nack", Trigger::Receive, nack_msg, 0, false, 0, nullptr, [](StepContext& ctx) {
                if (const std::optional<Value> seen = ctx.stamp(1))
                {
                    ctx.fc(0) = std::max(ctx.fc(0), *seen);
                }
                if (ctx.var(phase) != idle && eq(ctx.stamp(0), ctx.dc(pending)))
                {
                    ctx.var(phase) = idle;
                }
            }});

        // Acceptor.
        auto reply = [reply_percent](StepContext& ctx, int kind, std::vector<std::int64_t> fields, std::vector<LiftedCell> extra) {
            if (ctx.draw(0, 99) >= reply_percent)
            {
                return;
            }
            std::vector<LiftedCell> stamps{ctx.stamp_copy(ballot_kind, ctx.msg().stamps[0])};
            stamps.insert(stamps.end(), extra.begin(), extra.end());
            ctx.send(ctx.msg().from, kind, std::move(fields), std::move(stamps));
        };
        auto nack = [reply](StepContext& ctx) {
            reply(ctx, nack_msg, {}, {ctx.stamp_copy(acceptor_stamp_kind, ctx.dep_cell(promised))});
        };
        def.actions.push_back(ActionSpec{
            "on_prepare", Trigger::Receive, prepare_msg, 1, false, 0, nullptr, [reply, nack](StepContext& ctx) {
                const ProcessId p = ctx.msg().from;
                if (!ctx.stamp(0))
                {
                    return;
                }
                if (!at_least(ctx.stamp(0), p, ctx.dc(promised), static_cast<int>(ctx.var(promised_id))))
                {
                    nack(ctx);
                    return;
                }
                ctx.set_dep_copy(promised, ctx.msg().stamps[0]);
                ctx.var(promised_id) = p;
                const bool has = ctx.dc(accepted).has_value();
                reply(ctx, promise_msg, {has ? 1 : 0, ctx.var(accepted_val), ctx.var(accepted_id)},
                      {ctx.stamp_copy(acceptor_stamp_kind, ctx.dep_cell(accepted))});
            }});
        def.actions.push_back(ActionSpec{
            "on_accept", Trigger::Receive, accept_msg, 1, false, 0, nullptr, [reply, nack, proposers](StepContext& ctx) {
                const ProcessId p = ctx.msg().from;
                if (!ctx.stamp(0))
                {
                    return;
                }
                if (!at_least(ctx.stamp(0), p, ctx.dc(promised), static_cast<int>(ctx.var(promised_id))))
                {
                    nack(ctx);
                    return;
                }
                ctx.set_dep_copy(promised, ctx.msg().stamps[0]);
                ctx.var(promised_id) = p;
                ctx.set_dep_copy(accepted, ctx.msg().stamps[0]);
                ctx.var(accepted_val) = std::clamp<std::int64_t>(ctx.msg().fields[0], 0, proposers);
                ctx.var(accepted_id) = p;
                reply(ctx, accepted_msg, {}, {});
            }});

        def.safety = [](std::span<const TraceRecord> records) -> std::optional<std::string> {
            std::optional<std::int64_t> chosen;
            for (const TraceRecord& rec : records)
            {
                for (const Event& e : rec.events)
                {
                    if (e.name != "chosen")
                    {
                        continue;
                    }
                    if (chosen && *chosen != e.args[0])
                    {
                        return "step " + std::to_string(rec.step) + ": value " + std::to_string(e.args[0]) +
                               " chosen after " + std::to_string(*chosen);
                    }
                    chosen = e.args[0];
                }
            }
            return std::nullopt;
        };
        return def;
    }
} // namespace boundstab::proto
