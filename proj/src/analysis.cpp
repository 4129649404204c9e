#include "boundstab/analysis.hpp"

#include "boundstab/protocols.hpp"

#include <algorithm>
#include <sstream>

namespace boundstab
{
    namespace
    {
        void strip(CounterSnap& c) { c.lifted.reset(); }

        std::string describe_difference(const TraceRecord& want, const TraceRecord& got)
        {
            std::ostringstream out;
            out << "step " << want.step << ": ";
            if (want.actor != got.actor || want.action != got.action)
            {
                out << "action " << want.actor << "/" << want.action << " vs " << got.actor << "/" << got.action;
                return out.str();
            }
            for (std::size_t p = 0; p < std::min(want.processes.size(), got.processes.size()); ++p)
            {
                const ProcessSnap& a = want.processes[p];
                const ProcessSnap& b = got.processes[p];
                for (std::size_t i = 0; i < std::min(a.counters.size(), b.counters.size()); ++i)
                {
                    if (a.counters[i].residue != b.counters[i].residue)
                    {
                        out << "process " << p << " counter " << i << ": "
                            << (a.counters[i].residue ? std::to_string(*a.counters[i].residue) : "absent") << " vs "
                            << (b.counters[i].residue ? std::to_string(*b.counters[i].residue) : "absent");
                        return out.str();
                    }
                }
                if (a.vars != b.vars || a.region != b.region)
                {
                    out << "process " << p << " variables or region differ";
                    return out.str();
                }
            }
            if (want.messages != got.messages)
            {
                out << "in-flight messages differ";
                return out.str();
            }
            out << "records differ";
            return out.str();
        }
    } // namespace

    TraceRecord residue_view(const TraceRecord& rec)
    {
        TraceRecord out = rec;
        for (ProcessSnap& p : out.processes)
        {
            std::for_each(p.counters.begin(), p.counters.end(), strip);
        }
        for (MessageSnap& m : out.messages)
        {
            std::for_each(m.stamps.begin(), m.stamps.end(), strip);
        }
        for (Event& e : out.events)
        {
            e.args.clear();
        }
        return out;
    }

    CheckResult closure_check(const Trace& trace, const Scenario& scenario)
    {
        if (!scenario.faults.empty())
        {
            throw ConfigError("closure check needs a fault-free scenario");
        }
        CheckResult result;
        if (trace.records.empty())
        {
            result.detail = "empty trace";
            return result;
        }
        const Program program = build_program(scenario);
        KernelConfig config = resolved_config(scenario, program);
        config.steps = trace.records.size();
        Simulation<UnboundedRep> oracle(program, config, trace.header.seed);
        for (const TraceRecord& rec : trace.records)
        {
            TraceRecord expected;
            try
            {
                expected = residue_view(oracle.step());
            }
            catch (const InvariantViolation& e)
            {
                result.pass = false;
                result.first_divergence = rec.step;
                result.detail = std::string("oracle aborted: ") + e.what();
                return result;
            }
            const TraceRecord got = residue_view(rec);
            if (expected != got)
            {
                result.pass = false;
                result.first_divergence = rec.step;
                result.detail = describe_difference(expected, got);
                return result;
            }
        }
        result.detail = std::to_string(trace.records.size()) + " steps equal mod maxbound";
        return result;
    }

    std::optional<Region> fault_stop_region(const Trace& trace)
    {
        std::optional<Region> stop;
        for (const TraceRecord& rec : trace.records)
        {
            for (const Event& e : rec.events)
            {
                if (e.name == "fault")
                {
                    stop = rec.global_region;
                }
            }
        }
        return stop;
    }

    Region interval_boundary(Region stop, const Program& program, std::int64_t intervals)
    {
        Region boundary = stop;
        for (const FamilyDecl& f : program.def.families)
        {
            const std::int64_t span = 11 + 3 * f.params.max_r;
            const std::int64_t target = (3 * stop) / span + intervals;
            boundary = std::max(boundary, (target * span + 2) / 3);
        }
        return boundary;
    }

    ConvergenceResult convergence_check(const Trace& trace, const Scenario& scenario, std::int64_t slack)
    {
        ConvergenceResult result;
        const Program program = build_program(scenario);
        KernelConfig config = resolved_config(scenario, program);
        config.steps = trace.records.size();

        const std::optional<Region> stop = fault_stop_region(trace);
        std::uint64_t last_fault_step = 0;
        for (const FaultSpec& f : config.faults)
        {
            last_fault_step = std::max(last_fault_step, f.step);
        }
        result.fault_stop_region = stop.value_or(config.regions.start_region);
        result.free_bound_region = result.fault_stop_region + 3 * slack;
        result.suffix_region = stop ? interval_boundary(*stop, program, 3 * slack) : config.regions.start_region;

        // (a)
        for (const TraceRecord& rec : trace.records)
        {
            if (!stop || rec.global_region < result.free_bound_region)
            {
                continue;
            }
            for (std::size_t p = 0; p < rec.processes.size() && result.free_in_window; ++p)
            {
                const std::size_t frees = program.layout(static_cast<ProcessId>(p)).free.size();
                for (std::size_t i = 0; i < frees; ++i)
                {
                    if (!rec.processes[p].counters[i].lifted)
                    {
                        result.free_in_window = false;
                        result.detail = "step " + std::to_string(rec.step) + ": free counter " + std::to_string(i) +
                                        " of process " + std::to_string(p) + " has no in-window lift";
                        break;
                    }
                }
            }
            if (!result.free_in_window)
            {
                break;
            }
        }

        // (b)
        Simulation<BoundedRep> sim(program, config, trace.header.seed);
        std::optional<Simulation<UnboundedRep>> oracle;
        for (const TraceRecord& rec : trace.records)
        {
            const bool past_faults = !stop || sim.state().step > last_fault_step;
            if (!oracle && past_faults && sim.global_region() >= result.suffix_region)
            {
                oracle.emplace(lift_to_oracle(sim));
                result.suffix_start_step = sim.state().step;
            }
            TraceRecord replay;
            TraceRecord expected;
            try
            {
                replay = sim.step();
                if (oracle)
                {
                    expected = residue_view(oracle->step());
                }
            }
            catch (const InvariantViolation& e)
            {
                result.suffix_matches = false;
                result.first_divergence = rec.step;
                result.detail = std::string("aborted: ") + e.what();
                break;
            }
            if (replay != rec)
            {
                result.suffix_matches = false;
                result.first_divergence = rec.step;
                result.detail = "trace does not match scenario: " + describe_difference(replay, rec);
                break;
            }
            if (oracle && expected != residue_view(rec))
            {
                result.suffix_matches = false;
                result.first_divergence = rec.step;
                result.detail = "suffix diverges from oracle: " + describe_difference(expected, residue_view(rec));
                break;
            }
        }
        if (result.suffix_matches && !oracle && !trace.records.empty())
        {
            result.suffix_matches = false;
            result.detail = "trace ends before region " + std::to_string(result.suffix_region);
        }
        result.pass = result.free_in_window && result.suffix_matches;
        if (result.pass)
        {
            result.detail = "stable from region " + std::to_string(result.suffix_region);
        }
        return result;
    }
} // namespace boundstab

namespace boundstab
{
    ScanResult lifetime_scan(const Trace& trace, const Program& program, std::int64_t channel_lifetime)
    {
        ScanResult result{"lifetime", true, ""};
        auto fail = [&](const TraceRecord& rec, const std::string& what) {
            result.pass = false;
            result.detail = "step " + std::to_string(rec.step) + ": " + what;
        };
        for (const TraceRecord& rec : trace.records)
        {
            for (std::size_t p = 0; p < rec.processes.size() && result.pass; ++p)
            {
                const Layout& layout = program.layout(static_cast<ProcessId>(p));
                for (std::size_t i = 0; i < layout.dep.size(); ++i)
                {
                    const CounterSnap& c = rec.processes[p].counters[layout.free.size() + i];
                    const std::int64_t r_f = program.def.dep_kinds[layout.dep[i].kind].spec.r_f;
                    if (c.residue && rec.global_region - c.created > r_f)
                    {
                        fail(rec, "process " + std::to_string(p) + " " + layout.dep[i].name + " alive " +
                                      std::to_string(rec.global_region - c.created) + " regions, lifetime " +
                                      std::to_string(r_f));
                        break;
                    }
                }
            }
            for (const MessageSnap& m : rec.messages)
            {
                if (!result.pass)
                {
                    break;
                }
                if (rec.global_region - m.sent > channel_lifetime)
                {
                    fail(rec, "message " + std::to_string(m.id) + " in flight past its lifetime");
                    break;
                }
                for (std::size_t i = 0; i < m.stamps.size(); ++i)
                {
                    if (m.stamps[i].residue &&
                        rec.global_region - m.stamps[i].created > program.def.dep_kinds[m.stamp_kinds[i]].spec.r_f)
                    {
                        fail(rec, "stamp of message " + std::to_string(m.id) + " past its lifetime");
                        break;
                    }
                }
            }
            if (!result.pass)
            {
                break;
            }
        }
        return result;
    }

    SkewStats skew_stats(const Trace& trace)
    {
        SkewStats s;
        for (const TraceRecord& rec : trace.records)
        {
            if (rec.processes.empty())
            {
                continue;
            }
            Region lo = rec.processes.front().region;
            Region hi = lo;
            for (const ProcessSnap& p : rec.processes)
            {
                lo = std::min(lo, p.region);
                hi = std::max(hi, p.region);
                s.max_global = std::max<std::int64_t>(s.max_global, std::abs(p.region - rec.global_region));
            }
            s.max_pairwise = std::max(s.max_pairwise, hi - lo);
        }
        return s;
    }

    ScanResult skew_scan(const Trace& trace, bool drift_enabled)
    {
        const SkewStats s = skew_stats(trace);
        const std::int64_t limit = drift_enabled ? 1 : 0;
        ScanResult result{"skew", s.max_pairwise <= limit && s.max_global <= limit, ""};
        result.detail = "max pairwise gap " + std::to_string(s.max_pairwise) + ", max global gap " +
                        std::to_string(s.max_global);
        return result;
    }

    ScanResult safety_scan(const Trace& trace, const Program& program, std::uint64_t from_step)
    {
        ScanResult result{"safety", true, ""};
        if (!program.def.safety)
        {
            result.detail = "no safety predicate";
            return result;
        }
        const auto first = std::find_if(trace.records.begin(), trace.records.end(),
                                        [&](const TraceRecord& r) { return r.step >= from_step; });
        const std::span<const TraceRecord> suffix(first, trace.records.end());
        if (const std::optional<std::string> bad = program.def.safety(suffix))
        {
            result.pass = false;
            result.detail = *bad;
        }
        else
        {
            result.detail = std::to_string(suffix.size()) + " records from step " + std::to_string(from_step);
        }
        return result;
    }

    bool VerificationReport::pass() const
    {
        const bool scans_ok = std::all_of(scans.begin(), scans.end(), [](const ScanResult& s) { return s.pass; });
        return scans_ok && (!closure || closure->pass) && (!convergence || convergence->pass);
    }

    std::vector<std::string> VerificationReport::lines() const
    {
        auto verdict = [](bool ok) { return ok ? std::string("pass") : std::string("fail"); };
        std::vector<std::string> out;
        out.push_back("report protocol=" + protocol + " seed=" + std::to_string(seed) + " result=" + verdict(pass()));
        if (closure)
        {
            out.push_back("closure result=" + verdict(closure->pass) + " first_divergence=" +
                          (closure->first_divergence ? std::to_string(*closure->first_divergence) : "none") +
                          " detail=\"" + closure->detail + "\"");
        }
        if (convergence)
        {
            const ConvergenceResult& c = *convergence;
            out.push_back("convergence result=" + verdict(c.pass) + " fault_stop_region=" +
                          std::to_string(c.fault_stop_region) + " free_bound_region=" +
                          std::to_string(c.free_bound_region) + " suffix_region=" + std::to_string(c.suffix_region) +
                          " suffix_start_step=" +
                          (c.suffix_start_step ? std::to_string(*c.suffix_start_step) : "none") + " detail=\"" +
                          c.detail + "\"");
        }
        for (const ScanResult& s : scans)
        {
            out.push_back("scan name=" + s.name + " result=" + verdict(s.pass) + " detail=\"" + s.detail + "\"");
        }
        return out;
    }

    VerificationReport verify(const Trace& trace, const Scenario& scenario)
    {
        const Program program = build_program(scenario);
        VerificationReport report;
        report.protocol = program.def.name;
        report.seed = trace.header.seed;
        std::uint64_t safe_from = 0;
        if (scenario.faults.empty())
        {
            report.closure = closure_check(trace, scenario);
        }
        else
        {
            report.convergence = convergence_check(trace, scenario);
            safe_from = report.convergence->suffix_start_step.value_or(trace.header.steps);
        }
        report.scans.push_back(lifetime_scan(trace, program, scenario.channel_lifetime));
        report.scans.push_back(
            skew_scan(trace, scenario.drift.kind != DriftPolicy::Kind::None && scenario.drift.max_step_skew > 0));
        report.scans.push_back(safety_scan(trace, program, safe_from));
        return report;
    }
} // namespace boundstab

namespace boundstab
{
    std::vector<FaultSpec> make_campaign(const Program& program, std::uint64_t seed, std::uint64_t first_step,
                                         std::uint64_t last_step, int extra_faults)
    {
        if (last_step < first_step)
        {
            throw ConfigError("campaign ends before it starts");
        }
        std::mt19937_64 rng(seed);
        auto pick = [&](std::uint64_t lo, std::uint64_t hi) {
            return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
        };
        auto any_value = [&]() { return static_cast<std::int64_t>(pick(0, 1ULL << 40)); };
        const int n = program.def.process_count();

        std::vector<FaultSpec> faults;
        faults.push_back({FaultSpec::Kind::CorruptAll, first_step, 0, {}});
        // Every dependent slot present with garbage at least once.
        for (ProcessId p = 0; p < n; ++p)
        {
            for (const DepSlot& d : program.layout(p).dep)
            {
                faults.push_back({FaultSpec::Kind::InsertDep, first_step, p, d.name, any_value()});
            }
        }
        for (int i = 0; i < extra_faults; ++i)
        {
            const ProcessId p = static_cast<ProcessId>(pick(0, n - 1));
            const Layout& l = program.layout(p);
            const std::uint64_t at = pick(first_step, last_step);
            switch (pick(0, 4))
            {
            case 0:
                if (!l.free.empty())
                {
                    faults.push_back({FaultSpec::Kind::OverwriteCounter, at, p, l.free[pick(0, l.free.size() - 1)].name,
                                      any_value()});
                }
                break;
            case 1:
                if (!l.dep.empty())
                {
                    faults.push_back(
                        {FaultSpec::Kind::InsertDep, at, p, l.dep[pick(0, l.dep.size() - 1)].name, any_value()});
                }
                break;
            case 2:
                if (!l.dep.empty())
                {
                    faults.push_back({FaultSpec::Kind::DeleteDep, at, p, l.dep[pick(0, l.dep.size() - 1)].name});
                }
                break;
            case 3:
                if (!l.vars.empty())
                {
                    faults.push_back(
                        {FaultSpec::Kind::ScrambleVar, at, p, l.vars[pick(0, l.vars.size() - 1)].name, any_value()});
                }
                break;
            default:
                faults.push_back({FaultSpec::Kind::CorruptProcess, at, p, {}});
                break;
            }
        }
        faults.push_back({FaultSpec::Kind::CorruptProcess, last_step, static_cast<ProcessId>(pick(0, n - 1)), {}});
        std::stable_sort(faults.begin(), faults.end(),
                         [](const FaultSpec& a, const FaultSpec& b) { return a.step < b.step; });
        return faults;
    }

    int bits_required(std::int64_t maxinc, std::int64_t max_r)
    {
        CounterParams{maxinc, max_r}.validate();
        return bits_for_maxbound(maxbound_of(maxinc, max_r));
    }

    std::vector<SweepRow> sweep(const SweepGrid& grid)
    {
        const RegionParams regions{grid.rs, 0};
        std::vector<SweepRow> rows;
        for (const std::int64_t delay : grid.delays)
        {
            for (const std::int64_t rate : grid.rates)
            {
                if (rate < 1)
                {
                    throw ConfigError("sweep rate must be >= 1 (got " + std::to_string(rate) + ")");
                }
                SweepRow row;
                row.delay = delay;
                row.rate = rate;
                row.lifetime_regions = region_of(delay, regions);
                row.maxinc = rate;
                row.max_r = grid.multiplier * row.lifetime_regions + grid.extra;
                row.maxbound = maxbound_of(row.maxinc, row.max_r);
                row.bits = bits_required(row.maxinc, row.max_r);
                rows.push_back(row);
            }
        }
        return rows;
    }

    std::string sweep_csv(const std::vector<SweepRow>& rows)
    {
        std::ostringstream out;
        out << "delay,rate,lifetime_regions,maxinc,max_r,maxbound,bits\n";
        for (const SweepRow& r : rows)
        {
            out << r.delay << ',' << r.rate << ',' << r.lifetime_regions << ',' << r.maxinc << ',' << r.max_r << ','
                << r.maxbound << ',' << r.bits << '\n';
        }
        return out.str();
    }
} // namespace boundstab
