#pragma once

#include "boundstab/scenario.hpp"
#include "boundstab/sim_kernel.hpp"
#include "boundstab/trace.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace boundstab
{
    struct CheckResult
    {
        bool pass = true;
        std::optional<std::uint64_t> first_divergence;
        std::string detail;
    };

    struct ConvergenceResult
    {
        bool pass = true;
        /// Every free counter had an in-window lift from free_bound_region on.
        bool free_in_window = true;
        /// The suffix matched an oracle started from the lifted bounded state.
        bool suffix_matches = true;
        Region fault_stop_region = 0;
        Region free_bound_region = 0;
        Region suffix_region = 0;
        std::optional<std::uint64_t> suffix_start_step;
        std::optional<std::uint64_t> first_divergence;
        std::string detail;
    };

    struct ScanResult
    {
        std::string name;
        bool pass = true;
        std::string detail;
    };

    struct VerificationReport
    {
        std::string protocol;
        std::uint64_t seed = 0;
        std::optional<CheckResult> closure;
        std::optional<ConvergenceResult> convergence;
        std::vector<ScanResult> scans;

        bool pass() const;
        /// One line per entry, same key=value style as trace headers.
        std::vector<std::string> lines() const;
    };

    /// Counters, variables, messages and actions with lifted values removed:
    /// what must agree between the bounded program and the oracle mod maxbound.
    TraceRecord residue_view(const TraceRecord& rec);

    /// Replays the oracle from the initial state with the trace's seed and
    /// compares every step mod maxbound. Throws ConfigError when the scenario
    /// has faults.
    CheckResult closure_check(const Trace& trace, const Scenario& scenario);

    /// Global region of the last record carrying a fault event; empty when
    /// the trace has none.
    std::optional<Region> fault_stop_region(const Trace& trace);

    /// First region whose interval index, for every family, is at least
    /// `intervals` past that of `stop`. One interval is a third of the
    /// modulus, i.e. (11 + 3 max_r) / 3 regions of free-counter growth.
    Region interval_boundary(Region stop, const Program& program, std::int64_t intervals);

    /// (a) free counters lift in-window within 3 * slack regions after the
    /// last fault; (b) from the 3 * slack-th interval boundary the trace
    /// matches an oracle seeded from the lifted bounded state. Re-runs the
    /// scenario and also fails when the trace does not match it.
    ConvergenceResult convergence_check(const Trace& trace, const Scenario& scenario, std::int64_t slack = 1);

    /// No dependent cell, stamp or message alive past its lifetime.
    ScanResult lifetime_scan(const Trace& trace, const Program& program, std::int64_t channel_lifetime);

    struct SkewStats
    {
        std::int64_t max_pairwise = 0;
        std::int64_t max_global = 0;
    };
    SkewStats skew_stats(const Trace& trace);
    /// Gaps at most 1 with drift, exactly 0 without.
    ScanResult skew_scan(const Trace& trace, bool drift_enabled);

    /// The protocol's own safety predicate over records[from, end).
    ScanResult safety_scan(const Trace& trace, const Program& program, std::uint64_t from_step = 0);

    /// Closure for fault-free scenarios, convergence otherwise, plus every scan.
    VerificationReport verify(const Trace& trace, const Scenario& scenario);

    /// A seeded fault campaign between two steps: corrupts every process and
    /// in-flight stamp once, then adds targeted faults against named counters
    /// and variables.
    std::vector<FaultSpec> make_campaign(const Program& program, std::uint64_t seed, std::uint64_t first_step,
                                         std::uint64_t last_step, int extra_faults = 8);

    /// ceil(log2(maxbound_of(maxinc, max_r))).
    int bits_required(std::int64_t maxinc, std::int64_t max_r);

    struct SweepGrid
    {
        /// Region size in seconds.
        Time rs = 100;
        std::vector<std::int64_t> delays;
        std::vector<std::int64_t> rates;
        /// max_r = multiplier * lifetime_regions + extra.
        std::int64_t multiplier = 1;
        std::int64_t extra = 0;
    };

    struct SweepRow
    {
        std::int64_t delay = 0;
        std::int64_t rate = 0;
        std::int64_t lifetime_regions = 0;
        std::int64_t maxinc = 0;
        std::int64_t max_r = 0;
        std::int64_t maxbound = 0;
        int bits = 0;

        friend bool operator==(const SweepRow&, const SweepRow&) = default;
    };

    /// delay -> region_of(delay), rate -> maxinc. Throws ConfigError for
    /// rates below 1 or negative delays.
    std::vector<SweepRow> sweep(const SweepGrid& grid);
    std::string sweep_csv(const std::vector<SweepRow>& rows);
} // namespace boundstab
