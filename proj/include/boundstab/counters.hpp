#pragma once

#include "boundstab/errors.hpp"

#include <cstdint>
#include <optional>

namespace boundstab
{
    using Region = std::int64_t;
    using Value = std::int64_t;

    /// Euclidean remainder: always in [0, m) for m > 0.
    constexpr std::int64_t euclid_mod(std::int64_t v, std::int64_t m) noexcept
    {
        const std::int64_t r = v % m;
        return r < 0 ? r + m : r;
    }

    constexpr std::int64_t maxbound_of(std::int64_t maxinc, std::int64_t max_r) noexcept
    {
        return 3 * maxinc * (11 + 3 * max_r);
    }

    /// Constants of one counter family.
    ///
    /// `maxinc` bounds how far any free counter of the family may grow in one
    /// global region; `max_r` is the largest lookback + lifetime (in regions)
    /// of any dependent counter derived from the family. Everything else
    /// (windows, modulus) follows from these two numbers.
    struct CounterParams
    {
        std::int64_t maxinc = 1;
        std::int64_t max_r = 0;

        constexpr std::int64_t maxbound() const noexcept { return maxbound_of(maxinc, max_r); }

        /// Throws ConfigError unless maxinc >= 1 and max_r >= 0.
        void validate() const;

        friend constexpr bool operator==(const CounterParams&, const CounterParams&) = default;
    };

    /// Lookback and lifetime of a dependent counter, in global regions.
    struct DepSpec
    {
        std::int64_t r_b = 0;
        std::int64_t r_f = 0;

        void validate_against(const CounterParams& family) const;
    };

    /// Closed integer interval [min, max].
    struct Window
    {
        Value min = 0;
        Value max = 0;

        constexpr bool contains(Value v) const noexcept { return min <= v && v <= max; }
        constexpr std::int64_t width() const noexcept { return max - min + 1; }

        friend constexpr bool operator==(const Window&, const Window&) = default;
    };

    /// A stored counter value in [0, maxbound). The family is implied by the
    /// slot the residue lives in.
    struct Residue
    {
        std::uint64_t value = 0;

        friend constexpr bool operator==(Residue, Residue) = default;
    };

    constexpr Window legit_free_bounds(Region r, const CounterParams& p) noexcept
    {
        return {3 * r * p.maxinc, 3 * (r + 1) * p.maxinc + 2 * p.maxinc - 1};
    }

    /// Requires r >= 2 + max_r; throws ConfigError otherwise.
    Window legit_dep_bounds(Region r, const CounterParams& p);

    constexpr Value checkfc(Value v, Region r, const CounterParams& p) noexcept
    {
        const Window w = legit_free_bounds(r, p);
        return w.contains(v) ? v : w.min;
    }

    Value checkdc(Value v, Region r, const CounterParams& p);

    Residue to_residue(Value v, const CounterParams& p) noexcept;

    /// The unique y with y == x (mod m) inside `w`, if any. Requires w.width() <= m.
    std::optional<Value> lift_into(Residue x, const Window& w, std::int64_t m) noexcept;

    Value convertfc(Residue x, Region r, const CounterParams& p);
    Value convertdc(Residue x, Region r, const CounterParams& p);

    /// Bits needed to hold any residue of the family.
    int bits_for_maxbound(std::int64_t maxbound) noexcept;

    /// Smallest of 8/16/32/64 holding `bits`.
    int natural_width_bits(int bits) noexcept;
} // namespace boundstab
