#include "boundstab/counters.hpp"

#include <bit>
#include <string>

namespace boundstab
{
    void CounterParams::validate() const
    {
        if (maxinc < 1)
        {
            throw ConfigError("maxinc must be >= 1 (got " + std::to_string(maxinc) + ")");
        }
        if (max_r < 0)
        {
            throw ConfigError("max_r must be >= 0 (got " + std::to_string(max_r) + ")");
        }
    }

    void DepSpec::validate_against(const CounterParams& family) const
    {
        if (r_b < 0 || r_f < 0)
        {
            throw ConfigError("r_b and r_f must be non-negative");
        }
        if (r_b + r_f > family.max_r)
        {
            throw ConfigError("r_b + r_f = " + std::to_string(r_b + r_f) + " exceeds family max_r = " +
                              std::to_string(family.max_r));
        }
    }

    Window legit_dep_bounds(Region r, const CounterParams& p)
    {
        if (r < 2 + p.max_r)
        {
            throw ConfigError("dependent window needs region >= 2 + max_r (region " + std::to_string(r) +
                              ", max_r " + std::to_string(p.max_r) + ")");
        }
        return {3 * (r - 2 - p.max_r) * p.maxinc, legit_free_bounds(r, p).max};
    }

    Value checkdc(Value v, Region r, const CounterParams& p)
    {
        const Window w = legit_dep_bounds(r, p);
        return w.contains(v) ? v : w.min;
    }

    Residue to_residue(Value v, const CounterParams& p) noexcept
    {
        return Residue{static_cast<std::uint64_t>(euclid_mod(v, p.maxbound()))};
    }

    std::optional<Value> lift_into(Residue x, const Window& w, std::int64_t m) noexcept
    {
        // Window narrower than the modulus, so the smallest lift >= w.min is the only candidate.
        const Value y = w.min + euclid_mod(static_cast<Value>(x.value) - w.min, m);
        if (y <= w.max)
        {
            return y;
        }
        return std::nullopt;
    }

    Value convertfc(Residue x, Region r, const CounterParams& p)
    {
        const Window w = legit_free_bounds(r, p);
        return lift_into(x, w, p.maxbound()).value_or(w.min);
    }

    Value convertdc(Residue x, Region r, const CounterParams& p)
    {
        const Window w = legit_dep_bounds(r, p);
        return lift_into(x, w, p.maxbound()).value_or(w.min);
    }

    int bits_for_maxbound(std::int64_t maxbound) noexcept
    {
        if (maxbound <= 1)
        {
            return 0;
        }
        // ceil(log2(n)) == bit width of (n - 1)
        return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(maxbound - 1)));
    }

    int natural_width_bits(int bits) noexcept
    {
        for (int w : {8, 16, 32})
        {
            if (bits <= w)
            {
                return w;
            }
        }
        return 64;
    }
} // namespace boundstab
