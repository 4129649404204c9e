#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace boundstab
{
    /// Invalid parameters, scenario fields, or precondition violations detected
    /// before a run starts.
    class ConfigError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    /// A run broke one of its own invariants (protocol bug, skew violation,
    /// message past its deadline). Carries the offending step.
    class InvariantViolation : public std::runtime_error
    {
    public:
        InvariantViolation(std::uint64_t step, const std::string& what)
            : std::runtime_error("step " + std::to_string(step) + ": " + what), step_(step)
        {
        }

        std::uint64_t step() const noexcept { return step_; }

    private:
        std::uint64_t step_;
    };

    /// Malformed trace or scenario file contents.
    class ParseError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };
} // namespace boundstab
