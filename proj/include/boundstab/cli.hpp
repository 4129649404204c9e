#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>

namespace boundstab
{
    enum ExitCode
    {
        exit_pass = 0,
        exit_check_failed = 1,
        exit_config_error = 2,
    };

    /// Writes the trace to `out_path` and echoes derived parameters to `out`.
    int cmd_run(const std::filesystem::path& scenario_path, std::optional<std::uint64_t> seed,
                const std::filesystem::path& out_path, std::ostream& out, std::ostream& err);

    int cmd_check(const std::filesystem::path& trace_path, const std::filesystem::path& scenario_path,
                  std::int64_t slack, std::ostream& out, std::ostream& err);

    int cmd_bits(std::int64_t maxinc, std::int64_t max_r, std::ostream& out, std::ostream& err);

    /// Writes CSV to `out_path`, or to `out` when the path is empty.
    int cmd_sweep(const std::filesystem::path& grid_path, const std::filesystem::path& out_path, std::ostream& out,
                  std::ostream& err);
} // namespace boundstab
