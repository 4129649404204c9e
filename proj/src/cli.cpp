#include "boundstab/cli.hpp"

#include "boundstab/analysis.hpp"
#include "boundstab/errors.hpp"
#include "boundstab/protocols.hpp"
#include "boundstab/scenario_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace boundstab
{
    namespace
    {
        template <class F>
        int guarded(std::ostream& err, F&& body)
        {
            try
            {
                return body();
            }
            catch (const ConfigError& e)
            {
                err << "config error: " << e.what() << '\n';
                return exit_config_error;
            }
            catch (const ParseError& e)
            {
                err << "parse error: " << e.what() << '\n';
                return exit_config_error;
            }
            catch (const InvariantViolation& e)
            {
                err << "invariant violation: " << e.what() << '\n';
                return exit_check_failed;
            }
        }

        std::string read_file(const std::filesystem::path& path)
        {
            std::ifstream in(path);
            if (!in)
            {
                throw ConfigError("cannot read " + path.string());
            }
            std::ostringstream s;
            s << in.rdbuf();
            return s.str();
        }
    } // namespace

    int cmd_run(const std::filesystem::path& scenario_path, std::optional<std::uint64_t> seed,
                const std::filesystem::path& out_path, std::ostream& out, std::ostream& err)
    {
        return guarded(err, [&] {
            const Scenario scenario = load_scenario(scenario_path);
            const Program program = build_program(scenario);
            const KernelConfig config = resolved_config(scenario, program);
            config.validate(program);
            out << "protocol=" << program.def.name << " processes=" << program.def.process_count()
                << " start_region=" << config.regions.start_region << " steps=" << config.steps << '\n';
            for (std::size_t f = 0; f < program.def.families.size(); ++f)
            {
                const CounterParams& p = program.family(static_cast<int>(f));
                out << "family=" << program.def.families[f].name << " maxinc=" << p.maxinc << " max_r=" << p.max_r
                    << " maxbound=" << p.maxbound() << " bits=" << bits_for_maxbound(p.maxbound()) << '\n';
            }
            const Trace trace = run(scenario, seed.value_or(scenario.seed));
            std::ofstream file(out_path);
            if (!file)
            {
                throw ConfigError("cannot write " + out_path.string());
            }
            write_trace(file, trace);
            out << "wrote " << trace.records.size() << " steps to " << out_path.string() << '\n';
            return static_cast<int>(exit_pass);
        });
    }

    int cmd_check(const std::filesystem::path& trace_path, const std::filesystem::path& scenario_path,
                  std::int64_t slack, std::ostream& out, std::ostream& err)
    {
        return guarded(err, [&] {
            const Scenario scenario = load_scenario(scenario_path);
            const Trace trace = load_trace(trace_path);
            if (trace.header.protocol != build_program(scenario).def.name)
            {
                err << "trace protocol " << trace.header.protocol << " does not match scenario protocol "
                    << scenario.protocol << '\n';
                return static_cast<int>(exit_check_failed);
            }
            VerificationReport report = verify(trace, scenario);
            if (slack != 1 && report.convergence)
            {
                report.convergence = convergence_check(trace, scenario, slack);
            }
            for (const std::string& line : report.lines())
            {
                out << line << '\n';
            }
            return static_cast<int>(report.pass() ? exit_pass : exit_check_failed);
        });
    }

    int cmd_bits(std::int64_t maxinc, std::int64_t max_r, std::ostream& out, std::ostream& err)
    {
        return guarded(err, [&] {
            const CounterParams p{maxinc, max_r};
            p.validate();
            out << "maxbound=" << p.maxbound() << " bits=" << bits_required(maxinc, max_r) << '\n';
            return static_cast<int>(exit_pass);
        });
    }

    int cmd_sweep(const std::filesystem::path& grid_path, const std::filesystem::path& out_path, std::ostream& out,
                  std::ostream& err)
    {
        return guarded(err, [&] {
            const std::string csv = sweep_csv(sweep(parse_grid(read_file(grid_path))));
            if (out_path.empty())
            {
                out << csv;
            }
            else
            {
                std::ofstream file(out_path);
                if (!file)
                {
                    throw ConfigError("cannot write " + out_path.string());
                }
                file << csv;
            }
            return static_cast<int>(exit_pass);
        });
    }
} // namespace boundstab
