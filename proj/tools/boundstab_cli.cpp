#include "boundstab/cli.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"bounded-counter stabilization simulator"};
    app.require_subcommand(1);

    std::string scenario;
    std::string trace;
    std::string out;
    std::string grid;
    std::optional<std::uint64_t> seed;
    std::int64_t slack = 1;
    std::int64_t maxinc = 0;
    std::int64_t max_r = 0;

    CLI::App* run = app.add_subcommand("run", "simulate a scenario and write its trace");
    run->add_option("--scenario", scenario)->required();
    run->add_option("--seed", seed);
    run->add_option("--out", out)->required();

    CLI::App* check = app.add_subcommand("check", "verify a trace against its scenario");
    check->add_option("--trace", trace)->required();
    check->add_option("--scenario", scenario)->required();
    check->add_option("--slack", slack)->check(CLI::PositiveNumber);

    CLI::App* bits = app.add_subcommand("bits", "modulus and bit width for one family");
    bits->add_option("--maxinc", maxinc)->required();
    bits->add_option("--maxr", max_r)->required();

    CLI::App* sweep = app.add_subcommand("sweep", "bit widths over a delay x rate grid");
    sweep->add_option("--grid", grid)->required();
    sweep->add_option("--out", out);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : boundstab::exit_config_error;
    }

    if (*run)
    {
        return boundstab::cmd_run(scenario, seed, out, std::cout, std::cerr);
    }
    if (*check)
    {
        return boundstab::cmd_check(trace, scenario, slack, std::cout, std::cerr);
    }
    if (*bits)
    {
        return boundstab::cmd_bits(maxinc, max_r, std::cout, std::cerr);
    }
    return boundstab::cmd_sweep(grid, out, std::cout, std::cerr);
}
