// Command-line front end: surfmix <subcommand> --config FILE [--seed N] [--threads N] [--out DIR]
#include <iostream>

#include <CLI11.hpp>

#include "surfmix/commands.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Biased monotone-surface chains: simulation and exact verification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", surfmix::tool_version);

    surfmix::CommandOptions options;
    std::uint64_t seed = 0;
    std::string chosen;
    for (const auto& name : surfmix::command_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", options.config, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--threads", options.threads, "worker threads (0 = all cores)");
        sub->add_option("--out", options.out_dir, "output directory");
        sub->callback([&chosen, name] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : surfmix::exit_config_error;
    }
    for (const auto* sub : app.get_subcommands())
        if (sub->count("--seed") > 0) options.seed = seed;
    return surfmix::run_command(chosen, options, std::cout, std::cerr);
}
