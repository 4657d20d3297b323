#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dynab/config.hpp"

int main(int argc, char** argv) {
    CLI::App app{"finite abstractions of smooth dynamical systems"};
    app.require_subcommand(1);

    dynab::CliOverrides ov;
    std::uint64_t seed = 0;
    std::string out_dir;
    bool have_seed = false;
    app.add_flag("--quiet,-q", ov.quiet, "suppress progress output");
    app.add_option("--jobs,-j", ov.jobs, "number of worker threads (0 = default)");
    auto* seed_opt = app.add_option("--seed", seed, "override the config seed");
    auto* out_opt = app.add_option("--out", out_dir, "override the output directory");

    std::string config;
    for (const char* name : {"validate", "abstract", "check", "verify", "plot"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("config", config, "path to the run config (JSON)")->required();
    }

    CLI11_PARSE(app, argc, argv);

    have_seed = seed_opt->count() > 0;
    if (have_seed) ov.seed = seed;
    if (out_opt->count() > 0) ov.out_dir = out_dir;

    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "validate") return dynab::cmd_validate(config, std::cout);
    if (cmd == "abstract") return dynab::cmd_abstract(config, ov, std::cout);
    if (cmd == "check") return dynab::cmd_check(config, ov, std::cout);
    if (cmd == "verify") return dynab::cmd_verify_safety(config, ov, std::cout);
    if (cmd == "plot") return dynab::cmd_plot_data(config, ov, std::cout);
    return 2;
}
