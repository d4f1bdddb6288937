#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bps/experiments/config.hpp"
#include "bps/experiments/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bouncy particle sampler experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_override = 0;
    bool seed_given = false;
    int replicates_override = 0;
    std::string out_dir_override;
    double mesh_override = -1.0;

    CLI::App* run = app.add_subcommand("run", "execute an experiment config");
    run->add_option("config", config_path, "experiment config file")->required();
    run->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    run->add_option("--replicates", replicates_override, "override the replicate count");
    run->add_option("--out-dir", out_dir_override, "override the output directory");
    run->add_option("--mesh", mesh_override, "discretization mesh for sample dumps");

    CLI::App* validate = app.add_subcommand("validate", "check a config without running");
    validate->add_option("config", config_path, "experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    auto loaded = bps::experiments::load_config(config_path);
    if (app.got_subcommand(validate)) {
        if (loaded.problems.empty()) {
            std::cout << config_path << ": ok\n";
            return 0;
        }
        std::cout << bps::experiments::format_problems(config_path, loaded.problems);
        return 0;  // validate reports, it does not fail the shell
    }

    if (!loaded.problems.empty()) {
        std::cerr << bps::experiments::format_problems(config_path, loaded.problems);
        return 1;
    }
    if (seed_given) loaded.config.seed = seed_override;
    if (replicates_override > 0) loaded.config.replicates = replicates_override;
    if (!out_dir_override.empty()) loaded.config.output_dir = out_dir_override;
    if (mesh_override >= 0.0) loaded.config.run.mesh = mesh_override;
    return bps::experiments::run_experiment(loaded.config);
}
