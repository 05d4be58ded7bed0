// Command-line front end: `run` executes a scenario config and writes the
// CSV trace / JSON summary, `gen-example` emits a seeded scenario in the
// style of the reference experiment.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ocorg/scenario.hpp"

int main(int argc, char** argv) {
    CLI::App app{"OCO-RG: online-gradient reference governor for constrained linear systems"};
    app.set_version_flag("--version", "ocorg 0.1.0");
    app.require_subcommand(0, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string trace_path, summary_path;
    auto* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("--config", config_path, "scenario config (JSON)")->required();
    run->add_option("--set", overrides, "override config values, key.path=value");
    run->add_option("--trace", trace_path, "CSV trace output path");
    run->add_option("--summary", summary_path, "JSON summary output path");

    std::uint64_t seed = 0;
    std::string out_path;
    auto* gen = app.add_subcommand("gen-example", "generate a seeded example scenario");
    gen->add_option("--seed", seed, "generator seed")->required();
    gen->add_option("--out", out_path, "output config path")->required();
    std::uint64_t gen_T = 1000;
    gen->add_option("--T", gen_T, "run horizon written into the config");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return ocorg::run_command(config_path, overrides, trace_path, summary_path, std::cerr);
    if (gen->parsed())
        return ocorg::gen_example_command(seed, out_path, std::cerr, gen_T);
    std::cout << app.help() << std::endl;
    return 0;
}
