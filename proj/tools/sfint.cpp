#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "sfint/cli.hpp"
#include "sfint/error.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Sparse factor models with interactions: simulate, fit and analyze"};
    app.require_subcommand(1, 1);

    std::string config_path;
    std::vector<std::string> overrides;
    sfint::RunConfig run;
    if (const char* env = std::getenv("SFINT_OUTPUT_DIR")) run.output_dir = env;
    std::uint64_t seed = 0;

    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--set", overrides, "override one key, e.g. --set mcmc.iters=600");
    app.add_option("--output-dir", run.output_dir, "directory for results (default $SFINT_OUTPUT_DIR or .)");
    auto* seed_opt = app.add_option("--seed", seed, "run seed (replaces mcmc.seed)");
    app.add_option("--threads", run.threads, "worker threads for chains and replicates")->check(CLI::PositiveNumber);
    for (const std::string& name : sfint::command_names()) app.add_subcommand(name)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    run.command = app.get_subcommands().front()->get_name();
    if (*seed_opt) run.seed = seed;

    try {
        if (!config_path.empty()) run.config = sfint::read_config(config_path);
        for (const std::string& o : overrides) sfint::apply_override(run.config, o);
    } catch (const sfint::Error& e) {
        std::cerr << "error " << sfint::to_string(e.code()) << ": " << e.what() << '\n';
        return 2;
    }
    return sfint::run_command(run, std::cout, std::cerr);
}
