#ifndef SFINT_CLI_HPP
#define SFINT_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sfint/io.hpp"

namespace sfint {

struct RunConfig {
    std::string command;  // simulate, fit, summarize, detect, compare, test-overlap, export-surface
    Config config;        // unresolved overrides; defaults fill the rest
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;  // replaces mcmc.seed
    int threads = 1;
};

const std::vector<std::string>& command_names();

/// Dispatches one command. Results go to files in output_dir plus short
/// key=value lines on `out`. Throws Error on failure.
void run(const RunConfig& config, std::ostream& out);

/// run() with failures reported as a single `error <Code>: <message>` line on
/// `err`. Returns the process exit status.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace sfint

#endif  // SFINT_CLI_HPP
