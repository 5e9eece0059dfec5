#ifndef SURFMIX_COMMANDS_HPP
#define SURFMIX_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "surfmix/io.hpp"

namespace surfmix {

enum ExitCode : int {
    exit_ok = 0,
    /// Unexpected failure not covered by the codes below.
    exit_internal_error = 1,
    exit_config_error = 2,
    exit_resource_cap = 3,
    exit_verification_failure = 4,
};

struct CommandOptions {
    std::filesystem::path config;
    std::optional<std::uint64_t> seed;
    /// 0 = all hardware threads.
    unsigned threads = 0;
    std::filesystem::path out_dir = ".";
};

/// sample, couple, hit, drift, mix-exact, slow, lemmas
const std::vector<std::string>& command_names();

/// Enumeration cap: SURFMIX_ENUM_CAP if set, else config "cap", else the default.
std::uint64_t enumeration_cap(const Json& config);

/// Loads the config, runs the subcommand, writes its artifacts under out_dir and
/// a one-line summary to out. Errors are reported on err and mapped to exit codes.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err);

} // namespace surfmix

#endif
