#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace lpthresh {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitMaxIter = 2;

struct CommandOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir = "results";
    unsigned workers = 1;
    bool quick = false;
    std::optional<std::uint64_t> seed;
    // solve only; override the problem section of the config
    std::optional<std::filesystem::path> matrix;
    std::optional<std::filesystem::path> rhs;
    std::optional<std::filesystem::path> truth;
    std::optional<std::size_t> sparsity;
    std::string command_line;  ///< recorded in the manifest
};

/// Solves one instance and prints a JSON report on `out`.
/// 0 on convergence, 2 when max_iter was hit, 1 on bad input.
int cmd_solve(const CommandOptions& options, std::ostream& out, std::ostream& err);
/// Runs the configured sweep; writes CSV, TSV and manifest.json into out_dir.
int cmd_sweep(const CommandOptions& options, std::ostream& out, std::ostream& err);
/// As cmd_sweep, but the config must list all six rules; prints a ranking table.
int cmd_compare(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Entry point behind the `lpthresh` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lpthresh
