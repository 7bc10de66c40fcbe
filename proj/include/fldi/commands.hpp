#pragma once

// Subcommand runners behind the `fldi` executable. Each writes its CSV files
// plus `run.meta` into the output directory and nowhere else.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fldi/config.hpp"

namespace fldi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

inline const std::vector<std::string> kCommands{"state",    "phasematch", "powersweep", "visibility",
                                                "misalign", "stability",  "ccr"};

struct RunOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir = ".";
  /// ccr only: restrict the sweep to one model.
  std::optional<std::string> ccr_model;
};

/// Loads the config, runs `command` and maps errors to exit codes
/// (2 for usage/config problems, 1 for model/runtime failures).
int run_command(std::string_view command, const RunOptions& options, std::ostream& out, std::ostream& err);

/// Direct entry points; they throw instead of returning exit codes.
void cmd_state(const config::ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out);
void cmd_phasematch(const config::ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out);
void cmd_powersweep(const config::ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out);
void cmd_visibility(const config::ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out);
void cmd_misalign(const config::ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out);
void cmd_stability(const config::ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out);
void cmd_ccr(const config::ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out,
             const std::optional<std::string>& model = std::nullopt);

}  // namespace fldi::cli
