#pragma once

// Batch front end. Each experiment has a flat key/value config; defaults are
// overridden by a JSON file, then by --set pairs, then by --seed. Every file
// written starts with the hash of the effective config.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hybridswap::cli {

struct RunOptions {
  std::optional<std::string> config_path;
  std::string out_dir = "results";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;  // "key=value"; value parsed as JSON, else taken as a string
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

std::vector<std::string> experiments();

/// Defaults of one experiment as pretty-printed JSON.
std::string default_config(const std::string& experiment);

/// Effective config after applying the file, the --set pairs and the seed.
/// Throws Error(config) on unknown keys, wrong types or unreadable files.
std::string resolve_config(const std::string& experiment, const RunOptions& opts);

/// 64-bit FNV-1a of the compact JSON dump, as 16 hex digits.
std::string config_hash(const std::string& config_json);

/// Runs one experiment and returns the exit code; errors go to `log`.
int run(const std::string& experiment, const RunOptions& opts, std::ostream& log);

}  // namespace hybridswap::cli
