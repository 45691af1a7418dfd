#pragma once

// Subcommand drivers behind the command-line front end. Each returns the
// process exit code: 0 success, 1 configuration error, 2 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bq/config.hpp"

namespace bq {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> replications;
  std::optional<std::string> policy;  ///< on | off | both
  std::optional<std::vector<double>> intervals;
  std::optional<std::vector<double>> lambdas;
  std::filesystem::path out = "out";
  std::optional<std::filesystem::path> in;  ///< charts input directory, defaults to out
  std::string box_grouping = "pooled";      ///< pooled | interval
};

/// Config file (or defaults) with command-line overrides applied, validated.
AppConfig resolve_config(const CommandOptions& opts);

int cmd_sweep(const CommandOptions& opts, std::ostream& log);
int cmd_optimize(const CommandOptions& opts, std::ostream& log);
int cmd_charts(const CommandOptions& opts, std::ostream& log);
int cmd_conformance(const CommandOptions& opts, std::ostream& log);

}  // namespace bq
