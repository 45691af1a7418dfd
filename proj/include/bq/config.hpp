#pragma once

// Sectioned key = value configuration: parsing, validation, canonical
// serialization and digest.

#include <filesystem>
#include <string>
#include <vector>

#include "bq/experiment.hpp"
#include "bq/optimizer.hpp"

namespace bq {

/// Non-optimized reference rates evaluated for one dispatch interval.
struct ReferencePair {
  double r;
  double mu_i;
  double mu_j;
  bool operator==(const ReferencePair&) const = default;
};

struct OptimizeSpec {
  SystemParams system;
  GridSpec grid;
  std::vector<ReferencePair> references{
      {3.0, 4.5, 2.5}, {5.0, 2.5, 0.5}, {7.0, 6.5, 5.5}, {9.0, 8.5, 6.5}};
};

struct AppConfig {
  SimConfig sim;  ///< base replication config; sim.weights is the shared weight set
  SweepSpec sweep;
  OptimizeSpec optimize;
};

/// Throws ParseError (with line) for malformed text or unknown keys, and
/// ValidationError naming the field for invariant violations. Requires
/// [system] lambda and [simulation] horizon; everything else has defaults.
AppConfig parse_config_text(const std::string& text);
AppConfig parse_config(const std::filesystem::path& path);

/// Cross-field checks (stability of explicit rates against every swept
/// arrival rate, weights, grid). Called by the parsers.
void validate(const AppConfig& cfg);

/// Every key with its effective value, sections and keys in sorted order.
std::string serialize_config(const AppConfig& cfg);

/// FNV-1a 64 of the canonical serialization, as 16 hex digits.
std::string config_digest(const AppConfig& cfg);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace bq

namespace bq {

/// Fills derived fields (shared bounds, initial rates, seed) after edits.
void finalize(AppConfig& cfg);

/// Built-in configuration used when no config file is given.
AppConfig default_config();

}  // namespace bq
