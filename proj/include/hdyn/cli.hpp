#pragma once

// Command-line front end. Exit codes: 0 success, 1 failed check or assertion,
// 2 usage or validation error.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hdyn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;
  std::optional<std::string> curve;
  std::optional<std::string> model;
  std::vector<double> t;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool exact = false;
  std::optional<double> assert_converged;
  std::vector<int> l;
  std::vector<std::string> r;
  std::optional<std::string> rep;
  std::vector<int> degrees;
  std::vector<int> entry;
  std::optional<double> C;
  std::optional<double> alpha;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Throws std::invalid_argument on unknown keys, wrong types or failed validation.
RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& config);
/// Command-specific checks; throws std::invalid_argument.
void validate(const RunConfig& config);

/// Runs a validated config; writes reports to `out` and diagnostics to `err`.
int execute(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full entry point: args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hdyn::cli
