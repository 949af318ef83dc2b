#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "holo/core/error.hpp"
#include "holo/core/optical_config.hpp"

namespace holo::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

/// Bad key, malformed line or unparsable value. Maps to exit code 2.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Flat `key = value` configuration. Every known key always has a value
/// (its default until set); unknown keys are rejected.
class RunConfig {
 public:
  RunConfig();

  /// One `key = value` per line; `#` starts a comment; blank lines ignored.
  static RunConfig parse(std::string_view text);
  static RunConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// "key=value" form used by --set.
  void set_assignment(const std::string& assignment);

  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  int integer(const std::string& key) const;
  std::uint64_t u64(const std::string& key) const;
  bool flag(const std::string& key) const;

  /// All keys in sorted order, one `key = value` line each.
  std::string to_text() const;

  OpticalConfig optics() const;

  static const std::map<std::string, std::string>& defaults();

 private:
  std::map<std::string, std::string> values_;
};

/// Runs `n` independent jobs on up to `threads` workers. Job i must only
/// write state owned by index i. After a failure no new jobs start; the
/// exception of the lowest failed index is rethrown once workers stop.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& job);

/// Executes one subcommand with a resolved configuration, writing below `out`.
/// Library exceptions propagate.
void run_command(const std::string& command, const RunConfig& config,
                 const std::filesystem::path& out, int threads);

const std::vector<std::string>& command_names();

/// Process entry point: parses argv, resolves the configuration, runs the
/// command and maps failures to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace holo::cli
