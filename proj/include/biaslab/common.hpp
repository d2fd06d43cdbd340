#pragma once

#include <stdexcept>
#include <string>

namespace biaslab {

// Raised for invalid configuration / input contracts; the CLI maps it to
// exit code 1. Everything else surfaces as exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Verbosity is controlled by the BIASLAB_LOG env var only:
//   0 = silent, 1 = warnings (default), 2 = info.
int log_level();
void warn(const std::string& msg);
void info(const std::string& msg);

// Shortest round-trip decimal form, for byte-stable CSV output.
std::string format_double(double v);

// FNV-1a over a string, used to stamp output file names with a config hash.
std::uint64_t fnv1a(const std::string& s);
std::string hash_hex(std::uint64_t h);

}  // namespace biaslab
