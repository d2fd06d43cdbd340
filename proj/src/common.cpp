#include "biaslab/common.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace biaslab {

int log_level() {
  static int level = [] {
    const char* env = std::getenv("BIASLAB_LOG");
    if (!env || !*env) return 1;
    return std::atoi(env);
  }();
  return level;
}

void warn(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[biaslab] warning: %s\n", msg.c_str());
}

void info(const std::string& msg) {
  if (log_level() >= 2) std::fprintf(stderr, "[biaslab] %s\n", msg.c_str());
}

std::string format_double(double v) {
  char buf[40];
  // Shortest representation that round-trips.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = std::strtod(buf, nullptr);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace biaslab
