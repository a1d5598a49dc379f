#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace eevipn {

// Configuration problems (bad grid, impossible profile, ...). The CLI maps
// these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed data handed between modules (out-of-range triple, flow set that
// does not belong to the assignment, ...).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form of a double. Every serialized number in
// the project (CSV, LP files, JSON-adjacent text) goes through this so that
// output is byte-stable and re-parses to the identical bit pattern.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_int(long long v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace eevipn
