#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace artsep {

// Error classes map onto the CLI exit codes:
//   ConfigError -> 2, DataError -> 3, NumericalError -> 4.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr const char* kToolVersion = "0.1.0";

// Reproducibility stamp carried by every saved artifact.
struct ModelMeta {
  std::string tool_version;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
};

}  // namespace artsep
