#pragma once

#include <stdexcept>
#include <string>

namespace fptmc {

// Thrown for invalid user-facing configuration (file schema, bad values).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a numerical routine cannot proceed (non-SPD matrix,
// degenerate inputs, impossible transitions).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown for filesystem / serialization failures.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fptmc
