#pragma once

#include <stdexcept>
#include <string>

namespace elect {

// Raised when inputs violate a documented precondition. The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised on unreadable, unwritable or malformed files. The CLI maps it to exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace elect
