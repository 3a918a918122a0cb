#pragma once

#include <stdexcept>
#include <string>

namespace scomp {

/// Domain error: invalid arguments, broken invariants, failed preconditions.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input data; message carries file and line/record context.
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// Filesystem failure; message carries the offending path.
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace scomp
