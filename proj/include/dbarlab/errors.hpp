#pragma once

#include <stdexcept>
#include <string>

namespace dbarlab {

/// Invalid user input: malformed config, bad parameter combination,
/// violated precondition that a caller could have checked.
class config_error : public std::invalid_argument {
public:
  explicit config_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Iterative solver failed to reach the requested tolerance.
class solver_error : public std::runtime_error {
public:
  explicit solver_error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem / serialization failure.
class io_error : public std::runtime_error {
public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dbarlab
