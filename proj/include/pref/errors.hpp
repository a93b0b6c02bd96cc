#pragma once

#include <stdexcept>
#include <string>

namespace pref {

/// Bad argument or dimension mismatch.
class InvalidArgument : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Sparse coder hit its iteration cap without certifying optimality.
class SolverFailure : public std::runtime_error {
public:
  SolverFailure(const std::string& what, double duality_gap)
      : std::runtime_error(what + " (duality gap " + std::to_string(duality_gap) + ")"),
        duality_gap_(duality_gap) {}
  double duality_gap() const noexcept { return duality_gap_; }

private:
  double duality_gap_;
};

/// Image carries no usable appearance evidence (every patch masked out).
class DegenerateInput : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed manifest or artifact file.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent run configuration or artifact dimensions.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace pref
