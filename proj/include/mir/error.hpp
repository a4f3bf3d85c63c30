#pragma once

#include <stdexcept>
#include <string>

namespace mir {

// A precondition on a named input was violated.
class InvalidArgument : public std::invalid_argument {
 public:
  InvalidArgument(std::string field, const std::string& message);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// A computation produced something unusable (singular system, NaN iterate, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mir
