#pragma once

#include <stdexcept>
#include <string>

namespace procnets {

enum class ErrorKind {
  invalid_argument,
  config,
  dimension,
  io,
  format,
  parse,
  training,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Recoverable conditions only (dropped records, clipped values). Goes to stderr.
void warn(const std::string& message);

}  // namespace procnets
