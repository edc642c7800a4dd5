#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleRoute : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised when a caller breaks a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Carries every problem found, not only the first one.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}

  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed (" + std::to_string(issues.size()) + " issue";
    out += issues.size() == 1 ? ")" : "s)";
    for (const auto& s : issues) {
      out += "\n  - ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> issues_;
};

}  // namespace mt
