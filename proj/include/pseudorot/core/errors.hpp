#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pseudorot {

// Base of every failure the library reports. `kind()` is a stable
// machine-readable tag used in error records.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InsufficientExpansion : public Error {
 public:
  InsufficientExpansion(const std::string& message, long available)
      : Error("insufficient_expansion", message), available_(available) {}
  long available_depth() const noexcept { return available_; }

 private:
  long available_;
};

class InsufficientPrecision : public Error {
 public:
  InsufficientPrecision(const std::string& message, long required_depth)
      : Error("insufficient_precision", message), required_(required_depth) {}
  long required_depth() const noexcept { return required_; }

 private:
  long required_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(const std::string& message, long achievable_depth)
      : Error("budget_exceeded", message), achievable_(achievable_depth) {}
  long achievable_depth() const noexcept { return achievable_; }

 private:
  long achievable_;
};

class IntegrationDrift : public Error {
 public:
  explicit IntegrationDrift(const std::string& message)
      : Error("integration_drift", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("invalid_argument", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations)
      : Error("config_error", join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) {
      if (!out.empty()) out += "; ";
      out += s;
    }
    return out;
  }
  std::vector<std::string> violations_;
};

}  // namespace pseudorot
