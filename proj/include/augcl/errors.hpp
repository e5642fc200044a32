#pragma once

#include <stdexcept>
#include <string>

namespace augcl {

// Caller broke a documented precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class InvalidShape : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorruptDataset : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

#define AUGCL_REQUIRE(cond, msg)                      \
  do {                                                \
    if (!(cond)) throw ::augcl::ContractViolation(msg); \
  } while (0)

}  // namespace augcl
