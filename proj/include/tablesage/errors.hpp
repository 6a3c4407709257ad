#pragma once

#include <stdexcept>
#include <string>

namespace tablesage {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file is missing or cannot be parsed.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Data loaded fine but violates a dataset or schema invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// Not enough candidates to draw the requested demonstrations.
class SamplingError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// A message sequence would exceed the backend token limit.
class TokenBudgetError : public Error {
 public:
  TokenBudgetError(std::size_t estimate, std::size_t limit)
      : Error("token budget exceeded: estimated " + std::to_string(estimate) + " tokens, limit " +
              std::to_string(limit) + " (over by " + std::to_string(estimate - limit) + ")"),
        estimate_(estimate),
        limit_(limit) {}

  std::size_t estimate() const { return estimate_; }
  std::size_t limit() const { return limit_; }

 private:
  std::size_t estimate_;
  std::size_t limit_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class ReplayError : public Error {
 public:
  using Error::Error;
};

}  // namespace tablesage
