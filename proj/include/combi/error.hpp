#pragma once

#include <stdexcept>
#include <string>

namespace combi {

// Exit code carried by each error so the CLI can map it directly.
class Error : public std::runtime_error {
public:
  Error(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
  int exit_code() const { return code_; }

private:
  int code_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what, 2) {}
};

class MembershipError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NoClosedFormError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class TooLargeError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(what, 3) {}
};

class BudgetExceeded : public Error {
public:
  explicit BudgetExceeded(const std::string& what) : Error(what, 4) {}
};

}  // namespace combi
