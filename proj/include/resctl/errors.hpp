#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace resctl {

/// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: a precondition or a config/archive field is wrong. CLI exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg, std::string field = {})
      : Error(field.empty() ? msg : field + ": " + msg), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Archive could not be parsed or has the wrong version. CLI exit code 2.
class ArchiveError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A computation could not be carried out to the required accuracy. CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A matrix that must be inverted or factorized is too ill-conditioned.
class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition, double threshold)
      : NumericalError(what + " (condition estimate " + fmt(condition) + " exceeds " + fmt(threshold) + ")"),
        condition_(condition),
        threshold_(threshold) {}

  double condition() const noexcept { return condition_; }
  double threshold() const noexcept { return threshold_; }

 private:
  static std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
  }

  double condition_;
  double threshold_;
};

}  // namespace resctl
