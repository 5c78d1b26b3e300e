#pragma once

#include <stdexcept>
#include <string>

namespace frontguard {

// Base for everything the library throws on contract violations.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

// argmax over A's payoff column is not unique.
class AmbiguousArgmax : public Error {
 public:
  using Error::Error;
};

// No state has a participating honest message, so conditional values are undefined.
class NoParticipation : public Error {
 public:
  using Error::Error;
};

class RootBracketFailure : public Error {
 public:
  using Error::Error;
};

class SizeLimit : public Error {
 public:
  using Error::Error;
};

class PeriodViolation : public Error {
 public:
  using Error::Error;
};

// Internal invariant of the chain model broke (e.g. an address collision).
class EngineFault : public Error {
 public:
  using Error::Error;
};

class ScenarioError : public Error {
 public:
  ScenarioError(const std::string& field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace frontguard
