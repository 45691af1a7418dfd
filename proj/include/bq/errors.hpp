#pragma once

#include <stdexcept>
#include <string>

namespace bq {

// Every error raised by the library derives from Error so callers can map it
// to an exit code without knowing the concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonpositiveRate : public Error {
 public:
  using Error::Error;
};

class UnstableQueue : public Error {
 public:
  using Error::Error;
};

class InvalidChain : public Error {
 public:
  using Error::Error;
};

class IncompatibleGrids : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class QuadratureFailure : public Error {
 public:
  using Error::Error;
};

class NoFeasiblePoint : public Error {
 public:
  using Error::Error;
};

class StepUnderflow : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Malformed config text. Carries the 1-based line number when known.
class ParseError : public InvalidConfig {
 public:
  ParseError(int line, const std::string& msg)
      : InvalidConfig("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Well-formed config that violates a model invariant.
class ValidationError : public InvalidConfig {
 public:
  ValidationError(std::string field, const std::string& msg)
      : InvalidConfig(field + ": " + msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class MissingInput : public Error {
 public:
  using Error::Error;
};

}  // namespace bq
