#pragma once

#include <stdexcept>
#include <string>

namespace ctree {

// Base of every error thrown by the library. The CLI maps IoError to exit
// code 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation, e.g. an alarm that is not a
// descendant of the queried node.
class DomainError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, long long alarm_id)
      : Error(what), alarm_id_(alarm_id) {}

  long long alarm_id() const noexcept { return alarm_id_; }

 private:
  long long alarm_id_;
};

class SizeError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class VerificationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctree
