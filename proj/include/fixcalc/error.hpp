#pragma once

#include <stdexcept>
#include <string>

namespace fixcalc {

// Error classes map 1:1 onto the CLI exit codes (see cli.hpp).
enum class ErrorKind {
  parse,         // malformed input text
  dimension,     // incompatible ranks / matrix shapes
  missing_data,  // an operation needs data the caller did not supply
  verification,  // a supplied certificate or invariant check failed
  range,         // input outside the supported parameter range
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

}  // namespace fixcalc
