#ifndef AEX_ERRORS_H_
#define AEX_ERRORS_H_

#include <stdexcept>
#include <string>

namespace aex {

// Base class for every error raised by the library. The category decides the
// process exit code used by the command-line tool.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
};

// Bad arguments, mismatched widths, malformed input values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unwritable files, parse failures of on-disk formats.
class IoError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

// Singular systems, NaN losses, degenerate statistics.
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

// Throws ValidationError with `message` unless `condition` holds.
void Require(bool condition, const std::string& message);

}  // namespace aex

#endif  // AEX_ERRORS_H_
