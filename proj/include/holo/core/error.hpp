#pragma once

#include <stdexcept>
#include <string>

namespace holo {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad shape, out-of-range value).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN/Inf or otherwise diverged.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Malformed tensor container. The kind distinguishes the failure modes.
class FormatError : public Error {
 public:
  enum class Kind { BadMagic, UnsupportedVersion, UnsupportedDtype, Truncated, Malformed };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace holo
