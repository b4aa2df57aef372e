#pragma once

#include <stdexcept>
#include <string>

namespace mixrecon {

// Base of everything the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something that violates an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Input file exists but does not parse.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Problem too large for the requested method.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace mixrecon
