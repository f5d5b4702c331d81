#pragma once

#include <stdexcept>
#include <string>

namespace graded {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Raised on malformed input text; the message carries line/position context.
class ParseError : public Error {
public:
  using Error::Error;
};

// Raised when a structure fails its well-formedness checks.
class ValidationError : public Error {
public:
  using Error::Error;
};

} // namespace graded
