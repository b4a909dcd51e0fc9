#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semidx {

// Base for every domain failure raised by the library. The CLI maps these
// to exit code 1; anything else is a bug.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position, const std::string& unit = "position")
      : Error(what + " at " + unit + " " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Dialog monotony breach: an answer below a negated node.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace semidx
