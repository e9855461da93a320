#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sgm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotChordalError : Error {
  using Error::Error;
};

struct EdgeAbsentError : Error {
  using Error::Error;
};

struct SetsOverlapError : Error {
  using Error::Error;
};

struct ContextKeysMismatchError : Error {
  using Error::Error;
};

struct EmptyConditioningSetError : Error {
  using Error::Error;
};

struct ZeroCellError : Error {
  using Error::Error;
};

struct SupportMismatchError : Error {
  using Error::Error;
};

struct NoStrataPossibleError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct ParseError : Error {
  std::size_t line = 0;
  std::size_t col = 0;
  ParseError(const std::string& msg, std::size_t line_, std::size_t col_)
      : Error(msg + " (line " + std::to_string(line_) + ", column " +
              std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

struct SchemaError : Error {
  std::string location;  // JSON-pointer style path
  SchemaError(const std::string& msg, std::string location_)
      : Error(msg + " at " + location_), location(std::move(location_)) {}
};

}  // namespace sgm
