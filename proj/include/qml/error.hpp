#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qml {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lexing/parsing failure. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : Error(position(line, column) + msg), detail_(msg), line_(line), column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  // The message without the position prefix.
  const std::string& detail() const { return detail_; }

 private:
  static std::string position(std::size_t line, std::size_t column) {
    if (line == 0 && column == 0) return {};
    return std::to_string(line) + ":" + std::to_string(column) + ": ";
  }
  std::string detail_;
  std::size_t line_;
  std::size_t column_;
};

class SortError : public Error {
 public:
  using Error::Error;
};

// A construct that the signature's mode forbids (encoding in classical
// mode, primitive identity in AOT mode).
class ModeError : public Error {
 public:
  using Error::Error;
};

// A construct outside the fragment an operation handles.
class Unsupported : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

// An explicit search or quantifier budget was exceeded. Never silently
// truncated.
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace qml
